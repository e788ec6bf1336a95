//! Download-task manifests for public assets, integrity checks against a
//! metadata sidecar, and the naming and layout rules for transition
//! graphics and thumbnails.

use std::collections::HashSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::script::{format_clock_range, parse_clock_range, AnnotatedScript, AssetId, TimeRange};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub asset: AssetId,
    pub url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<TimeRange>,
}

impl ManifestEntry {
    pub fn render(&self) -> String {
        match self.range {
            Some(r) => format!("{}: {} {}", self.asset, self.url, format_clock_range(r)),
            None => format!("{}: {}", self.asset, self.url),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("public asset {0} has no source annotation")]
    MissingSource(AssetId),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Public assets in first-appearance order, one entry each.
pub fn manifest_entries(script: &AnnotatedScript) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (_, tag) in script.asset_opens() {
        for id in tag.label.assets().iter().filter(|id| id.is_public()) {
            if !seen.insert(*id) {
                continue;
            }
            let source = tag.source_for(id).ok_or(ManifestError::MissingSource(*id))?;
            if id.is_video() && source.range.is_none() {
                return Err(ManifestError::MissingSource(*id));
            }
            let range = if id.is_video() { source.range } else { None };
            out.push(ManifestEntry { asset: *id, url: source.url.clone(), range });
        }
    }
    Ok(out)
}

fn render(entries: &[&ManifestEntry]) -> String {
    let mut doc = String::new();
    for e in entries {
        let _ = writeln!(doc, "{}", e.render());
    }
    doc
}

/// Renders the image and video download manifests, in that order.
pub fn generate_manifest(script: &AnnotatedScript) -> Result<(String, String), ManifestError> {
    let entries = manifest_entries(script)?;
    let (videos, images): (Vec<&ManifestEntry>, Vec<&ManifestEntry>) = entries.iter().partition(|e| e.asset.is_video());
    Ok((render(&images), render(&videos)))
}

pub fn parse_manifest(doc: &str) -> Result<Vec<ManifestEntry>, ManifestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in doc.lines().enumerate() {
        let line_no = i + 1;
        let fail = |message: String| ManifestError::Syntax { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let id = head.strip_suffix(':').ok_or_else(|| fail("expected `<id>: <url>`".into()))?;
        let asset: AssetId = id.trim().parse().map_err(|_| fail(format!("invalid asset id `{}`", id.trim())))?;
        if !asset.is_public() {
            return Err(fail(format!("{asset} is an original asset and is never downloaded")));
        }
        let fields: Vec<&str> = rest.split_whitespace().collect();
        let entry = match (asset.is_video(), fields.as_slice()) {
            (false, [url]) => ManifestEntry { asset, url: url.to_string(), range: None },
            (true, [url, range @ ..]) if !range.is_empty() => {
                let joined = range.join(" ");
                let range =
                    parse_clock_range(&joined).ok_or_else(|| fail(format!("bad extraction range `{joined}`")))?;
                ManifestEntry { asset, url: url.to_string(), range: Some(range) }
            }
            (true, _) => return Err(fail(format!("{asset} needs `<url> <m:ss>-<m:ss>`"))),
            (false, _) => return Err(fail(format!("{asset} needs exactly one URL"))),
        };
        if !seen.insert(asset) {
            return Err(fail(format!("{asset} is listed twice")));
        }
        out.push(entry);
    }
    Ok(out)
}

/// Rectangle in pixels, origin top left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

/// One record of the metadata sidecar. `id` is an asset id, a transition
/// graphic name (`f0200`) or a thumbnail variant (`thumbnail_16x9`).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetMetadata {
    pub id: String,
    pub bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logo_embedded: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_box: Option<Rect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_box: Option<Rect>,
}

/// Milliseconds as seconds with at least one decimal: `5.0`, `0.25`.
fn secs(ms: u64) -> String {
    let (s, mut frac) = (ms / 1000, ms % 1000);
    if frac == 0 {
        return format!("{s}.0");
    }
    let mut digits = 3;
    while frac % 10 == 0 {
        frac /= 10;
        digits -= 1;
    }
    format!("{s}.{frac:0digits$}")
}

/// Checks collected files against the manifest. Every entry yields exactly
/// one diagnostic: info `AssetVerified` or an error saying what is wrong.
pub fn verify_assets(entries: &[ManifestEntry], metadata: &[AssetMetadata], tolerance_ms: u64) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for entry in entries {
        let id = entry.asset.to_string();
        let Some(meta) = metadata.iter().find(|m| m.id == id) else {
            out.push(Diagnostic::error("MissingAsset", format!("{id}: no collected file")));
            continue;
        };
        if meta.bytes == 0 {
            out.push(Diagnostic::error("ZeroByteFile", format!("{id}: file is empty")));
            continue;
        }
        match (entry.range, meta.duration_ms) {
            (Some(_), None) => out.push(Diagnostic::error("MissingDuration", format!("{id}: sidecar has no duration"))),
            (Some(r), Some(actual)) => {
                let expected = u64::from(r.end - r.start) * 1000;
                let delta = actual.abs_diff(expected);
                if delta <= tolerance_ms {
                    out.push(Diagnostic::info(
                        "AssetVerified",
                        format!("{id}: PASS ({} s, delta {} s)", secs(actual), secs(delta)),
                    ));
                } else {
                    out.push(Diagnostic::error(
                        "DurationMismatch",
                        format!(
                            "{id}: FAIL delta {} s (expected {} s, got {} s)",
                            secs(delta),
                            secs(expected),
                            secs(actual)
                        ),
                    ));
                }
            }
            (None, _) => out.push(Diagnostic::info("AssetVerified", format!("{id}: PASS ({} bytes)", meta.bytes))),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("part {part} has no transition graphic (valid parts are 2..={parts})")]
pub struct RangeError {
    pub part: usize,
    pub parts: usize,
}

/// `f0200.png` for part 2 through `f1500.png` for part 15.
pub fn transition_graphic_name(part: usize, parts: usize) -> Result<String, RangeError> {
    if part < 2 || part > parts || part > 99 {
        return Err(RangeError { part, parts });
    }
    Ok(format!("f{:04}.png", part * 100))
}

/// The region outside the outer 10% margin on every side.
fn in_central(b: Rect, w: u32, h: u32) -> bool {
    let (w, h) = (u64::from(w), u64::from(h));
    let (x, y, bw, bh) = (u64::from(b.x), u64::from(b.y), u64::from(b.w), u64::from(b.h));
    10 * x >= w && 10 * (x + bw) <= 9 * w && 10 * y >= h && 10 * (y + bh) <= 9 * h
}

pub fn validate_transition_graphic(meta: &AssetMetadata) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let (Some(w), Some(h)) = (meta.width, meta.height) else {
        out.push(Diagnostic::error("MissingDimensions", format!("{}: width and height are required", meta.id)));
        return out;
    };
    if (w, h) != (1920, 1080) {
        out.push(Diagnostic::warning("NonStandardResolution", format!("{}: {w}x{h}, expected 1920x1080", meta.id)));
    }
    // Content sits in the central 80%; within it the title takes the upper
    // 40% and the image the lower 60%, a split at 42% of the full height.
    let split = |y: u32| u64::from(y) * 100;
    let limit = u64::from(h) * 42;
    for (name, rect) in [("text box", meta.text_box), ("image box", meta.image_box)] {
        let Some(rect) = rect else { continue };
        if !in_central(rect, w, h) {
            out.push(Diagnostic::error(
                "MarginViolation",
                format!("{}: {name} reaches into the outer 10% margin", meta.id),
            ));
        }
    }
    if let Some(t) = meta.text_box {
        if split(t.y + t.h) > limit {
            out.push(Diagnostic::warning(
                "TextBoxPlacement",
                format!("{}: title extends below the upper 40% of the content area", meta.id),
            ));
        }
    }
    if let Some(i) = meta.image_box {
        if split(i.y) < limit {
            out.push(Diagnostic::warning(
                "ImageBoxPlacement",
                format!("{}: image extends above the lower 60% of the content area", meta.id),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThumbnailVariant {
    Wide16x9,
    Standard4x3,
    Square1x1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThumbnailSpec {
    pub variant: ThumbnailVariant,
    pub id: &'static str,
    pub ratio: (u64, u64),
    pub max_bytes: Option<u64>,
    pub pixels: Option<(u32, u32)>,
    pub logo_required: bool,
}

pub const THUMBNAIL_SPECS: [ThumbnailSpec; 3] = [
    ThumbnailSpec {
        variant: ThumbnailVariant::Wide16x9,
        id: "thumbnail_16x9",
        ratio: (16, 9),
        max_bytes: Some(2_000_000),
        pixels: None,
        logo_required: true,
    },
    ThumbnailSpec {
        variant: ThumbnailVariant::Standard4x3,
        id: "thumbnail_4x3",
        ratio: (4, 3),
        max_bytes: None,
        pixels: None,
        logo_required: true,
    },
    ThumbnailSpec {
        variant: ThumbnailVariant::Square1x1,
        id: "thumbnail_1x1",
        ratio: (1, 1),
        max_bytes: None,
        pixels: Some((3000, 3000)),
        logo_required: true,
    },
];

pub fn validate_thumbnails(metas: &[AssetMetadata]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for spec in &THUMBNAIL_SPECS {
        let id = spec.id;
        let Some(meta) = metas.iter().find(|m| m.id == id) else {
            out.push(Diagnostic::error("MissingVariant", format!("{id}: thumbnail variant is missing")));
            continue;
        };
        if let Some(max) = spec.max_bytes {
            if meta.bytes > max {
                out.push(Diagnostic::error("OversizeThumbnail", format!("{id}: {} bytes exceeds {max}", meta.bytes)));
            }
        }
        match (meta.width, meta.height) {
            (Some(w), Some(h)) if w > 0 && h > 0 => {
                if let Some((pw, ph)) = spec.pixels {
                    if (w, h) != (pw, ph) {
                        out.push(Diagnostic::error("SquareResolution", format!("{id}: {w}x{h}, expected {pw}x{ph}")));
                    }
                }
                let (rw, rh) = spec.ratio;
                let (w, h) = (u64::from(w), u64::from(h));
                if (w * rh).abs_diff(h * rw) * 100 > h * rw {
                    out.push(Diagnostic::warning("AspectRatio", format!("{id}: {w}x{h} is not {rw}:{rh}")));
                }
            }
            _ => out.push(Diagnostic::error("MissingDimensions", format!("{id}: width and height are required"))),
        }
        if spec.logo_required && meta.logo_embedded != Some(true) {
            out.push(Diagnostic::error("MissingLogo", format!("{id}: channel logo not embedded")));
        }
    }
    out
}
