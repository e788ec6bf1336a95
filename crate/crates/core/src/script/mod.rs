//! The annotated script DSL.
//!
//! A script is a sequence of parts (`## Part <n>: <title>`), each holding
//! narration sentences with bracket tags at sentence boundaries:
//!
//! ```text
//! ## Part 2: Early years
//! Nvidia was founded in 1993. [v1001+, 40s, 1.0x]{https://youtu.be/XXXXX 0:10-0:50}
//! The founders met at a diner. [1001+]{https://example.com/diner.jpg} It still exists.
//! [1001-] [v1001-] Their first chip shipped in 1995.
//! ```
//!
//! Public (Type A) assets use bare numeric ids (`1001`, `v1001`) and must
//! carry a source annotation in braces right after their open tag. Original
//! footage (Type B) uses file ids (`image_part0001`, `v_part1001`) and takes
//! no source. Calls to action are bracketed with `[cta:intro+]`/`[cta:intro-]`
//! and `[cta:concl+]`/`[cta:concl-]`.

mod parse;
mod serialize;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::parse_script;
pub use serialize::{render_tag, serialize_script};
pub use validate::{validate_script, ValidateConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssetKind {
    /// Public image, rendered as bare digits.
    ImageA,
    /// Public video, `v` + digits.
    VideoA,
    /// Original image, `image_part` + digits.
    ImageB,
    /// Original video, `v_part` + digits.
    VideoB,
}

impl AssetKind {
    pub fn is_video(self) -> bool {
        matches!(self, AssetKind::VideoA | AssetKind::VideoB)
    }

    pub fn is_public(self) -> bool {
        matches!(self, AssetKind::ImageA | AssetKind::VideoA)
    }

    fn prefix(self) -> &'static str {
        match self {
            AssetKind::ImageA => "",
            AssetKind::VideoA => "v",
            AssetKind::ImageB => "image_part",
            AssetKind::VideoB => "v_part",
        }
    }
}

/// Identifier of an image or video asset.
///
/// The digit count is kept so that zero-padded file ids such as
/// `image_part0001` render back unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssetId {
    pub kind: AssetKind,
    pub number: u32,
    width: u8,
}

impl AssetId {
    pub fn new(kind: AssetKind, number: u32) -> Self {
        let width = number.to_string().len() as u8;
        AssetId { kind, number, width }
    }

    pub fn with_width(kind: AssetKind, number: u32, width: u8) -> Self {
        let min = number.to_string().len() as u8;
        AssetId { kind, number, width: width.max(min) }
    }

    pub fn is_video(&self) -> bool {
        self.kind.is_video()
    }

    pub fn is_public(&self) -> bool {
        self.kind.is_public()
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:0width$}", self.kind.prefix(), self.number, width = self.width as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid asset id `{0}`")]
pub struct AssetIdError(pub String);

impl FromStr for AssetId {
    type Err = AssetIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, digits) = if let Some(d) = s.strip_prefix("image_part") {
            (AssetKind::ImageB, d)
        } else if let Some(d) = s.strip_prefix("v_part") {
            (AssetKind::VideoB, d)
        } else if let Some(d) = s.strip_prefix('v') {
            (AssetKind::VideoA, d)
        } else {
            (AssetKind::ImageA, s)
        };
        if digits.is_empty() || digits.len() > 9 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AssetIdError(s.to_string()));
        }
        let number: u32 = digits.parse().map_err(|_| AssetIdError(s.to_string()))?;
        if number == 0 {
            return Err(AssetIdError(s.to_string()));
        }
        Ok(AssetId::with_width(kind, number, digits.len() as u8))
    }
}

impl Serialize for AssetId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AssetId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Playback speed multiplier in hundredths (`120` is `1.2x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Speed(u32);

impl Speed {
    pub const ONE: Speed = Speed(100);

    pub const fn from_hundredths(h: u32) -> Self {
        Speed(h)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Speed {
    /// At most two decimals, trailing zeros trimmed, at least one decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (int, frac) = (self.0 / 100, self.0 % 100);
        if frac == 0 {
            write!(f, "{int}.0")
        } else if frac % 10 == 0 {
            write!(f, "{int}.{}", frac / 10)
        } else {
            write!(f, "{int}.{frac:02}")
        }
    }
}

impl FromStr for Speed {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad speed `{s}`");
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() || int.len() > 4 || frac.len() > 2 {
            return Err(bad());
        }
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u32 = int.parse().map_err(|_| bad())?;
        let frac: u32 = match frac.len() {
            0 => 0,
            1 => frac.parse::<u32>().map_err(|_| bad())? * 10,
            _ => frac.parse().map_err(|_| bad())?,
        };
        let h = int * 100 + frac;
        if h == 0 {
            return Err(bad());
        }
        Ok(Speed(h))
    }
}

impl Serialize for Speed {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Speed {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Extraction range in whole seconds within a source video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<TimeRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CtaKind {
    Intro,
    Concl,
}

impl fmt::Display for CtaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CtaKind::Intro => "intro",
            CtaKind::Concl => "concl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagLabel {
    Assets(Vec<AssetId>),
    Cta(CtaKind),
}

impl TagLabel {
    pub fn assets(&self) -> &[AssetId] {
        match self {
            TagLabel::Assets(ids) => ids,
            TagLabel::Cta(_) => &[],
        }
    }

    pub fn is_video(&self) -> bool {
        matches!(self, TagLabel::Assets(ids) if ids.len() == 1 && ids[0].is_video())
    }
}

impl fmt::Display for TagLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagLabel::Cta(kind) => write!(f, "cta:{kind}"),
            TagLabel::Assets(ids) => {
                for (i, id) in ids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{id}")?;
                }
                Ok(())
            }
        }
    }
}

/// Declared clip length and playback speed carried by a video open tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClipParams {
    pub baseline_secs: u32,
    pub speed: Speed,
}

/// 1-based line/column in the script source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SourceLoc {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A bracket tag sitting at a sentence boundary.
///
/// `boundary` counts the sentences of the part that precede the tag, so an
/// open tag at boundary `b` starts with sentence `b` and a close tag at
/// boundary `b` ends after sentence `b - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tag {
    pub label: TagLabel,
    pub polarity: Polarity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip: Option<ClipParams>,
    /// One entry per public id, in id order.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sources: Vec<SourceRef>,
    /// Exempts an image span from the sentence pacing warning.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub hold: bool,
    pub boundary: usize,
    #[serde(skip)]
    pub loc: SourceLoc,
}

// Source locations are not part of a tag's identity.
impl PartialEq for Tag {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.polarity == other.polarity
            && self.clip == other.clip
            && self.sources == other.sources
            && self.hold == other.hold
            && self.boundary == other.boundary
    }
}

impl Tag {
    pub fn source_for(&self, id: &AssetId) -> Option<&SourceRef> {
        self.label.assets().iter().filter(|a| a.is_public()).position(|a| a == id).and_then(|i| self.sources.get(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Video,
    Image,
    Cta(CtaKind),
}

/// A matched open/close pair. Covers sentences `first..end` of its part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub kind: SpanKind,
    pub open: usize,
    pub close: usize,
    pub first: usize,
    pub end: usize,
    /// Index of the enclosing video span, for images nested in a video.
    pub parent: Option<usize>,
}

impl Span {
    pub fn sentence_count(&self) -> usize {
        self.end - self.first
    }

    pub fn covers(&self, sentence: usize) -> bool {
        self.first <= sentence && sentence < self.end
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.first < other.end && other.first < self.end
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Part {
    pub number: usize,
    pub title: String,
    pub sentences: Vec<String>,
    pub tags: Vec<Tag>,
    pub spans: Vec<Span>,
    #[serde(skip)]
    pub header_loc: SourceLoc,
    #[serde(skip)]
    pub sentence_locs: Vec<SourceLoc>,
}

impl PartialEq for Part {
    fn eq(&self, other: &Self) -> bool {
        self.number == other.number
            && self.title == other.title
            && self.sentences == other.sentences
            && self.tags == other.tags
            && self.spans == other.spans
    }
}

impl Part {
    pub fn cta_span(&self, kind: CtaKind) -> Option<&Span> {
        self.spans.iter().find(|s| s.kind == SpanKind::Cta(kind))
    }

    pub fn in_cta(&self, sentence: usize) -> bool {
        self.spans.iter().any(|s| matches!(s.kind, SpanKind::Cta(_)) && s.covers(sentence))
    }

    pub fn asset_spans(&self) -> impl Iterator<Item = (usize, &Span)> {
        self.spans.iter().enumerate().filter(|(_, s)| !matches!(s.kind, SpanKind::Cta(_)))
    }

    pub fn open_tag(&self, span: &Span) -> &Tag {
        &self.tags[span.open]
    }

    pub fn sentence_loc(&self, sentence: usize) -> SourceLoc {
        self.sentence_locs.get(sentence).copied().unwrap_or(self.header_loc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedScript {
    pub parts: Vec<Part>,
}

impl AnnotatedScript {
    pub fn part(&self, number: usize) -> Option<&Part> {
        number.checked_sub(1).and_then(|i| self.parts.get(i))
    }

    pub fn final_part(&self) -> usize {
        self.parts.len()
    }

    pub fn sentence_count(&self) -> usize {
        self.parts.iter().map(|p| p.sentences.len()).sum()
    }

    /// Open asset tags in document order, with their part numbers.
    pub fn asset_opens(&self) -> impl Iterator<Item = (usize, &Tag)> {
        self.parts.iter().flat_map(|p| {
            p.tags
                .iter()
                .filter(|t| t.polarity == Polarity::Open && matches!(t.label, TagLabel::Assets(_)))
                .map(move |t| (p.number, t))
        })
    }

    /// Rewrites the speed on the open tag of a video span.
    pub fn set_speed(&mut self, part: usize, open_tag: usize, speed: Speed) {
        if let Some(clip) = self.parts[part - 1].tags[open_tag].clip.as_mut() {
            clip.speed = speed;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureKind {
    /// A close tag with no open tag for the same ids.
    Unbalanced(String),
    /// An open tag never closed.
    Unclosed(String),
    VideoInVideo {
        outer: String,
        inner: String,
    },
    CrossPart(String),
    DuplicateOpen(String),
    /// Close ids differ from the open ids they share an asset with.
    MismatchedClose(String),
    /// Image span crossing a video span boundary.
    ImproperNesting(String),
    EmptySpan(String),
    CtaMisplaced(CtaKind, usize),
    SourceOnOriginal(String),
    PartNumbering {
        expected: usize,
        found: usize,
    },
}

impl StructureKind {
    pub fn code(&self) -> &'static str {
        match self {
            StructureKind::Unbalanced(_) => "Unbalanced",
            StructureKind::Unclosed(_) => "Unclosed",
            StructureKind::VideoInVideo { .. } => "VideoInVideo",
            StructureKind::CrossPart(_) => "CrossPart",
            StructureKind::DuplicateOpen(_) => "DuplicateOpen",
            StructureKind::MismatchedClose(_) => "MismatchedClose",
            StructureKind::ImproperNesting(_) => "ImproperNesting",
            StructureKind::EmptySpan(_) => "EmptySpan",
            StructureKind::CtaMisplaced(..) => "CtaMisplaced",
            StructureKind::SourceOnOriginal(_) => "SourceOnOriginal",
            StructureKind::PartNumbering { .. } => "PartNumbering",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureKind::Unbalanced(l) => write!(f, "close tag [{l}-] has no matching open tag"),
            StructureKind::Unclosed(l) => write!(f, "open tag [{l}+] is never closed"),
            StructureKind::VideoInVideo { outer, inner } => {
                write!(f, "video {inner} opens inside active video {outer}")
            }
            StructureKind::CrossPart(l) => write!(f, "span [{l}] crosses a part boundary"),
            StructureKind::DuplicateOpen(l) => write!(f, "{l} is opened while already active"),
            StructureKind::MismatchedClose(l) => {
                write!(f, "close tag [{l}-] does not repeat the ids of its open tag")
            }
            StructureKind::ImproperNesting(m) => f.write_str(m),
            StructureKind::EmptySpan(l) => write!(f, "span [{l}] covers no sentence"),
            StructureKind::CtaMisplaced(kind, part) => {
                write!(f, "cta:{kind} is not allowed in part {part}")
            }
            StructureKind::SourceOnOriginal(l) => {
                write!(f, "[{l}] names only original assets and takes no source annotation")
            }
            StructureKind::PartNumbering { expected, found } => {
                write!(f, "expected part {expected}, found part {found}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{loc}: [SyntaxError] {message}")]
    Syntax { loc: SourceLoc, message: String },
    #[error("{loc}: [StructureError] {kind}")]
    Structure { loc: SourceLoc, kind: StructureKind },
    #[error("{loc}: [MissingSource] public asset {id} has no source annotation")]
    MissingSource { loc: SourceLoc, id: AssetId },
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::Structure { .. } => "StructureError",
            ParseError::MissingSource { .. } => "MissingSource",
        }
    }

    pub fn loc(&self) -> SourceLoc {
        match self {
            ParseError::Syntax { loc, .. }
            | ParseError::Structure { loc, .. }
            | ParseError::MissingSource { loc, .. } => *loc,
        }
    }

    pub fn to_diagnostic(&self) -> crate::Diagnostic {
        let message = match self {
            ParseError::Syntax { message, .. } => message.clone(),
            ParseError::Structure { kind, .. } => format!("{} ({})", kind, kind.code()),
            ParseError::MissingSource { id, .. } => {
                format!("public asset {id} has no source annotation")
            }
        };
        crate::Diagnostic::error(self.code(), message).at_loc(self.loc())
    }
}

/// Renders whole seconds as `m:ss`, or `h:mm:ss` from one hour up.
pub fn format_clock(secs: u32) -> String {
    let (h, m, s) = (secs / 3600, (secs / 60) % 60, secs % 60);
    if h > 0 {
        format!("{h}:{m:02}:{s:02}")
    } else {
        format!("{m}:{s:02}")
    }
}

/// Parses `m:ss` or `h:mm:ss`.
pub fn parse_clock(s: &str) -> Option<u32> {
    let fields: Vec<&str> = s.split(':').collect();
    let num = |f: &str| -> Option<u32> {
        (!f.is_empty() && f.len() <= 6 && f.bytes().all(|b| b.is_ascii_digit())).then(|| f.parse().ok()).flatten()
    };
    match fields.as_slice() {
        [m, s] if s.len() == 2 => {
            let (m, s) = (num(m)?, num(s)?);
            (s < 60).then_some(m * 60 + s)
        }
        [h, m, s] if m.len() == 2 && s.len() == 2 => {
            let (h, m, s) = (num(h)?, num(m)?, num(s)?);
            (m < 60 && s < 60).then_some(h * 3600 + m * 60 + s)
        }
        _ => None,
    }
}

/// Parses `a-b` clock ranges, tolerating spaces around the dash.
pub fn parse_clock_range(s: &str) -> Option<TimeRange> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (a, b) = compact.split_once('-')?;
    let (start, end) = (parse_clock(a)?, parse_clock(b)?);
    (start < end).then_some(TimeRange { start, end })
}

pub fn format_clock_range(range: TimeRange) -> String {
    format!("{}-{}", format_clock(range.start), format_clock(range.end))
}
