//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sima_core::captions::{PolishConfig, SentenceTiming};
use sima_core::manifest::{AssetMetadata, THUMBNAIL_SPECS};
use sima_core::script::{AnnotatedScript, AssetKind, ParseError, SpanKind, StructureKind};
use sima_core::timeline::{ExtensionBudget, FitConfig, OverlayShape, Residual, Track};
use sima_core::workload::{
    estimate_editing, estimate_polishing_manual, estimate_recording, estimate_sourcing, Hours, Minutes,
};
use sima_core::{
    align_parts, compile_split, export_captions, fit_clip, generate_manifest, parse_captions, parse_script,
    plan_splits, polish_captions, serialize_script, transition_graphic_name, validate_script, validate_thumbnails,
    AlignedScript, CaptionCue, CaptionFormat, CompileConfig, CompiledSplit, CoverageReport, CutReason, Interval,
    SplitPlan,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:?}, limit {limit:?}");
    Ok(())
}

// 1 ----------------------------------------------------------------------

fn workload_figures() -> Outcome {
    let start = Instant::now();
    let h = |s: &str| s.parse::<Hours>().unwrap();
    let m = |s: &str| s.parse::<Minutes>().unwrap();
    let cases = [
        ("recording 1.5 h", estimate_recording(h("1.5")).map(|x| x.to_string()), "2.7"),
        ("polishing 1.5 h", estimate_polishing_manual(h("1.5")).map(|x| x.to_string()), "4.05"),
        ("sourcing 10 min", estimate_sourcing(m("10")).map(|x| x.to_string()), "60"),
        ("editing 10 min ready", estimate_editing(m("10"), true).map(|x| x.to_string()), "25"),
        ("editing 10 min not ready", estimate_editing(m("10"), false).map(|x| x.to_string()), "30"),
    ];
    for (name, got, want) in &cases {
        ensure!(got.as_deref() == Ok(*want), "{name}: got {got:?}, want {want}");
    }
    // Exact rational equality, not just matching renderings.
    ensure!(estimate_recording(h("1.5")).unwrap() == Hours::new(27, 10), "recording is not exactly 27/10 h");
    ensure!(estimate_polishing_manual(h("1.5")).unwrap() == Hours::new(81, 20), "polishing is not exactly 81/20 h");
    within(Duration::from_secs(1), start)?;
    Ok("2.7 h, 4.05 h, 60 min, 25 min, 30 min".into())
}

// 2 ----------------------------------------------------------------------

/// Expected span: kind, asset ids, first sentence, end sentence, nested.
type SpanShape = (SpanKind, Vec<&'static str>, usize, usize, bool);

fn shape_of(script: &AnnotatedScript) -> Vec<(SpanKind, Vec<String>, usize, usize, bool)> {
    let part = &script.parts[0];
    let mut out: Vec<_> = part
        .spans
        .iter()
        .map(|s| {
            let ids = part.tags[s.open].label.assets().iter().map(ToString::to_string).collect();
            (s.kind, ids, s.first, s.end, s.parent.is_some())
        })
        .collect();
    out.sort_by_key(|s| (s.2, s.3));
    out
}

fn parser_fixtures() -> Outcome {
    let start = Instant::now();
    let single = "This is the first sentence. [1001+]{https://example.com/image1.jpg} This is the second sentence. [1001-] This is the third sentence.";
    let multi = "This is the first sentence. [1001, 1002+]{https://example.com/image1.jpg https://example.com/image2.png} This is the second sentence. [1001, 1002-] This is the third sentence.";
    let original = "[image_part0001+] This is an example sentence. [image_part0001-]";
    let nested_a = "This is the first sentence. [v1001+, 40s, 1.0x]{https://youtu.be/XXXXX 0:10-0:50} This is the second sentence. This is the third sentence. [1001+]{https://example.com/image1.jpg} This is the fourth sentence. [1001-] [1003+]{https://example.com/image3.jpg} This is the fifth sentence. [1003-] This is the sixth sentence. [v1001-] This is the seventh sentence.";
    let nested_b = "This is the first sentence. [v_part1001+, 1min, 1.0x] This is the second sentence. This is the third sentence. [1001+]{https://example.com/image1.jpg} This is the fourth sentence. [1001-] [image_part1003+] This is the fifth sentence. [image_part1003-] This is the sixth sentence. [v_part1001-] This is the seventh sentence.";

    use SpanKind::{Image, Video};
    let expected: [(&str, &str, usize, Vec<SpanShape>); 5] = [
        ("single image", single, 3, vec![(Image, vec!["1001"], 1, 2, false)]),
        ("multi image", multi, 3, vec![(Image, vec!["1001", "1002"], 1, 2, false)]),
        ("original image", original, 1, vec![(Image, vec!["image_part0001"], 0, 1, false)]),
        (
            "nested public",
            nested_a,
            7,
            vec![
                (Video, vec!["v1001"], 1, 6, false),
                (Image, vec!["1001"], 3, 4, true),
                (Image, vec!["1003"], 4, 5, true),
            ],
        ),
        (
            "nested original",
            nested_b,
            7,
            vec![
                (Video, vec!["v_part1001"], 1, 6, false),
                (Image, vec!["1001"], 3, 4, true),
                (Image, vec!["image_part1003"], 4, 5, true),
            ],
        ),
    ];
    for (name, text, sentences, spans) in &expected {
        let script = parse_script(text).map_err(|e| format!("{name}: {e}"))?;
        ensure!(script.parts.len() == 1 && script.parts[0].sentences.len() == *sentences, "{name}: sentence count");
        let got = shape_of(&script);
        let want: Vec<_> = spans
            .iter()
            .map(|(k, ids, a, b, n)| (*k, ids.iter().map(|s| s.to_string()).collect::<Vec<_>>(), *a, *b, *n))
            .collect();
        ensure!(got == want, "{name}: spans {got:?}");
        // Source annotations exactly on the public ids.
        for (_, tag) in script.asset_opens() {
            for id in tag.label.assets() {
                ensure!(id.is_public() == tag.source_for(id).is_some(), "{name}: source presence for {id}");
            }
        }
        let again = parse_script(&serialize_script(&script)).map_err(|e| format!("{name} round trip: {e}"))?;
        ensure!(again == script, "{name}: round trip changed the script");
    }

    // The nested clips carry their declared lengths.
    let a = parse_script(nested_a).unwrap();
    let b = parse_script(nested_b).unwrap();
    let clip = |s: &AnnotatedScript| s.parts[0].tags.iter().find_map(|t| t.clip).map(|c| c.baseline_secs);
    ensure!(clip(&a) == Some(40) && clip(&b) == Some(60), "clip lengths {:?} {:?}", clip(&a), clip(&b));
    let kinds: Vec<AssetKind> =
        b.asset_opens().flat_map(|(_, t)| t.label.assets().to_vec()).map(|id| id.kind).collect();
    ensure!(kinds == [AssetKind::VideoB, AssetKind::ImageA, AssetKind::ImageB], "asset kinds {kinds:?}");

    let bad = |file: &str| std::fs::read_to_string(fixtures().join("scripts").join(file)).unwrap();
    match parse_script(&bad("video_in_video.sima.md")) {
        Err(ParseError::Structure { kind: StructureKind::VideoInVideo { .. }, .. }) => {}
        other => return Err(format!("video in video: {other:?}")),
    }
    match parse_script(&bad("unbalanced.sima.md")) {
        Err(e @ ParseError::Structure { kind: StructureKind::Unbalanced(_), .. }) => {
            ensure!(e.code() == "StructureError", "code {}", e.code())
        }
        other => return Err(format!("unbalanced: {other:?}")),
    }
    match parse_script(&bad("missing_source.sima.md")) {
        Err(e @ ParseError::MissingSource { .. }) => ensure!(e.code() == "MissingSource", "code {}", e.code()),
        other => return Err(format!("missing source: {other:?}")),
    }
    within(Duration::from_secs(1), start)?;
    Ok("5 examples parse and round-trip; VideoInVideo, Unbalanced, MissingSource rejected".into())
}

// 3 ----------------------------------------------------------------------

fn manifest_bytes() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("project/script.sima.md")).unwrap();
    let script = parse_script(&text).map_err(|e| e.to_string())?;
    let (images, videos) = generate_manifest(&script).map_err(|e| e.to_string())?;
    let want_images = "1001: https://example.com/image1.jpg\n1002: https://example.com/image2.png\n";
    let want_videos = "v1001: https://youtu.be/XXXXX 0:10-0:35\nv1002: https://youtu.be/YYYYY 1:20-2:05\n";
    ensure!(images.as_bytes() == want_images.as_bytes(), "images manifest:\n{images}");
    ensure!(videos.as_bytes() == want_videos.as_bytes(), "videos manifest:\n{videos}");
    Ok("image and video task lists match byte for byte".into())
}

// 4 ----------------------------------------------------------------------

/// Span time showing the clip (moving or frozen on its last frame).
fn fit_coverage(covered: (f64, f64), hold: f64, span: (f64, f64)) -> f64 {
    let (a, b) = (covered.0.max(span.0), (covered.1 + hold).min(span.1));
    (b - a).max(0.0)
}

/// Brute force over speeds 0.50..=4.00: best coverage of the span, and the
/// coverage one grid step faster than the best speed.
fn speed_grid(baseline: f64, len: f64) -> (f64, f64) {
    let mut best = (f64::MIN, 0u32);
    for h in 50..=400u32 {
        let cov = len.min(baseline * 100.0 / f64::from(h));
        if cov > best.0 {
            best = (cov, h);
        }
    }
    let next = (best.1 + 1).min(400);
    (best.0, len.min(baseline * 100.0 / f64::from(next)))
}

fn fit_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let config = FitConfig::default();
    let mut worst = f64::MAX;
    for i in 0..1000 {
        let baseline = rng.gen_range(1.0..900.0_f64);
        let start = rng.gen_range(0.0..120.0_f64);
        let span = (start, start + rng.gen_range(0.25..600.0_f64));
        let mut budget = ExtensionBudget::default();
        let mut edge = span.0;
        for _ in 0..rng.gen_range(0..6) {
            let len = rng.gen_range(0.5..40.0_f64).min(edge);
            if len <= 0.0 {
                break;
            }
            budget.before.push((edge - len, edge));
            edge -= len;
        }
        let mut edge = span.1;
        for _ in 0..rng.gen_range(0..6) {
            let len = rng.gen_range(0.5..40.0_f64);
            budget.after.push((edge, edge + len));
            edge += len;
        }
        let f = fit_clip(baseline, span, &budget, &config).map_err(|e| format!("instance {i}: {e}"))?;
        let (best, one_step) = speed_grid(baseline, span.1 - span.0);
        let got = fit_coverage(f.covered, f.hold_secs, span);
        ensure!(got + 1e-6 >= one_step, "instance {i}: coverage {got} < grid best {best} minus one step ({one_step})");
        worst = worst.min(got - one_step);
        let speed = f.speed.as_f64();
        ensure!((0.5..=4.0).contains(&speed), "instance {i}: speed {speed}");
        if f.residual == Residual::None {
            let shown = f.covered.1 - f.covered.0;
            ensure!(
                (shown * speed - baseline).abs() <= 0.001,
                "instance {i}: {shown} s at {speed}x is not {baseline} s"
            );
        }
    }

    let f = fit_clip(40.0, (0.0, 40.0 / 1.2), &ExtensionBudget::default(), &config).unwrap();
    ensure!(f.speed.to_string() == "1.2" && f.residual == Residual::None, "40 s over 33.333 s gave {f:?}");

    // The same clip inside a compiled script rewrites its tag.
    let text = "[cta:intro+] Welcome back. [cta:intro-] This is the first sentence. [v1001+, 40s, 1.0x]{https://youtu.be/XXXXX 0:10-0:50} This is the second sentence. This is the third sentence. [1001+]{https://example.com/image1.jpg} This is the fourth sentence. [1001-] [1003+]{https://example.com/image3.jpg} This is the fifth sentence. [1003-] This is the sixth sentence. [v1001-] [image_part0007+] This is the seventh sentence. [image_part0007-]";
    let script = parse_script(text).map_err(|e| e.to_string())?;
    let lens = [3000, 3000, 6667, 6667, 6667, 6666, 6666, 3000];
    let timing = timing_from(&script, &[lens.to_vec()]);
    let split = plan_splits(1, 1).unwrap()[0];
    let out = compile_split(&script, &timing, &split, &CompileConfig::default()).map_err(|e| e.to_string())?;
    let rewritten = serialize_script(&out.script);
    ensure!(rewritten.contains("[v1001+, 40s, 1.2x]"), "rewritten script: {rewritten}");
    Ok(format!("1000 instances within one grid step (min margin {:.4} s); 40 s over 33.333 s -> 1.2x", worst.max(0.0)))
}

// 5 ----------------------------------------------------------------------

/// Contiguous sentence timings from per-part sentence lengths in ms.
fn timing_from(script: &AnnotatedScript, lens: &[Vec<u64>]) -> AlignedScript {
    let mut timings = Vec::new();
    let mut t = 0;
    for (p, part) in lens.iter().enumerate() {
        assert_eq!(part.len(), script.parts[p].sentences.len());
        for (s, len) in part.iter().enumerate() {
            timings.push(SentenceTiming { part: p + 1, sentence: s, start_ms: t, end_ms: t + len });
            t += len;
        }
    }
    AlignedScript { timings, duration_ms: t }
}

struct Generated {
    script: AnnotatedScript,
    timing: AlignedScript,
    /// Per part: sentence lengths in whole seconds.
    secs: Vec<Vec<u64>>,
    /// CTA sentence ranges: (part, first, end).
    ctas: Vec<(usize, usize, usize)>,
}

/// A random script whose clips all fit inside the comfort band, so every
/// event boundary lands on a whole second.
fn random_project(rng: &mut ChaCha8Rng) -> Generated {
    let parts = rng.gen_range(3..=9);
    let mut text = String::new();
    let mut secs = Vec::new();
    let mut ctas = Vec::new();
    let mut next_id = 1;
    let mut id = || {
        next_id += 1;
        next_id
    };
    for p in 1..=parts {
        let n = rng.gen_range(4..=14usize);
        let lens: Vec<u64> = (0..n).map(|_| rng.gen_range(5..=25)).collect();
        let sentence = |i: usize| format!("Part {p} line {i} moves the story along.");
        text.push_str(&format!("## Part {p}: Chapter {p}\n"));
        let mut s = 0;
        if p == 1 {
            let c = rng.gen_range(1..=2);
            text.push_str("[cta:intro+] ");
            (0..c).for_each(|i| text.push_str(&format!("{} ", sentence(i))));
            text.push_str("[cta:intro-] ");
            ctas.push((1, 0, c));
            s = c;
            while s < n {
                let k = rng.gen_range(1..=3).min(n - s);
                let img = format!("image_part{:04}", id());
                text.push_str(&format!("[{img}+] "));
                (s..s + k).for_each(|i| text.push_str(&format!("{} ", sentence(i))));
                text.push_str(&format!("[{img}-] "));
                s += k;
            }
        } else {
            let cta_at = if p == parts { n - rng.gen_range(1..=2) } else { n };
            while s < cta_at {
                let roll = rng.gen_range(0..10);
                if roll < 5 {
                    let k = rng.gen_range(1..=4).min(cta_at - s);
                    let mut len: u64 = lens[s..s + k].iter().sum();
                    if s == 0 {
                        len -= 4;
                    }
                    let baseline = rng.gen_range(len..=2 * len);
                    let v = format!("v_part{:04}", id());
                    text.push_str(&format!("[{v}+, {baseline}s, 1.0x] "));
                    let nested = (rng.gen_bool(0.5)).then(|| {
                        let a = rng.gen_range(s..s + k);
                        (a, rng.gen_range(a + 1..=(a + 3).min(s + k)))
                    });
                    let img = format!("image_part{:04}", id());
                    for i in s..s + k {
                        if nested.map(|(a, _)| a) == Some(i) {
                            text.push_str(&format!("[{img}+] "));
                        }
                        text.push_str(&format!("{} ", sentence(i)));
                        if nested.map(|(_, b)| b) == Some(i + 1) {
                            text.push_str(&format!("[{img}-] "));
                        }
                    }
                    text.push_str(&format!("[{v}-] "));
                    s += k;
                } else if roll < 8 {
                    let k = rng.gen_range(1..=3).min(cta_at - s);
                    let img = format!("image_part{:04}", id());
                    text.push_str(&format!("[{img}+] "));
                    (s..s + k).for_each(|i| text.push_str(&format!("{} ", sentence(i))));
                    text.push_str(&format!("[{img}-] "));
                    s += k;
                } else {
                    text.push_str(&format!("{} ", sentence(s)));
                    s += 1;
                }
            }
            if p == parts {
                text.push_str("[cta:concl+] ");
                (cta_at..n).for_each(|i| text.push_str(&format!("{} ", sentence(i))));
                text.push_str("[cta:concl-]");
                ctas.push((p, cta_at, n));
            }
        }
        text.push_str("\n\n");
        secs.push(lens);
    }
    let script = parse_script(&text).unwrap_or_else(|e| panic!("generated script does not parse: {e}\n{text}"));
    let ms: Vec<Vec<u64>> = secs.iter().map(|p| p.iter().map(|s| s * 1000).collect()).collect();
    let timing = timing_from(&script, &ms);
    Generated { script, timing, secs, ctas }
}

/// Marks whole seconds of `iv` in a per-second bitmap.
fn paint(map: &mut [bool], iv: Interval, value: bool) {
    let (a, b) = ((iv.start_ms / 1000) as usize, iv.end_ms.div_ceil(1000) as usize);
    let b = b.min(map.len());
    map[a.min(b)..b].iter_mut().for_each(|x| *x = value);
}

/// Eligible seconds derived straight from the timeline and sentence times.
fn eligible_seconds(g: &Generated, out: &CompiledSplit) -> Vec<bool> {
    let dur = (out.timeline.duration_ms / 1000) as usize;
    let parts = g.secs.len();
    let part_start = |p: usize| g.secs[..p - 1].iter().flatten().sum::<u64>() * 1000;
    let (lo, hi) = (part_start(2), part_start(parts));
    let mut map = vec![false; dur];
    for e in out.timeline.track(Track::BRollVideo) {
        let iv = Interval::new(e.start_ms.max(lo), e.end_ms.min(hi).max(e.start_ms.max(lo)));
        paint(&mut map, iv, true);
    }
    for e in out.timeline.track(Track::ImageOverlay).chain(out.timeline.track(Track::TransitionGraphic)) {
        paint(&mut map, e.interval(), false);
    }
    for &(p, first, end) in &g.ctas {
        let t = |s: usize| part_start(p) + g.secs[p - 1][..s].iter().sum::<u64>() * 1000;
        paint(&mut map, Interval::new(t(first), t(end)), false);
    }
    map
}

/// Most overlays on the 1 s grid: starts `t` with `[t, t + d)` eligible and
/// starts at least `gap` apart.
fn grid_max(map: &[bool], d: usize, gap: usize, cap: usize) -> usize {
    let n = map.len();
    let fits = |t: usize| t + d <= n && map[t..t + d].iter().all(|&x| x);
    let mut best = vec![0usize; n + gap + 1];
    for t in (0..n).rev() {
        let take = if fits(t) { 1 + best[t + gap] } else { 0 };
        best[t] = best[t + 1].max(take);
    }
    best[0].min(cap)
}

fn overlay_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let config = CompileConfig::default();
    let mut counts = BTreeMap::new();
    for i in 0..500 {
        let g = random_project(&mut rng);
        let split = plan_splits(g.script.final_part(), 1).unwrap()[0];
        let out = compile_split(&g.script, &g.timing, &split, &config).map_err(|e| format!("instance {i}: {e}"))?;
        let placed = &out.overlays;
        *counts.entry(placed.len()).or_insert(0) += 1;

        let mut sorted = placed.clone();
        sorted.sort_by_key(|p| p.start_ms);
        ensure!(sorted == *placed, "instance {i}: placements out of order");
        for w in placed.windows(2) {
            ensure!(
                w[1].start_ms - w[0].start_ms >= 180_000,
                "instance {i}: starts {} and {} closer than 180 s",
                w[0].start_ms,
                w[1].start_ms
            );
        }
        if placed.len() >= 2 {
            let circles = placed.iter().filter(|p| p.shape == OverlayShape::Circle).count();
            ensure!(circles > 0 && circles < placed.len(), "instance {i}: shapes not mixed");
        }
        let map = eligible_seconds(&g, &out);
        for p in placed {
            let (a, b) = ((p.start_ms / 1000) as usize, ((p.start_ms + p.duration_ms).div_ceil(1000)) as usize);
            ensure!(
                p.start_ms % 1000 == 0 && b <= map.len() && map[a..b].iter().all(|&x| x),
                "instance {i}: overlay at {} ms outside eligible time",
                p.start_ms
            );
        }
        let d = (config.overlay.duration_ms / 1000) as usize;
        let gap = (config.overlay.min_gap_ms / 1000) as usize;
        let best = grid_max(&map, d, gap, config.overlay.count);
        ensure!(placed.len() == best, "instance {i}: {} overlays, grid maximum {best}", placed.len());
        let warned = out.diagnostics.iter().any(|d| d.code == "OverlayShortfall");
        ensure!(warned == (placed.len() < config.overlay.count), "instance {i}: shortfall warning mismatch");
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("500 compiled splits, overlay counts {counts:?}"))
}

// 6 ----------------------------------------------------------------------

/// Sweep over every interval boundary: each elementary segment of
/// `[0, duration)` must belong to exactly one of the three sets.
fn sweep(report: &CoverageReport) -> Result<(), String> {
    let gaps: Vec<Interval> = report.gaps.iter().map(|g| Interval::new(g.start_ms, g.end_ms)).collect();
    let sets = [&report.covered, &report.mandatory, &gaps];
    let mut cuts = vec![0, report.duration_ms];
    for iv in sets.iter().flat_map(|s| s.iter()) {
        ensure!(iv.start_ms < iv.end_ms, "empty interval {iv:?}");
        ensure!(iv.end_ms <= report.duration_ms, "interval {iv:?} past the end");
        cuts.extend([iv.start_ms, iv.end_ms]);
    }
    cuts.sort_unstable();
    cuts.dedup();
    for w in cuts.windows(2) {
        let mid2 = w[0] + w[1]; // twice the midpoint, avoids fractions
        let hits: usize =
            sets.iter().map(|s| s.iter().filter(|iv| 2 * iv.start_ms <= mid2 && mid2 < 2 * iv.end_ms).count()).sum();
        ensure!(hits == 1, "segment {}..{} covered {hits} times", w[0], w[1]);
    }
    let total: u64 = sets.iter().flat_map(|s| s.iter()).map(|iv| iv.end_ms - iv.start_ms).sum();
    ensure!(total.abs_diff(report.duration_ms) <= 1, "lengths sum to {total}, duration {}", report.duration_ms);
    for g in &report.gaps {
        ensure!(g.suggestion.starts_with("Find an image for"), "gap without suggestion: {g:?}");
    }
    Ok(())
}

/// Compiles the fixture project the way the command line does.
fn fixture_splits() -> Result<Vec<CompiledSplit>, String> {
    let dir = fixtures().join("project");
    let script =
        parse_script(&std::fs::read_to_string(dir.join("script.sima.md")).unwrap()).map_err(|e| e.to_string())?;
    let files = ["captions/splitA.srt", "captions/splitB.srt", "captions/splitC.vtt"];
    let splits: Vec<SplitPlan> = plan_splits(script.final_part(), 3).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (split, file) in splits.iter().zip(files) {
        let format: CaptionFormat = file.rsplit('.').next().unwrap().parse()?;
        let raw =
            parse_captions(&std::fs::read_to_string(dir.join(file)).unwrap(), format).map_err(|e| e.to_string())?;
        let polished = polish_captions(&raw, &PolishConfig::default());
        let mut timing =
            align_parts(&script, split.parts(), &polished.cues, &Default::default()).map_err(|e| e.to_string())?;
        timing.duration_ms = timing.duration_ms.max(polished.duration_ms);
        out.push(compile_split(&script, &timing, split, &CompileConfig::default()).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn coverage_partition() -> Outcome {
    let mut checked = 0;
    let mut gaps = 0;
    for (i, c) in fixture_splits()?.iter().enumerate() {
        sweep(&c.coverage).map_err(|e| format!("fixture split {i}: {e}"))?;
        ensure!(!has_error(c), "fixture split {i} has errors: {:?}", c.diagnostics);
        gaps += c.coverage.gaps.len();
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    for i in 0..200 {
        let g = random_project(&mut rng);
        ensure!(
            !validate_script(&g.script, &Default::default()).iter().any(|d| d.is_error()),
            "random script {i} fails validation"
        );
        let split = plan_splits(g.script.final_part(), 1).unwrap()[0];
        let c = compile_split(&g.script, &g.timing, &split, &CompileConfig::default()).map_err(|e| e.to_string())?;
        sweep(&c.coverage).map_err(|e| format!("random split {i}: {e}"))?;
        gaps += c.coverage.gaps.len();
        checked += 1;
    }
    Ok(format!("{checked} compiled splits tile exactly ({gaps} gaps reported)"))
}

fn has_error(c: &CompiledSplit) -> bool {
    c.diagnostics.iter().any(|d| d.is_error())
}

// 7 ----------------------------------------------------------------------

fn random_cues(rng: &mut ChaCha8Rng) -> Vec<CaptionCue> {
    const WORDS: [&str; 12] =
        ["the", "chip", "Nvidia", "sold", "well,", "again!", "why?", "it's", "graphics", "a", "diner", "1993"];
    let mut t = 0;
    let mut index = 0;
    (0..rng.gen_range(0..40))
        .map(|_| {
            t += rng.gen_range(0..4000);
            index += rng.gen_range(1..3);
            let len = rng.gen_range(1..9000);
            let lines: Vec<String> = (0..rng.gen_range(1..=2))
                .map(|_| {
                    (0..rng.gen_range(1..8)).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
                })
                .collect();
            let cue = CaptionCue::new(index, t, t + len, lines.join("\n"));
            t += len;
            cue
        })
        .collect()
}

fn captions_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for i in 0..500 {
        let cues = random_cues(&mut rng);
        for format in [CaptionFormat::Srt, CaptionFormat::Vtt] {
            let text = export_captions(&cues, format);
            let back = parse_captions(&text, format).map_err(|e| format!("list {i} {format:?}: {e}"))?;
            ensure!(back == cues, "list {i} {format:?}: cues changed");
            ensure!(export_captions(&back, format) == text, "list {i} {format:?}: text changed");
        }
    }

    let raw = parse_captions(&std::fs::read_to_string(fixtures().join("retake.srt")).unwrap(), CaptionFormat::Srt)
        .map_err(|e| e.to_string())?;
    let polished = polish_captions(&raw, &PolishConfig::default());
    // Hand-labelled: cues 1 and 2 are false starts of 3, cue 5 of 6.
    let dropped = [1u32, 2, 5];
    let want_cuts: Vec<(u64, u64)> =
        raw.iter().filter(|c| dropped.contains(&c.index)).map(|c| (c.start_ms, c.end_ms)).collect();
    let got_cuts: Vec<(u64, u64)> = polished.cuts.cuts.iter().map(|c| (c.start_ms, c.end_ms)).collect();
    ensure!(got_cuts == want_cuts, "cuts {got_cuts:?}, want {want_cuts:?}");
    ensure!(polished.cuts.cuts.iter().all(|c| c.reason == CutReason::RedundantTake), "unexpected cut reasons");
    let kept: Vec<&CaptionCue> = raw.iter().filter(|c| !dropped.contains(&c.index)).collect();
    ensure!(polished.cues.len() == kept.len(), "{} cues kept, want {}", polished.cues.len(), kept.len());
    for (got, want) in polished.cues.iter().zip(&kept) {
        let shift: u64 = want_cuts.iter().filter(|c| c.1 <= want.start_ms).map(|c| c.1 - c.0).sum();
        ensure!(got.text == want.text, "kept {:?}, want {:?}", got.text, want.text);
        ensure!(
            (got.start_ms, got.end_ms) == (want.start_ms - shift, want.end_ms - shift),
            "cue {:?} retimed to {}..{}",
            want.text,
            got.start_ms,
            got.end_ms
        );
    }
    let raw_ms = raw.last().unwrap().end_ms;
    let removed: u64 = want_cuts.iter().map(|c| c.1 - c.0).sum();
    ensure!(polished.raw_duration_ms == raw_ms, "raw duration {}", polished.raw_duration_ms);
    ensure!(polished.duration_ms == raw_ms - removed, "duration {} != {raw_ms} - {removed}", polished.duration_ms);
    Ok(format!(
        "500 random lists round-trip in SRT and VTT; 3 false starts cut, {raw_ms} ms -> {} ms",
        polished.duration_ms
    ))
}

// 8 ----------------------------------------------------------------------

fn naming_and_thumbnails() -> Outcome {
    for part in 2..=15 {
        let want = format!("f{:02}00.png", part);
        let got = transition_graphic_name(part, 15).map_err(|e| e.to_string())?;
        ensure!(got == want, "part {part}: {got}");
    }
    ensure!(
        transition_graphic_name(1, 15).is_err() && transition_graphic_name(16, 15).is_err(),
        "out-of-range parts accepted"
    );

    let meta = |id: &str, bytes: u64, w: u32, h: u32| AssetMetadata {
        id: id.into(),
        bytes,
        width: Some(w),
        height: Some(h),
        logo_embedded: Some(true),
        ..Default::default()
    };
    let trio = vec![
        meta("thumbnail_16x9", 2_000_000, 1920, 1080),
        meta("thumbnail_4x3", 3_100_000, 1600, 1200),
        meta("thumbnail_1x1", 4_000_000, 3000, 3000),
    ];
    ensure!(THUMBNAIL_SPECS.iter().map(|s| s.id).eq(trio.iter().map(|m| m.id.as_str())), "variant ids differ");
    let diags = validate_thumbnails(&trio);
    ensure!(!diags.iter().any(|d| d.is_error()), "compliant trio rejected: {diags:?}");

    let mut big = trio.clone();
    big[0].bytes = 2_000_001;
    let diags = validate_thumbnails(&big);
    ensure!(diags.iter().any(|d| d.is_error() && d.code == "OversizeThumbnail"), "oversize 16:9 accepted: {diags:?}");

    for (w, h) in [(2000, 2000), (3001, 3001), (3000, 2999)] {
        let mut sq = trio.clone();
        sq[2] = meta("thumbnail_1x1", 4_000_000, w, h);
        let diags = validate_thumbnails(&sq);
        ensure!(diags.iter().any(|d| d.is_error()), "{w}x{h} square accepted");
    }
    Ok("f0200.png..f1500.png; trio accepted; oversize 16:9 and off-size squares rejected".into())
}

// 9 ----------------------------------------------------------------------

fn compile_twice() -> Outcome {
    let config = fixtures().join("project/sima.toml");
    let runs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &runs {
        let out = Command::new(env!("CARGO_BIN_EXE_sima"))
            .arg("--config")
            .arg(&config)
            .arg("--out-dir")
            .arg(dir.path())
            .args(["compile", "--split", "all"])
            .env_remove("SIMA_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(out.status.success(), "compile failed: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut files = Vec::new();
    for id in ["A", "B", "C"] {
        files.push(format!("split{id}.edl"));
        files.push(format!("split{id}.report.json"));
    }
    files.push("script.sima.md".into());
    for name in &files {
        let a = std::fs::read(runs[0].path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(runs[1].path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure!(a == b, "{name} differs between runs");
    }
    Ok(format!("{} files identical across two runs", files.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("workload figures", workload_figures),
        ("parser fixtures", parser_fixtures),
        ("manifest bytes", manifest_bytes),
        ("fit oracle", fit_oracle),
        ("overlay placement", overlay_properties),
        ("coverage partition", coverage_partition),
        ("captions round trip and polishing", captions_round_trip),
        ("graphic names and thumbnails", naming_and_thumbnails),
        ("deterministic compile", compile_twice),
    ];
    // Failures are reported on the criterion line; keep panics quiet.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
