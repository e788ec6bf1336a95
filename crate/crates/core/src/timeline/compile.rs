use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::fit::{
    fit_clip, resolve_transition_display, ClipFit, ExtensionBudget, FitConfig, FitError, Residual, TransitionDisplay,
};
use super::overlay::{place_stylized_overlays, OverlayConfig, OverlayPlacement, OverlayShape};
use super::{ARollMode, ImageLayout, LayoutHint, Payload, Timeline, TimelineEvent};
use crate::captions::AlignedScript;
use crate::diag::Diagnostic;
use crate::interval::{self, Interval};
use crate::manifest::transition_graphic_name;
use crate::script::{AnnotatedScript, AssetId, CtaKind, Part, SpanKind};
use crate::workload::SplitPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct CompileConfig {
    pub fit: FitConfig,
    pub transition_ms: u64,
    /// Required speed above which a part's opening clip starts under the
    /// transition graphic.
    pub early_start_threshold: f64,
    pub overlay: OverlayConfig,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            fit: FitConfig::default(),
            transition_ms: 4000,
            early_start_threshold: 2.0,
            overlay: OverlayConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("split covers part {0}, which the script does not have")]
    UnknownPart(usize),
    #[error("part {part} needs a cta:{kind} region")]
    MissingCta { kind: CtaKind, part: usize },
    #[error("asset {asset} in part {part} overlaps the cta:{kind} region")]
    AssetInCta { asset: String, kind: CtaKind, part: usize },
    #[error("no timing for part {part} sentence {sentence}")]
    MissingTiming { part: usize, sentence: usize },
    #[error("clip {asset} in part {part}: {source}")]
    Fit { asset: AssetId, part: usize, source: FitError },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub asset: AssetId,
    pub part: usize,
    #[serde(flatten)]
    pub fit: ClipFit,
}

/// A stretch where the presenter would be on screen with nothing planned
/// and no reason to be.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub start_ms: u64,
    pub end_ms: u64,
    pub part: usize,
    /// First and last sentence (0-based) the gap touches.
    pub sentences: Option<(usize, usize)>,
    pub suggestion: String,
}

/// `covered`, `mandatory` and the gaps tile `[0, duration_ms)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub duration_ms: u64,
    pub covered: Vec<Interval>,
    /// CTA regions and transitions shown over the full-screen presenter.
    pub mandatory: Vec<Interval>,
    pub gaps: Vec<Gap>,
}

impl CoverageReport {
    pub fn gap_intervals(&self) -> Vec<Interval> {
        self.gaps.iter().map(|g| Interval::new(g.start_ms, g.end_ms)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompiledSplit {
    pub split: SplitPlan,
    pub timeline: Timeline,
    pub fits: Vec<FitResult>,
    pub coverage: CoverageReport,
    /// The input script with fitted speeds written back.
    #[serde(skip)]
    pub script: AnnotatedScript,
    pub overlays: Vec<OverlayPlacement>,
    /// Time where stylized overlays were allowed.
    pub overlay_eligible: Vec<Interval>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Sentence slots of one part on the split timeline.
struct Layout<'a> {
    part: &'a Part,
    span: Interval,
    slots: Vec<Interval>,
    transition: Option<Interval>,
    display: TransitionDisplay,
}

impl Layout<'_> {
    fn sentences(&self, first: usize, end: usize) -> Interval {
        Interval::new(self.slots[first].start_ms, self.slots[end - 1].end_ms)
    }

    /// Pushes the start of an interval past the transition.
    fn after_transition(&self, iv: Interval) -> Interval {
        match self.transition {
            Some(t) => Interval::new(iv.start_ms.max(t.end_ms), iv.end_ms.max(t.end_ms)),
            None => iv,
        }
    }

    fn opening_clip_early(&self) -> bool {
        self.display == TransitionDisplay::BRollStartsEarly
    }
}

fn secs(iv: Interval) -> (f64, f64) {
    (iv.start_ms as f64 / 1000.0, iv.end_ms as f64 / 1000.0)
}

fn ms(secs: f64) -> u64 {
    (secs * 1000.0).round().max(0.0) as u64
}

fn layouts<'a>(
    script: &'a AnnotatedScript,
    timing: &AlignedScript,
    split: &SplitPlan,
    config: &CompileConfig,
) -> Result<Vec<Layout<'a>>, CompileError> {
    let times: HashMap<(usize, usize), (u64, u64)> =
        timing.timings.iter().map(|t| ((t.part, t.sentence), (t.start_ms, t.end_ms))).collect();
    let last_end = timing.timings.iter().map(|t| t.end_ms).max().unwrap_or(0);
    let duration = timing.duration_ms.max(last_end);

    let mut raw = Vec::new();
    let mut cursor = 0u64;
    for number in split.parts() {
        let part = script.part(number).ok_or(CompileError::UnknownPart(number))?;
        let mut starts = Vec::with_capacity(part.sentences.len());
        let mut end = cursor;
        for s in 0..part.sentences.len() {
            let &(a, b) = times.get(&(number, s)).ok_or(CompileError::MissingTiming { part: number, sentence: s })?;
            let a = a.max(end).max(cursor);
            starts.push(a);
            end = b.max(a);
        }
        raw.push((part, cursor, starts));
        cursor = end;
    }

    let mut out: Vec<Layout> = Vec::with_capacity(raw.len());
    for (i, (part, start, starts)) in raw.iter().enumerate() {
        let end = raw.get(i + 1).map_or(duration.max(*start), |next| next.1);
        let span = Interval::new(*start, end);
        let slots = (0..starts.len())
            .map(|s| {
                let a = if s == 0 { *start } else { starts[s] };
                let b = starts.get(s + 1).copied().unwrap_or(end);
                Interval::new(a, b)
            })
            .collect();
        let transition = (part.number >= 2)
            .then(|| Interval::new(*start, (*start + config.transition_ms).min(end)))
            .filter(|t| !t.is_empty());
        out.push(Layout { part, span, slots, transition, display: TransitionDisplay::ARollFullScreen });
    }

    for layout in &mut out {
        let Some(t) = layout.transition else { continue };
        let opener = layout.part.asset_spans().find(|(_, s)| s.kind == SpanKind::Video && s.first == 0).map(|(_, s)| s);
        let next_clip = opener.and_then(|s| {
            let clip = layout.part.open_tag(s).clip?;
            let end = layout.slots[s.end - 1].end_ms;
            Some((f64::from(clip.baseline_secs), (t.end_ms as f64 / 1000.0, end as f64 / 1000.0)))
        });
        layout.display = resolve_transition_display(t.len() as f64 / 1000.0, next_clip, config.early_start_threshold);
    }
    Ok(out)
}

struct Placed {
    part: usize,
    interval: Interval,
    payload: Payload,
}

fn suggestion(part: &Part, sentences: Option<(usize, usize)>) -> String {
    match sentences {
        Some((a, _)) => {
            let text: String = part.sentences[a].chars().take(80).collect();
            format!("Find an image for: \"{text}\"")
        }
        None => format!("Find an image for part {}", part.number),
    }
}

/// Compiles the parts of one recording split against its sentence timings.
///
/// Times are on the split's polished timeline. Part boundaries fall where the
/// previous part's last sentence ends; sentence slots run from one
/// sentence start to the next so that the timeline has no holes.
pub fn compile_split(
    script: &AnnotatedScript,
    timing: &AlignedScript,
    split: &SplitPlan,
    config: &CompileConfig,
) -> Result<CompiledSplit, CompileError> {
    let layouts = layouts(script, timing, split, config)?;
    let duration = layouts.last().map_or(timing.duration_ms, |l| l.span.end_ms);
    let final_part = script.final_part();
    let mut out_script = script.clone();
    let mut diagnostics = Vec::new();

    // Calls to action, always on the full-screen presenter.
    let mut ctas = Vec::new();
    for l in &layouts {
        let n = l.part.number;
        let required = [(CtaKind::Intro, n == 1), (CtaKind::Concl, n == final_part && final_part >= 2)];
        for (kind, needed) in required {
            match l.part.cta_span(kind) {
                Some(span) => {
                    if let Some((_, asset)) = l.part.asset_spans().find(|(_, a)| a.intersects(span)) {
                        let label = l.part.open_tag(asset).label.to_string();
                        return Err(CompileError::AssetInCta { asset: label, kind, part: n });
                    }
                    let iv = l.after_transition(l.sentences(span.first, span.end));
                    if !iv.is_empty() {
                        ctas.push(iv);
                    }
                }
                None if needed => return Err(CompileError::MissingCta { kind, part: n }),
                None => {}
            }
        }
    }
    let ctas = interval::normalize(ctas);

    let mut events: Vec<TimelineEvent> = Vec::new();
    let mut fits = Vec::new();
    let mut videos: Vec<Placed> = Vec::new();
    let mut video_of_span: HashMap<(usize, usize), Interval> = HashMap::new();

    for l in &layouts {
        let part = l.part;
        let n = part.number;
        if let Some(t) = l.transition {
            let graphic = transition_graphic_name(n, final_part).expect("parts from 2 on have a graphic");
            events.push(TimelineEvent::new(t, Payload::Transition { graphic, display: l.display }));
        }

        // Sentences no clip may extend into.
        let mut claimed: Vec<bool> = (0..part.sentences.len()).map(|s| part.in_cta(s)).collect();
        for (_, span) in part.asset_spans() {
            if span.kind == SpanKind::Video || span.parent.is_none() {
                (span.first..span.end).for_each(|s| claimed[s] = true);
            }
        }
        // Sentences under a transition that is not shared with an early
        // clip lose the transition time.
        let slot = |s: usize| {
            let iv = l.slots[s];
            if l.opening_clip_early() {
                iv
            } else {
                l.after_transition(iv)
            }
        };

        let mut video_spans: Vec<(usize, _)> = part.asset_spans().filter(|(_, s)| s.kind == SpanKind::Video).collect();
        video_spans.sort_by_key(|(_, s)| s.first);
        for (idx, span) in video_spans {
            let tag = part.open_tag(span);
            let asset = tag.label.assets()[0];
            let Some(clip) = tag.clip else { continue };
            let target = Interval::new(slot(span.first).start_ms, slot(span.end - 1).end_ms);
            if target.is_empty() {
                diagnostics.push(
                    Diagnostic::warning(
                        "EmptyClipSpan",
                        format!("{asset} has no narration time left after the transition"),
                    )
                    .at_sentence(n, span.first),
                );
                continue;
            }
            let mut budget = ExtensionBudget::default();
            let mut before = Vec::new();
            for s in (0..span.first).rev().take_while(|&s| !claimed[s]) {
                let iv = slot(s);
                if iv.is_empty() {
                    break;
                }
                before.push(iv);
            }
            let after: Vec<Interval> = (span.end..part.sentences.len())
                .take_while(|&s| !claimed[s])
                .map(slot)
                .take_while(|iv| !iv.is_empty())
                .collect();
            budget.before = before.iter().map(|&iv| secs(iv)).collect();
            budget.after = after.iter().map(|&iv| secs(iv)).collect();

            let fit = fit_clip(f64::from(clip.baseline_secs), secs(target), &budget, &config.fit)
                .map_err(|source| CompileError::Fit { asset, part: n, source })?;
            (span.first - fit.extended_before..span.first).for_each(|s| claimed[s] = true);
            (span.end..span.end + fit.extended_after).for_each(|s| claimed[s] = true);

            let start =
                if fit.extended_before > 0 { before[fit.extended_before - 1].start_ms } else { target.start_ms };
            let limit = if fit.extended_after > 0 { after[fit.extended_after - 1].end_ms } else { target.end_ms };
            let end = match fit.residual {
                Residual::Truncated(_) => limit,
                _ => (start + ms(fit.covered_secs() + fit.hold_secs)).min(limit),
            };
            let hold_ms = ms(fit.hold_secs).min(end - start);
            if let Residual::Uncovered(secs) = fit.residual {
                diagnostics.push(
                    Diagnostic::warning(
                        "ClipTooShort",
                        format!("{asset} leaves {secs:.3} s uncovered even at {}x", fit.speed),
                    )
                    .at_sentence(n, span.first)
                    .at_loc(tag.loc),
                );
            }
            if let Residual::Truncated(secs) = fit.residual {
                diagnostics.push(
                    Diagnostic::warning("ClipTruncated", format!("{asset} loses {secs:.3} s even at {}x", fit.speed))
                        .at_sentence(n, span.first)
                        .at_loc(tag.loc),
                );
            }
            out_script.set_speed(n, span.open, fit.speed);
            let iv = Interval::new(start, end);
            video_of_span.insert((n, idx), iv);
            videos.push(Placed { part: n, interval: iv, payload: Payload::BRoll { asset, speed: fit.speed, hold_ms } });
            fits.push(FitResult { asset, part: n, fit });
        }
    }

    // Images: picture-in-picture inside their clip, full screen otherwise.
    let mut images: Vec<Placed> = Vec::new();
    for l in &layouts {
        for (_, span) in l.part.asset_spans().filter(|(_, s)| s.kind == SpanKind::Image) {
            let assets = l.part.open_tag(span).label.assets().to_vec();
            let iv = l.after_transition(l.sentences(span.first, span.end));
            if iv.is_empty() {
                continue;
            }
            let parent = span.parent.and_then(|p| video_of_span.get(&(l.part.number, p)));
            let payload = if parent.is_some_and(|v| v.contains(&iv)) {
                Payload::Image {
                    assets,
                    layout: ImageLayout::PictureInPicture,
                    hint: Some(LayoutHint::corner("top_right")),
                }
            } else {
                Payload::Image { assets, layout: ImageLayout::FullScreenImage, hint: None }
            };
            images.push(Placed { part: l.part.number, interval: iv, payload });
        }
    }
    images.sort_by_key(|p| p.interval);
    let mut kept: Vec<Placed> = Vec::with_capacity(images.len());
    for img in images {
        if let Some(prev) = kept.last_mut() {
            if prev.interval.end_ms > img.interval.start_ms {
                prev.interval.end_ms = img.interval.start_ms;
                diagnostics.push(
                    Diagnostic::warning("ImageOverlapClipped", "overlapping images: the earlier one is cut short")
                        .at_part(img.part),
                );
                if prev.interval.is_empty() {
                    kept.pop();
                }
            }
        }
        kept.push(img);
    }
    let images = kept;

    let transitions_full: Vec<Interval> =
        layouts.iter().filter(|l| !l.opening_clip_early()).filter_map(|l| l.transition).collect();
    let transitions_early: Vec<Interval> =
        layouts.iter().filter(|l| l.opening_clip_early()).filter_map(|l| l.transition).collect();
    let all_transitions = interval::union(&transitions_full, &transitions_early);
    let video_ivs = interval::normalize(videos.iter().map(|v| v.interval).collect());
    let image_ivs = interval::normalize(images.iter().map(|v| v.interval).collect());

    // Stylized overlays go where a clip hides the presenter in the middle
    // parts, away from images, transitions and calls to action.
    let middle: Vec<Interval> =
        videos.iter().filter(|v| v.part >= 2 && v.part < final_part).map(|v| v.interval).collect();
    let blocked = interval::union(&interval::union(&image_ivs, &all_transitions), &ctas);
    let overlay_eligible = interval::subtract(&interval::normalize(middle), &blocked);
    let (overlays, overlay_diags) = place_stylized_overlays(&overlay_eligible, &config.overlay);
    diagnostics.extend(overlay_diags);

    // A-roll display mode over elementary segments.
    let mut cuts: Vec<u64> = vec![0, duration];
    for iv in ctas.iter().chain(&video_ivs).chain(&image_ivs).chain(&all_transitions) {
        cuts.extend([iv.start_ms, iv.end_ms]);
    }
    cuts.extend(overlays.iter().flat_map(|o| [o.interval().start_ms, o.interval().end_ms]));
    cuts.extend(layouts.iter().map(|l| l.span.start_ms));
    cuts.retain(|&t| t <= duration);
    cuts.sort_unstable();
    cuts.dedup();
    let inside = |set: &[Interval], t: u64| set.iter().any(|iv| iv.contains_point(t));
    let mut modes: Vec<(Interval, ARollMode)> = Vec::new();
    for w in cuts.windows(2) {
        let t = w[0];
        let overlay = overlays.iter().find(|o| o.interval().contains_point(t));
        let mode = if inside(&ctas, t) {
            ARollMode::FullScreen
        } else if let Some(o) = overlay {
            match o.shape {
                OverlayShape::Circle => ARollMode::OverlayCircle,
                OverlayShape::Rect => ARollMode::OverlayRect,
            }
        } else if inside(&video_ivs, t) || inside(&image_ivs, t) || inside(&transitions_early, t) {
            ARollMode::Hidden
        } else if inside(&transitions_full, t) {
            ARollMode::FullScreen
        } else if layouts.iter().any(|l| l.part.number == 1 && l.span.contains_point(t)) {
            ARollMode::Hidden
        } else {
            ARollMode::FullScreen
        };
        match modes.last_mut() {
            Some((iv, m)) if *m == mode && iv.end_ms == t => iv.end_ms = w[1],
            _ => modes.push((Interval::new(t, w[1]), mode)),
        }
    }
    for (iv, mode) in modes {
        let layout = matches!(mode, ARollMode::OverlayCircle | ARollMode::OverlayRect)
            .then(|| LayoutHint::corner("bottom_right"));
        events.push(TimelineEvent::new(iv, Payload::ARoll { mode, layout }));
    }
    events.extend(videos.into_iter().map(|v| TimelineEvent::new(v.interval, v.payload)));
    events.extend(images.into_iter().map(|v| TimelineEvent::new(v.interval, v.payload)));
    events.sort_by_key(|e| (e.track, e.start_ms, e.end_ms));

    // Coverage partition.
    let whole = [Interval::new(0, duration)];
    let mandatory = interval::intersect(&interval::union(&ctas, &transitions_full), &whole);
    let shown = interval::normalize(video_ivs.iter().chain(&image_ivs).chain(&transitions_early).copied().collect());
    let covered = interval::subtract(&interval::intersect(&shown, &whole), &mandatory);
    let open = interval::subtract(&interval::subtract(&whole, &mandatory), &covered);
    let mut gaps = Vec::new();
    for l in &layouts {
        for g in interval::intersect(&open, &[l.span]) {
            let touched: Vec<usize> = (0..l.slots.len()).filter(|&s| l.slots[s].overlaps(&g)).collect();
            let sentences = touched.first().map(|&a| (a, *touched.last().unwrap_or(&a)));
            let part = l.part.number;
            let d = if part == 1 {
                Diagnostic::error(
                    "Part1Uncovered",
                    format!("part 1 narration at {}-{} ms has no B-roll", g.start_ms, g.end_ms),
                )
            } else {
                Diagnostic::warning(
                    "CoverageGap",
                    format!("part {part} shows the presenter at {}-{} ms with nothing planned", g.start_ms, g.end_ms),
                )
            };
            diagnostics.push(match sentences {
                Some((a, _)) => d.at_sentence(part, a).at_loc(l.part.sentence_loc(a)),
                None => d.at_part(part),
            });
            gaps.push(Gap {
                start_ms: g.start_ms,
                end_ms: g.end_ms,
                part,
                sentences,
                suggestion: suggestion(l.part, sentences),
            });
        }
    }

    Ok(CompiledSplit {
        split: *split,
        timeline: Timeline { split: split.id, duration_ms: duration, events },
        fits,
        coverage: CoverageReport { duration_ms: duration, covered, mandatory, gaps },
        script: out_script,
        overlays,
        overlay_eligible,
        diagnostics,
    })
}
