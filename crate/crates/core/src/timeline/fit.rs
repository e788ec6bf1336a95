use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::script::Speed;

/// Playback speed bands. Extension into neighbouring sentences is tried
/// while the required speed is above the preferred band; the result is then
/// clamped to the hard band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub preferred_min: f64,
    pub preferred_max: f64,
    pub hard_min: f64,
    pub hard_max: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { preferred_min: 0.75, preferred_max: 2.0, hard_min: 0.5, hard_max: 4.0 }
    }
}

/// Sentence intervals (seconds) a clip may grow into, nearest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtensionBudget {
    pub before: Vec<(f64, f64)>,
    pub after: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "secs", rename_all = "lowercase")]
pub enum Residual {
    None,
    /// Span time left uncovered even at the slowest speed.
    Uncovered(f64),
    /// Clip time cut off even at the fastest speed.
    Truncated(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipFit {
    pub speed: Speed,
    /// Span after extension.
    pub span: (f64, f64),
    /// Part of the span showing moving footage.
    pub covered: (f64, f64),
    /// Freeze on the last frame after the footage ends, absorbing the
    /// rounding of the speed to hundredths.
    pub hold_secs: f64,
    pub extended_before: usize,
    pub extended_after: usize,
    pub residual: Residual,
}

impl ClipFit {
    pub fn covered_secs(&self) -> f64 {
        self.covered.1 - self.covered.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FitError {
    #[error("clip span {0}..{1} is empty")]
    InvalidSpan(f64, f64),
    #[error("clip baseline {0} s must be positive")]
    InvalidBaseline(f64),
}

/// A clip may overrun its span by up to this much before the speed is bumped
/// to the next hundredth. Keeps 40 s over 33.333 s at an even 1.2x.
const OVERRUN_SECS: f64 = 0.001;

/// Fits a clip of `baseline_secs` to a narration span by time-remapping.
///
/// While the required speed is above the preferred band the span grows one
/// budget sentence at a time, alternating after and before, nearest first.
/// A side is abandoned when its next sentence would push the speed below the
/// preferred band. Slow clips are never contracted: the span keeps its
/// full length and whatever the clip cannot fill at the hard minimum is
/// reported as uncovered.
pub fn fit_clip(
    baseline_secs: f64,
    span: (f64, f64),
    budget: &ExtensionBudget,
    config: &FitConfig,
) -> Result<ClipFit, FitError> {
    if !(baseline_secs.is_finite() && baseline_secs > 0.0) {
        return Err(FitError::InvalidBaseline(baseline_secs));
    }
    if !(span.0.is_finite() && span.1.is_finite() && span.1 > span.0) {
        return Err(FitError::InvalidSpan(span.0, span.1));
    }
    let (mut start, mut end) = span;
    let (mut before, mut after) = (0, 0);
    let (mut before_open, mut after_open) = (true, true);
    let mut after_turn = true;
    while baseline_secs / (end - start) > config.preferred_max {
        let can_after = after_open && after < budget.after.len();
        let can_before = before_open && before < budget.before.len();
        let take_after = match (can_after, can_before) {
            (false, false) => break,
            (true, true) => after_turn,
            (a, _) => a,
        };
        let (s, e) = if take_after {
            (start, end.max(budget.after[after].1))
        } else {
            (start.min(budget.before[before].0), end)
        };
        if baseline_secs / (e - s) < config.preferred_min {
            if take_after {
                after_open = false;
            } else {
                before_open = false;
            }
            continue;
        }
        (start, end) = (s, e);
        if take_after {
            after += 1;
        } else {
            before += 1;
        }
        after_turn = !take_after;
    }

    let len = end - start;
    let hundredths = ((baseline_secs * 100.0) / (len + OVERRUN_SECS) - 1e-9).ceil();
    let (min_h, max_h) = ((config.hard_min * 100.0).round(), (config.hard_max * 100.0).round());
    let fit = |speed: f64, covered: (f64, f64), hold_secs: f64, residual| ClipFit {
        speed: Speed::from_hundredths(speed as u32),
        span: (start, end),
        covered,
        hold_secs,
        extended_before: before,
        extended_after: after,
        residual,
    };
    Ok(if hundredths > max_h {
        fit(max_h, (start, end), 0.0, Residual::Truncated(baseline_secs / config.hard_max - len))
    } else if hundredths < min_h {
        let shown = baseline_secs / config.hard_min;
        fit(min_h, (start, start + shown), 0.0, Residual::Uncovered(len - shown))
    } else {
        let shown = baseline_secs * 100.0 / hundredths;
        fit(hundredths, (start, start + shown), (len - shown).max(0.0), Residual::None)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionDisplay {
    ARollFullScreen,
    BRollStartsEarly,
}

/// Decides what shows during a part's transition graphic. When the part
/// opens with a clip that would need more than `threshold` speed, the clip
/// starts under the transition instead of the presenter.
pub fn resolve_transition_display(
    transition_secs: f64,
    next_clip: Option<(f64, (f64, f64))>,
    threshold: f64,
) -> TransitionDisplay {
    match next_clip {
        Some((baseline, (s, e))) if transition_secs > 0.0 && (e <= s || baseline / (e - s) > threshold) => {
            TransitionDisplay::BRollStartsEarly
        }
        _ => TransitionDisplay::ARollFullScreen,
    }
}
