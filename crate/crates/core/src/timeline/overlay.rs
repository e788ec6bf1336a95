use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::interval::{normalize, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlayShape {
    Circle,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OverlayPlacement {
    pub start_ms: u64,
    pub duration_ms: u64,
    pub shape: OverlayShape,
}

impl OverlayPlacement {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start_ms, self.start_ms + self.duration_ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlayConfig {
    pub count: usize,
    pub duration_ms: u64,
    /// Minimum start-to-start distance.
    pub min_gap_ms: u64,
}

impl Default for OverlayConfig {
    fn default() -> Self {
        OverlayConfig { count: 4, duration_ms: 20_000, min_gap_ms: 180_000 }
    }
}

/// Places the stylized A-roll overlays inside `eligible` (time where B-roll
/// video hides the presenter), earliest first. Shapes alternate starting
/// with a circle. Earliest-first placement maximizes the count, as in
/// interval scheduling. A shortfall is reported as a warning.
pub fn place_stylized_overlays(
    eligible: &[Interval],
    config: &OverlayConfig,
) -> (Vec<OverlayPlacement>, Vec<Diagnostic>) {
    let step = config.min_gap_ms.max(config.duration_ms);
    let mut out: Vec<OverlayPlacement> = Vec::new();
    let mut earliest = 0;
    for iv in normalize(eligible.to_vec()) {
        while out.len() < config.count {
            let t = iv.start_ms.max(earliest);
            if t + config.duration_ms > iv.end_ms {
                break;
            }
            let shape = if out.len().is_multiple_of(2) { OverlayShape::Circle } else { OverlayShape::Rect };
            out.push(OverlayPlacement { start_ms: t, duration_ms: config.duration_ms, shape });
            earliest = t + step;
        }
    }
    let mut diags = Vec::new();
    if out.len() < config.count {
        diags.push(Diagnostic::warning(
            "OverlayShortfall",
            format!("only {} of {} stylized overlays fit in the eligible B-roll time", out.len(), config.count),
        ));
    }
    (out, diags)
}
