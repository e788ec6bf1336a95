//! Split compilation: clip fitting, image placement, A-roll display modes,
//! stylized overlays, coverage analysis and the EDL document.

mod compile;
mod edl;
mod fit;
mod overlay;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::script::{AssetId, Speed};
use crate::workload::SplitId;

pub use compile::{compile_split, CompileConfig, CompileError, CompiledSplit, CoverageReport, FitResult, Gap};
pub use edl::{export_edl, import_edl, EdlError, EdlMetadata, EDL_VERSION};
pub use fit::{
    fit_clip, resolve_transition_display, ClipFit, ExtensionBudget, FitConfig, FitError, Residual, TransitionDisplay,
};
pub use overlay::{place_stylized_overlays, OverlayConfig, OverlayPlacement, OverlayShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    #[serde(rename = "aroll_mode")]
    ARollMode,
    #[serde(rename = "broll_video")]
    BRollVideo,
    ImageOverlay,
    TransitionGraphic,
}

impl Track {
    pub const ALL: [Track; 4] = [Track::ARollMode, Track::BRollVideo, Track::ImageOverlay, Track::TransitionGraphic];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ARollMode {
    FullScreen,
    Hidden,
    OverlayCircle,
    OverlayRect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageLayout {
    FullScreenImage,
    PictureInPicture,
}

/// Placement hint for a localized overlay. Pixel geometry is left to the
/// renderer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayoutHint {
    pub anchor: String,
    pub width_pct: u8,
}

impl LayoutHint {
    pub fn corner(anchor: &str) -> Self {
        LayoutHint { anchor: anchor.to_string(), width_pct: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    #[serde(rename = "aroll")]
    ARoll {
        mode: ARollMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layout: Option<LayoutHint>,
    },
    #[serde(rename = "broll")]
    BRoll {
        asset: AssetId,
        speed: Speed,
        hold_ms: u64,
    },
    Image {
        assets: Vec<AssetId>,
        layout: ImageLayout,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hint: Option<LayoutHint>,
    },
    Transition {
        graphic: String,
        display: TransitionDisplay,
    },
}

impl Payload {
    pub fn track(&self) -> Track {
        match self {
            Payload::ARoll { .. } => Track::ARollMode,
            Payload::BRoll { .. } => Track::BRollVideo,
            Payload::Image { .. } => Track::ImageOverlay,
            Payload::Transition { .. } => Track::TransitionGraphic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub track: Track,
    pub start_ms: u64,
    pub end_ms: u64,
    pub payload: Payload,
}

impl TimelineEvent {
    pub fn new(iv: Interval, payload: Payload) -> Self {
        TimelineEvent { track: payload.track(), start_ms: iv.start_ms, end_ms: iv.end_ms, payload }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.start_ms, self.end_ms)
    }
}

/// Events of one split, ordered by track and then by start time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub split: SplitId,
    pub duration_ms: u64,
    pub events: Vec<TimelineEvent>,
}

impl Timeline {
    pub fn track(&self, track: Track) -> impl Iterator<Item = &TimelineEvent> {
        self.events.iter().filter(move |e| e.track == track)
    }

    /// The A-roll mode at `t`, if the mode track covers it.
    pub fn aroll_mode_at(&self, t: u64) -> Option<ARollMode> {
        self.track(Track::ARollMode).find(|e| e.interval().contains_point(t)).and_then(|e| match e.payload {
            Payload::ARoll { mode, .. } => Some(mode),
            _ => None,
        })
    }
}
