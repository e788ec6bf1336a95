//! Caption files: SRT/VTT reading and writing, transcript polishing, and
//! alignment of script sentences onto caption timings.

mod align;
mod format;
mod polish;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use align::{align_parts, align_script_to_captions, AlignConfig, AlignedScript, AlignmentError, SentenceTiming};
pub use format::{export_captions, format_timestamp, parse_captions};
pub use polish::{normalize_text, polish_captions, take_similarity, Cut, CutList, CutReason, PolishConfig, Polished};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaptionCue {
    pub index: u32,
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

impl CaptionCue {
    pub fn new(index: u32, start_ms: u64, end_ms: u64, text: impl Into<String>) -> Self {
        CaptionCue { index, start_ms, end_ms, text: text.into() }
    }

    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptionFormat {
    Srt,
    Vtt,
}

impl CaptionFormat {
    pub fn extension(self) -> &'static str {
        match self {
            CaptionFormat::Srt => "srt",
            CaptionFormat::Vtt => "vtt",
        }
    }
}

impl std::str::FromStr for CaptionFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "srt" => Ok(CaptionFormat::Srt),
            "vtt" | "webvtt" => Ok(CaptionFormat::Vtt),
            other => Err(format!("unknown caption format `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaptionError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Shifts each track by its offset and renumbers the joined cues from 1.
pub fn concat_tracks(tracks: &[(u64, Vec<CaptionCue>)]) -> Vec<CaptionCue> {
    let mut out = Vec::new();
    for (offset, cues) in tracks {
        for cue in cues {
            out.push(CaptionCue {
                index: out.len() as u32 + 1,
                start_ms: cue.start_ms + offset,
                end_ms: cue.end_ms + offset,
                text: cue.text.clone(),
            });
        }
    }
    out
}
