use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Timeline, TimelineEvent, Track};
use crate::workload::SplitId;

pub const EDL_VERSION: &str = "sima-edl/1";

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdlMetadata {
    /// Script file the timeline was compiled from.
    pub source: String,
    /// First and last part of the split.
    pub parts: [usize; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdlTrack {
    track: Track,
    events: Vec<TimelineEvent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdlDocument {
    version: String,
    split: SplitId,
    duration_ms: u64,
    metadata: EdlMetadata,
    tracks: Vec<EdlTrack>,
}

#[derive(Debug, Error)]
pub enum EdlError {
    #[error("malformed EDL: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported EDL version `{0}`")]
    Version(String),
    #[error("EDL tracks must be {expected:?} in that order")]
    TrackOrder { expected: [Track; 4] },
    #[error("event at {start_ms} ms sits on the {track:?} track but carries a {payload:?} payload")]
    TrackMismatch { track: Track, payload: Track, start_ms: u64 },
    #[error("event at {start_ms} ms ends at {end_ms} ms")]
    EmptyEvent { start_ms: u64, end_ms: u64 },
}

/// Serializes a timeline as pretty-printed JSON with a trailing newline.
/// Every track is present, in fixed order, even when empty.
pub fn export_edl(timeline: &Timeline, metadata: &EdlMetadata) -> String {
    let doc = EdlDocument {
        version: EDL_VERSION.to_string(),
        split: timeline.split,
        duration_ms: timeline.duration_ms,
        metadata: metadata.clone(),
        tracks: Track::ALL
            .iter()
            .map(|&track| EdlTrack { track, events: timeline.track(track).cloned().collect() })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("EDL documents always serialize");
    text.push('\n');
    text
}

pub fn import_edl(text: &str) -> Result<(Timeline, EdlMetadata), EdlError> {
    let doc: EdlDocument = serde_json::from_str(text)?;
    if doc.version != EDL_VERSION {
        return Err(EdlError::Version(doc.version));
    }
    if doc.tracks.iter().map(|t| t.track).ne(Track::ALL) {
        return Err(EdlError::TrackOrder { expected: Track::ALL });
    }
    let mut events = Vec::new();
    for track in doc.tracks {
        for e in track.events {
            if e.track != track.track || e.payload.track() != track.track {
                return Err(EdlError::TrackMismatch {
                    track: track.track,
                    payload: e.payload.track(),
                    start_ms: e.start_ms,
                });
            }
            if e.end_ms <= e.start_ms {
                return Err(EdlError::EmptyEvent { start_ms: e.start_ms, end_ms: e.end_ms });
            }
            events.push(e);
        }
    }
    Ok((Timeline { split: doc.split, duration_ms: doc.duration_ms, events }, doc.metadata))
}
