use serde::{Deserialize, Serialize};

use super::CaptionCue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutReason {
    Silence,
    RedundantTake,
    Anomaly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cut {
    pub start_ms: u64,
    pub end_ms: u64,
    pub reason: CutReason,
}

impl Cut {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }
}

/// Disjoint cuts in timeline order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutList {
    pub cuts: Vec<Cut>,
}

impl CutList {
    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn total_ms(&self) -> u64 {
        self.cuts.iter().map(Cut::duration_ms).sum()
    }

    /// Total length of the cuts ending at or before `t`.
    fn removed_before(&self, t: u64) -> u64 {
        self.cuts.iter().filter(|c| c.end_ms <= t).map(Cut::duration_ms).sum()
    }
}

#[derive(Debug, Clone)]
pub struct PolishConfig {
    /// Gaps between cues longer than this are cut.
    pub silence_threshold_ms: u64,
    /// Consecutive cues at or above this similarity form a retake group.
    pub similarity_threshold: f64,
    /// Smallest short/long length ratio for the prefix comparison in
    /// [`take_similarity`].
    pub min_prefix_ratio: f64,
    /// Filler and garbage tokens. A cue made only of these is an anomaly.
    pub anomaly_lexicon: Vec<String>,
    /// Raw recording length when known; otherwise the last cue end.
    pub recording_duration_ms: Option<u64>,
}

impl Default for PolishConfig {
    fn default() -> Self {
        let lexicon = [
            "um",
            "uh",
            "umm",
            "uhh",
            "uhm",
            "erm",
            "er",
            "ah",
            "hmm",
            "mhm",
            "[inaudible]",
            "[music]",
            "[noise]",
            "[silence]",
            "[blank_audio]",
            "(inaudible)",
        ];
        PolishConfig {
            silence_threshold_ms: 1500,
            similarity_threshold: 0.8,
            min_prefix_ratio: 0.5,
            anomaly_lexicon: lexicon.iter().map(|s| s.to_string()).collect(),
            recording_duration_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polished {
    pub cuts: CutList,
    pub cues: Vec<CaptionCue>,
    pub raw_duration_ms: u64,
    /// Raw duration minus all cuts.
    pub duration_ms: u64,
}

/// Lowercases and replaces everything but letters and digits with single
/// spaces.
pub fn normalize_text(text: &str) -> String {
    let mapped: String = text.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    mapped.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Similarity of two takes in `[0, 1]`.
///
/// The larger of the normalized edit similarity of the whole texts and of
/// the shorter text against an equally long prefix of the longer one. The
/// prefix form catches an abandoned take followed by a complete one; it only
/// applies when the shorter text is at least `min_prefix_ratio` of the longer.
pub fn take_similarity(a: &str, b: &str, min_prefix_ratio: f64) -> f64 {
    let (a, b) = (normalize_text(a), normalize_text(b));
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let full = strsim::normalized_levenshtein(&a, &b);
    let (short, long) = if a.chars().count() <= b.chars().count() { (&a, &b) } else { (&b, &a) };
    let short_len = short.chars().count();
    if (short_len as f64) < min_prefix_ratio * long.chars().count() as f64 {
        return full;
    }
    let prefix: String = long.chars().take(short_len).collect();
    full.max(strsim::normalized_levenshtein(short, &prefix))
}

fn is_anomaly(text: &str, lexicon: &[String]) -> bool {
    let trim =
        |t: &str| -> String { t.trim_matches(|c: char| !(c.is_alphanumeric() || "[]()_".contains(c))).to_lowercase() };
    text.split_whitespace().map(trim).filter(|t| !t.is_empty()).all(|t| lexicon.contains(&t))
}

/// Computes the cut list for one raw split and retimes the kept cues onto
/// the shortened timeline.
///
/// Removed cues (anomalies and every take but the last of a retake group)
/// are cut over their own extent. Gaps longer than the silence threshold,
/// including leading and trailing ones, are cut whole. Cue overlaps in the
/// raw input are clipped to the next cue's start first.
pub fn polish_captions(raw: &[CaptionCue], config: &PolishConfig) -> Polished {
    let mut cues: Vec<CaptionCue> = raw.to_vec();
    for i in 1..cues.len() {
        let next_start = cues[i].start_ms;
        let prev = &mut cues[i - 1];
        prev.end_ms = prev.end_ms.min(next_start);
    }

    let mut removed: Vec<Option<CutReason>> = cues
        .iter()
        .map(|c| (c.end_ms <= c.start_ms || is_anomaly(&c.text, &config.anomaly_lexicon)).then_some(CutReason::Anomaly))
        .collect();
    let speech: Vec<usize> = (0..cues.len()).filter(|&i| removed[i].is_none()).collect();
    for pair in speech.windows(2) {
        let (a, b) = (&cues[pair[0]], &cues[pair[1]]);
        if take_similarity(&a.text, &b.text, config.min_prefix_ratio) >= config.similarity_threshold {
            removed[pair[0]] = Some(CutReason::RedundantTake);
        }
    }

    let last_end = cues.iter().map(|c| c.end_ms).max().unwrap_or(0);
    let raw_duration_ms = config.recording_duration_ms.map_or(last_end, |d| d.max(last_end));

    let mut cuts = Vec::new();
    let mut cursor = 0;
    let silence = |from: u64, to: u64, cuts: &mut Vec<Cut>| {
        if to > from && to - from > config.silence_threshold_ms {
            cuts.push(Cut { start_ms: from, end_ms: to, reason: CutReason::Silence });
        }
    };
    for (cue, reason) in cues.iter().zip(&removed) {
        silence(cursor, cue.start_ms, &mut cuts);
        if let Some(reason) = reason {
            if cue.end_ms > cue.start_ms {
                cuts.push(Cut { start_ms: cue.start_ms, end_ms: cue.end_ms, reason: *reason });
            }
        }
        cursor = cursor.max(cue.end_ms);
    }
    silence(cursor, raw_duration_ms, &mut cuts);
    let cuts = CutList { cuts };

    let kept: Vec<CaptionCue> = cues
        .iter()
        .zip(&removed)
        .filter(|(_, r)| r.is_none())
        .enumerate()
        .map(|(i, (cue, _))| {
            let shift = cuts.removed_before(cue.start_ms);
            CaptionCue::new(i as u32 + 1, cue.start_ms - shift, cue.end_ms - shift, cue.text.clone())
        })
        .collect();

    Polished { duration_ms: raw_duration_ms - cuts.total_ms(), raw_duration_ms, cuts, cues: kept }
}
