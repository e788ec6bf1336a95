use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{normalize_text, CaptionCue};
use crate::script::AnnotatedScript;

#[derive(Debug, Clone)]
pub struct AlignConfig {
    /// Fraction of a sentence's words that must be found in order for the
    /// sentence to count as matched.
    pub min_word_fraction: f64,
    /// Fraction of sentences that must match before the caption file is
    /// accepted as belonging to the script.
    pub min_sentence_fraction: f64,
    /// Extra cue words searched past twice the sentence length.
    pub window_slack: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { min_word_fraction: 0.5, min_sentence_fraction: 0.5, window_slack: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTiming {
    pub part: usize,
    pub sentence: usize,
    pub start_ms: u64,
    pub end_ms: u64,
}

/// Sentence timings on the polished timeline, in script order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignedScript {
    pub timings: Vec<SentenceTiming>,
    pub duration_ms: u64,
}

impl AlignedScript {
    pub fn get(&self, part: usize, sentence: usize) -> Option<&SentenceTiming> {
        self.timings.iter().find(|t| t.part == part && t.sentence == sentence)
    }

    pub fn part(&self, part: usize) -> impl Iterator<Item = &SentenceTiming> {
        self.timings.iter().filter(move |t| t.part == part)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("only {matched} of {total} sentences matched the captions; wrong caption file?")]
pub struct AlignmentError {
    pub matched: usize,
    pub total: usize,
}

struct CueWord {
    text: String,
    start_ms: u64,
    end_ms: u64,
}

/// Splits each cue into words and spreads the cue's interval over them by
/// character count.
fn cue_words(cues: &[CaptionCue]) -> Vec<CueWord> {
    let mut words = Vec::new();
    let mut floor = 0;
    for cue in cues {
        let start = cue.start_ms.max(floor);
        let end = cue.end_ms.max(start);
        floor = end;
        let norm = normalize_text(&cue.text);
        let tokens: Vec<&str> = norm.split_whitespace().collect();
        let total: u64 = tokens.iter().map(|t| t.chars().count() as u64 + 1).sum();
        let mut acc = 0;
        for t in tokens {
            let a = start + (end - start) * acc / total;
            acc += t.chars().count() as u64 + 1;
            let b = start + (end - start) * acc / total;
            words.push(CueWord { text: t.to_string(), start_ms: a, end_ms: b });
        }
    }
    words
}

/// Longest common subsequence of `a` and `b`, returned as the matched
/// positions in `b`. Ties go to the earliest positions in `b`.
fn lcs_positions(a: &[&str], b: &[&str]) -> Vec<usize> {
    let (n, m) = (a.len(), b.len());
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            dp[i][j] = if a[i] == b[j] { dp[i + 1][j + 1] + 1 } else { dp[i + 1][j].max(dp[i][j + 1]) };
        }
    }
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < n && j < m {
        if a[i] == b[j] && dp[i][j] == dp[i + 1][j + 1] + 1 {
            out.push(j);
            i += 1;
            j += 1;
        } else if dp[i + 1][j] == dp[i][j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Aligns the sentences of parts `parts` to one polished caption track.
///
/// Sentences are matched greedily in order: each one looks for its words
/// as a subsequence of the cue words following the previous match. A
/// matched sentence spans its first to last matched word. Runs of unmatched
/// sentences share the gap between their matched neighbours by word count.
pub fn align_parts(
    script: &AnnotatedScript,
    parts: RangeInclusive<usize>,
    cues: &[CaptionCue],
    config: &AlignConfig,
) -> Result<AlignedScript, AlignmentError> {
    let words = cue_words(cues);
    let cue_tokens: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
    let duration_ms = cues.iter().map(|c| c.end_ms).max().unwrap_or(0);

    struct Slot {
        part: usize,
        sentence: usize,
        weight: u64,
        hit: Option<(u64, u64)>,
    }
    let mut slots = Vec::new();
    let mut cursor = 0;
    let mut floor = 0;
    for part in script.parts.iter().filter(|p| parts.contains(&p.number)) {
        for (s, text) in part.sentences.iter().enumerate() {
            let norm = normalize_text(text);
            let toks: Vec<&str> = norm.split_whitespace().collect();
            let window_end = cue_tokens.len().min(cursor + 2 * toks.len() + config.window_slack);
            let found = lcs_positions(&toks, &cue_tokens[cursor..window_end]);
            let needed = (config.min_word_fraction * toks.len() as f64).ceil() as usize;
            let hit = if !toks.is_empty() && found.len() >= needed.max(1) {
                let first = &words[cursor + found[0]];
                let last = &words[cursor + found[found.len() - 1]];
                cursor += found[found.len() - 1] + 1;
                let start = first.start_ms.max(floor);
                let end = last.end_ms.max(start);
                floor = end;
                Some((start, end))
            } else {
                None
            };
            slots.push(Slot { part: part.number, sentence: s, weight: toks.len().max(1) as u64, hit });
        }
    }

    let total = slots.len();
    let matched = slots.iter().filter(|s| s.hit.is_some()).count();
    if total > 0 && (matched as f64) < config.min_sentence_fraction * total as f64 {
        return Err(AlignmentError { matched, total });
    }

    let mut timings = Vec::with_capacity(total);
    let mut i = 0;
    let mut prev_end = 0;
    while i < total {
        if let Some((start, end)) = slots[i].hit {
            timings.push(SentenceTiming {
                part: slots[i].part,
                sentence: slots[i].sentence,
                start_ms: start,
                end_ms: end,
            });
            prev_end = end;
            i += 1;
            continue;
        }
        let run_end = (i..total).find(|&k| slots[k].hit.is_some()).unwrap_or(total);
        let gap_end = slots.get(run_end).and_then(|s| s.hit).map_or(duration_ms.max(prev_end), |(s, _)| s);
        let weights: u64 = slots[i..run_end].iter().map(|s| s.weight).sum();
        let span = gap_end - prev_end;
        let mut acc = 0;
        for slot in &slots[i..run_end] {
            let a = prev_end + span * acc / weights;
            acc += slot.weight;
            let b = prev_end + span * acc / weights;
            timings.push(SentenceTiming { part: slot.part, sentence: slot.sentence, start_ms: a, end_ms: b });
        }
        prev_end = gap_end;
        i = run_end;
    }

    Ok(AlignedScript { timings, duration_ms: duration_ms.max(prev_end) })
}

/// Aligns the whole script to one caption track covering every part.
pub fn align_script_to_captions(
    script: &AnnotatedScript,
    cues: &[CaptionCue],
) -> Result<AlignedScript, AlignmentError> {
    align_parts(script, 1..=script.final_part(), cues, &AlignConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_script;
    use proptest::prelude::*;

    fn cue(i: u32, s: u64, e: u64, t: &str) -> CaptionCue {
        CaptionCue::new(i, s, e, t)
    }

    fn spans(a: &AlignedScript) -> Vec<(u64, u64)> {
        a.timings.iter().map(|t| (t.start_ms, t.end_ms)).collect()
    }

    const FIVE: &str = "Nvidia was founded in 1993. The founders met at a diner in San Jose. \
        Their first product was the NV1. It sold poorly against its rivals. \
        The company nearly went bankrupt in 1996.";

    #[test]
    fn identity() {
        let script = parse_script("One two three. Four five six. Seven eight nine.").unwrap();
        let cues = vec![
            cue(1, 0, 1000, "One two three."),
            cue(2, 1200, 2000, "Four five six."),
            cue(3, 2000, 3500, "Seven eight nine."),
        ];
        let a = align_script_to_captions(&script, &cues).unwrap();
        assert_eq!(spans(&a), vec![(0, 1000), (1200, 2000), (2000, 3500)]);
        assert_eq!(a.duration_ms, 3500);
    }

    /// Every way of handing out consecutive, non-empty cue groups to the
    /// sentences in order, scored by shared words. The best partition gives
    /// each sentence the union of its group.
    fn exhaustive(sentences: &[&str], cues: &[CaptionCue]) -> Vec<(u64, u64)> {
        fn overlap(a: &str, b: &str) -> usize {
            let bw: Vec<String> = normalize_text(b).split_whitespace().map(String::from).collect();
            normalize_text(a).split_whitespace().filter(|w| bw.iter().any(|x| x == w)).count()
        }
        fn go(
            s: usize,
            c: usize,
            sentences: &[&str],
            cues: &[CaptionCue],
            cur: &mut Vec<(usize, usize)>,
            best: &mut (usize, Vec<(usize, usize)>),
        ) {
            if s == sentences.len() {
                if c == cues.len() {
                    let score = cur
                        .iter()
                        .enumerate()
                        .map(|(k, &(a, b))| {
                            let text: Vec<&str> = cues[a..b].iter().map(|q| q.text.as_str()).collect();
                            overlap(sentences[k], &text.join(" "))
                        })
                        .sum();
                    if score > best.0 {
                        *best = (score, cur.clone());
                    }
                }
                return;
            }
            for end in c + 1..=cues.len() {
                cur.push((c, end));
                go(s + 1, end, sentences, cues, cur, best);
                cur.pop();
            }
        }
        let mut best = (0, Vec::new());
        go(0, 0, sentences, cues, &mut Vec::new(), &mut best);
        best.1.iter().map(|&(a, b)| (cues[a].start_ms, cues[b - 1].end_ms)).collect()
    }

    #[test]
    fn split_cue_is_union() {
        let script = parse_script(FIVE).unwrap();
        let cues = vec![
            cue(1, 0, 2000, "Nvidia was founded in 1993."),
            cue(2, 2000, 3500, "The founders met"),
            cue(3, 3500, 5200, "at a diner in San Jose."),
            cue(4, 5400, 7000, "Their first product was the NV1."),
            cue(5, 7000, 9000, "It sold poorly against its rivals."),
            cue(6, 9100, 10400, "The company nearly went"),
            cue(7, 10400, 12000, "bankrupt in 1996."),
        ];
        let sentences = &script.parts[0].sentences;
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let oracle = exhaustive(&refs, &cues);
        let a = align_script_to_captions(&script, &cues).unwrap();
        assert_eq!(spans(&a), oracle);
        assert_eq!(a.timings[1].start_ms, 2000);
        assert_eq!(a.timings[1].end_ms, 5200);
    }

    #[test]
    fn wrong_captions() {
        let script = parse_script(FIVE).unwrap();
        let cues = vec![
            cue(1, 0, 2000, "Welcome to my cooking channel."),
            cue(2, 2000, 4000, "Today we bake sourdough bread."),
            cue(3, 4000, 6000, "First, feed your starter."),
            cue(4, 6000, 8000, "Let it rise overnight."),
        ];
        let err = align_script_to_captions(&script, &cues).unwrap_err();
        assert_eq!(err.total, 5);
        assert!(err.matched * 2 < err.total);
    }

    #[test]
    fn shuffled_words_still_fail() {
        // The words are right but the order is scrambled beyond recognition.
        let script = parse_script(FIVE).unwrap();
        let mut words: Vec<String> = normalize_text(FIVE).split_whitespace().rev().map(String::from).collect();
        words.rotate_left(7);
        let cues: Vec<CaptionCue> = words
            .chunks(6)
            .enumerate()
            .map(|(i, c)| cue(i as u32 + 1, i as u64 * 1000, i as u64 * 1000 + 900, &c.join(" ")))
            .collect();
        let matched_oracle = script.parts[0]
            .sentences
            .iter()
            .filter(|s| {
                let toks: Vec<String> = normalize_text(s).split_whitespace().map(String::from).collect();
                let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
                let all: Vec<&str> = words.iter().map(String::as_str).collect();
                lcs_positions(&refs, &all).len() * 2 >= toks.len()
            })
            .count();
        let result = align_script_to_captions(&script, &cues);
        if matched_oracle * 2 < 5 {
            assert!(result.is_err());
        }
    }

    #[test]
    fn unmatched_sentences_share_gap() {
        let script = parse_script("Alpha beta gamma. Something unrelated here now. Delta epsilon zeta.").unwrap();
        let cues = vec![
            cue(1, 0, 1000, "Alpha beta gamma."),
            cue(2, 1000, 2000, "mumble"),
            cue(3, 3000, 4000, "Delta epsilon zeta."),
        ];
        let a = align_script_to_captions(&script, &cues).unwrap();
        assert_eq!(spans(&a), vec![(0, 1000), (1000, 3000), (3000, 4000)]);
    }

    #[test]
    fn parts_subset() {
        let script = parse_script("## Part 1: A\nOne two.\n\n## Part 2: B\nThree four. Five six.").unwrap();
        let cues = vec![cue(1, 0, 500, "Three four."), cue(2, 500, 900, "Five six.")];
        let a = align_parts(&script, 2..=2, &cues, &AlignConfig::default()).unwrap();
        assert_eq!(a.timings.iter().map(|t| (t.part, t.sentence)).collect::<Vec<_>>(), vec![(2, 0), (2, 1)]);
    }

    proptest! {
        #[test]
        fn monotone(drop in proptest::collection::vec(any::<bool>(), 5), gaps in proptest::collection::vec(0u64..3000, 5)) {
            let script = parse_script(FIVE).unwrap();
            let mut t = 0;
            let mut cues = Vec::new();
            for (i, s) in script.parts[0].sentences.iter().enumerate() {
                t += gaps[i];
                let text = if drop[i] { "garbled noise" } else { s.as_str() };
                cues.push(cue(i as u32 + 1, t, t + 1500, text));
                t += 1500;
            }
            if let Ok(a) = align_script_to_captions(&script, &cues) {
                prop_assert_eq!(a.timings.len(), 5);
                for w in a.timings.windows(2) {
                    prop_assert!(w[0].end_ms <= w[1].start_ms);
                }
                for x in &a.timings {
                    prop_assert!(x.start_ms <= x.end_ms && x.end_ms <= a.duration_ms);
                }
            }
        }
    }
}
