//! Synthetic inputs for the benchmarks.

use sima_core::captions::SentenceTiming;
use sima_core::script::AnnotatedScript;
use sima_core::{parse_script, AlignedScript};

/// Script text with `parts` parts of `sentences` sentences each. Part 1
/// opens with a CTA and images, middle parts alternate clips and images,
/// and the last part ends with the closing CTA.
pub fn script_text(parts: usize, sentences: usize) -> String {
    assert!(parts >= 2 && sentences >= 4);
    let mut out = String::new();
    let mut id = 0;
    for p in 1..=parts {
        out.push_str(&format!("## Part {p}: Chapter {p}\n"));
        let line = |s: usize| format!("Sentence {s} of part {p} keeps the story moving.");
        let mut s = 0;
        if p == 1 {
            out.push_str(&format!("[cta:intro+] {} [cta:intro-] ", line(0)));
            s = 1;
        }
        let stop = if p == parts { sentences - 1 } else { sentences };
        while s < stop {
            id += 1;
            let k = 3.min(stop - s);
            let body: Vec<String> = (s..s + k).map(line).collect();
            let body = body.join(" ");
            if p > 1 && id % 2 == 0 {
                let v = format!("v_part{id:04}");
                out.push_str(&format!("[{v}+, {}s, 1.0x] {body} [{v}-] ", 20 * k));
            } else {
                let img = format!("image_part{id:04}");
                out.push_str(&format!("[{img}+] {body} [{img}-] "));
            }
            s += k;
        }
        if p == parts {
            out.push_str(&format!("[cta:concl+] {} [cta:concl-]", line(sentences - 1)));
        }
        out.push_str("\n\n");
    }
    out
}

/// Parsed script plus contiguous 12 s sentence timings.
pub fn project(parts: usize, sentences: usize) -> (AnnotatedScript, AlignedScript) {
    let script = parse_script(&script_text(parts, sentences)).expect("synthetic script parses");
    let mut timings = Vec::new();
    let mut t = 0;
    for (p, part) in script.parts.iter().enumerate() {
        for s in 0..part.sentences.len() {
            timings.push(SentenceTiming { part: p + 1, sentence: s, start_ms: t, end_ms: t + 12_000 });
            t += 12_000;
        }
    }
    (script, AlignedScript { timings, duration_ms: t })
}
