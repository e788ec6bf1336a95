use std::collections::BTreeMap;

use super::{AnnotatedScript, AssetId, CtaKind, SpanKind};
use crate::diag::{Diagnostic, Severity};

#[derive(Debug, Clone)]
pub struct ValidateConfig {
    /// Sentences a standalone image may cover before the pacing warning.
    pub max_image_sentences: usize,
    /// Severity for two image spans covering a common sentence.
    pub image_overlap: Severity,
    /// Expected part count; a mismatch is a warning.
    pub expected_parts: Option<usize>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { max_image_sentences: 3, image_overlap: Severity::Error, expected_parts: None }
    }
}

/// Checks pacing, coverage and layout rules that parsing does not enforce.
pub fn validate_script(script: &AnnotatedScript, config: &ValidateConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if let Some(expected) = config.expected_parts {
        if script.parts.len() != expected {
            out.push(Diagnostic::warning(
                "PartCount",
                format!("script has {} parts, expected {expected}", script.parts.len()),
            ));
        }
    }

    let mut sources: BTreeMap<AssetId, (&str, usize)> = BTreeMap::new();

    for part in &script.parts {
        let n = part.number;
        if part.sentences.is_empty() {
            out.push(
                Diagnostic::error("EmptyPart", format!("part {n} has no sentences")).at_part(n).at_loc(part.header_loc),
            );
        }

        for (_, span) in part.asset_spans() {
            let tag = part.open_tag(span);
            if span.kind == SpanKind::Image
                && span.parent.is_none()
                && span.sentence_count() > config.max_image_sentences
                && !tag.hold
            {
                out.push(
                    Diagnostic::warning(
                        "ImageSpanTooLong",
                        format!(
                            "image [{}] covers {} sentences (limit {}); add `, hold` to keep it",
                            tag.label,
                            span.sentence_count(),
                            config.max_image_sentences
                        ),
                    )
                    .at_sentence(n, span.first)
                    .at_loc(tag.loc),
                );
            }
            if let Some(cta) = part.spans.iter().find(|c| matches!(c.kind, SpanKind::Cta(_)) && c.intersects(span)) {
                let SpanKind::Cta(kind) = cta.kind else { unreachable!() };
                out.push(
                    Diagnostic::error(
                        "AssetInCta",
                        format!("[{}] overlaps the {kind} call to action, which must stay full-screen", tag.label),
                    )
                    .at_sentence(n, span.first)
                    .at_loc(tag.loc),
                );
            }
            for id in tag.label.assets().iter().filter(|a| a.is_public()) {
                let Some(src) = tag.source_for(id) else { continue };
                match sources.get(id) {
                    Some((url, _)) if *url != src.url => out.push(
                        Diagnostic::error("ConflictingSource", format!("{id} is sourced from two different URLs"))
                            .at_part(n)
                            .at_loc(tag.loc),
                    ),
                    Some(_) => {}
                    None => {
                        sources.insert(*id, (&src.url, n));
                    }
                }
            }
        }

        let images: Vec<_> = part.spans.iter().filter(|s| s.kind == SpanKind::Image).collect();
        for (i, a) in images.iter().enumerate() {
            for b in &images[i + 1..] {
                if a.intersects(b) {
                    let tag = &part.tags[b.open];
                    out.push(
                        Diagnostic::new(
                            config.image_overlap,
                            "OverlappingImages",
                            format!(
                                "image spans [{}] and [{}] overlap; use one multi-image tag to show them together",
                                part.tags[a.open].label, tag.label
                            ),
                        )
                        .at_sentence(n, b.first)
                        .at_loc(tag.loc),
                    );
                }
            }
        }
    }

    if let Some(first) = script.parts.first() {
        for sentence in 0..first.sentences.len() {
            let covered = first.asset_spans().any(|(_, s)| s.covers(sentence));
            if !first.in_cta(sentence) && !covered {
                out.push(
                    Diagnostic::warning(
                        "Part1UncoveredNarration",
                        format!("part 1 sentence {} has no B-roll; the A-roll must be hidden here", sentence + 1),
                    )
                    .at_sentence(1, sentence)
                    .at_loc(first.sentence_loc(sentence)),
                );
            }
        }
        if first.cta_span(CtaKind::Intro).is_none() {
            out.push(
                Diagnostic::warning("MissingCta", "part 1 has no [cta:intro+] ... [cta:intro-] region").at_part(1),
            );
        }
    }
    if script.parts.len() >= 2 {
        let last = &script.parts[script.parts.len() - 1];
        if last.cta_span(CtaKind::Concl).is_none() {
            out.push(
                Diagnostic::warning(
                    "MissingCta",
                    format!("final part {} has no [cta:concl+] ... [cta:concl-] region", last.number),
                )
                .at_part(last.number),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_script;

    fn codes(text: &str) -> Vec<&'static str> {
        let script = parse_script(text).unwrap();
        validate_script(&script, &ValidateConfig::default()).iter().map(|d| d.code).collect()
    }

    const CTA: &str = "[cta:intro+] Subscribe now. [cta:intro-]";

    #[test]
    fn image_pacing_limit() {
        let four = format!("{CTA} [image_part1+] A. B. C. D. [image_part1-]");
        assert_eq!(codes(&four), vec!["ImageSpanTooLong"]);
        let three = format!("{CTA} [image_part1+] A. B. C. [image_part1-]");
        assert!(codes(&three).is_empty());
        let held = format!("{CTA} [image_part1+, hold] A. B. C. D. [image_part1-]");
        assert!(codes(&held).is_empty());
    }

    #[test]
    fn long_nested_image_is_not_paced() {
        let text = format!("{CTA} [v_part1+, 1min, 1.0x] [image_part1+] A. B. C. D. [image_part1-] [v_part1-]");
        assert!(codes(&text).is_empty());
    }

    #[test]
    fn uncovered_part_one_sentences() {
        let script = parse_script("A. [cta:intro+] Subscribe. [cta:intro-] B. C.").unwrap();
        let diags = validate_script(&script, &ValidateConfig::default());
        // Oracle: sentence indices minus CTA and span coverage.
        let sentences: Vec<usize> =
            diags.iter().filter(|d| d.code == "Part1UncoveredNarration").map(|d| d.sentence.unwrap()).collect();
        assert_eq!(sentences, vec![0, 2, 3]);
        assert!(diags.iter().all(|d| d.severity == Severity::Warning));
    }

    #[test]
    fn overlap_and_cta_errors() {
        let text = format!("{CTA} [image_part1+] A. [image_part2+] B. [image_part1-] C. [image_part2-]");
        assert_eq!(codes(&text), vec!["OverlappingImages"]);
        let text = "[cta:intro+] [image_part1+] Subscribe. [image_part1-] [cta:intro-]";
        assert_eq!(codes(text), vec!["AssetInCta"]);
    }

    #[test]
    fn missing_concluding_cta() {
        let text = format!("## Part 1: a\n{CTA}\n## Part 2: b\n[image_part1+] A. [image_part1-]");
        assert_eq!(codes(&text), vec!["MissingCta"]);
    }

    #[test]
    fn conflicting_sources() {
        let text = format!("{CTA} [1001+]{{https://a}} A. [1001-] [1001+]{{https://b}} B. [1001-]");
        assert_eq!(codes(&text), vec!["ConflictingSource"]);
    }
}
