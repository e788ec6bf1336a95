use std::fmt::Write;

use super::{format_clock_range, AnnotatedScript, Polarity, Tag};

/// Canonical text for one tag, including its source block.
pub fn render_tag(tag: &Tag) -> String {
    let mut out = format!("[{}", tag.label);
    out.push(match tag.polarity {
        Polarity::Open => '+',
        Polarity::Close => '-',
    });
    if let Some(clip) = tag.clip {
        let (m, s) = (clip.baseline_secs / 60, clip.baseline_secs % 60);
        let duration = match (m, s) {
            (0, s) => format!("{s}s"),
            (m, 0) => format!("{m}min"),
            (m, s) => format!("{m}min{s}s"),
        };
        let _ = write!(out, ", {duration}, {}x", clip.speed);
    }
    if tag.hold {
        out.push_str(", hold");
    }
    out.push(']');
    if !tag.sources.is_empty() {
        let body: Vec<String> = tag
            .sources
            .iter()
            .map(|s| match s.range {
                Some(r) => format!("{} {}", s.url, format_clock_range(r)),
                None => s.url.clone(),
            })
            .collect();
        let _ = write!(out, "{{{}}}", body.join(" "));
    }
    out
}

/// Emits canonical script text: one header line and one body line per part,
/// parts separated by a blank line.
pub fn serialize_script(script: &AnnotatedScript) -> String {
    let mut out = String::new();
    for (i, part) in script.parts.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if part.title.is_empty() {
            let _ = writeln!(out, "## Part {}", part.number);
        } else {
            let _ = writeln!(out, "## Part {}: {}", part.number, part.title);
        }
        let mut tokens: Vec<String> = Vec::new();
        let mut tags = part.tags.iter().peekable();
        for boundary in 0..=part.sentences.len() {
            while let Some(tag) = tags.next_if(|t| t.boundary == boundary) {
                tokens.push(render_tag(tag));
            }
            if let Some(sentence) = part.sentences.get(boundary) {
                tokens.push(sentence.clone());
            }
        }
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse_script, Speed};

    #[test]
    fn single_image_example_round_trips() {
        let text = "This is the first sentence. [1001+]{https://example.com/image1.jpg} This is the second sentence. [1001-] This is the third sentence.";
        let script = parse_script(text).unwrap();
        let out = serialize_script(&script);
        assert_eq!(out, format!("## Part 1\n{text}\n"));
        assert_eq!(parse_script(&out).unwrap(), script);
    }

    #[test]
    fn multi_image_tags() {
        let text = "This is the first sentence. [1001, 1002+]{https://a/1.jpg https://a/2.png} This is the second sentence. [1001, 1002-] This is the third sentence.";
        let out = serialize_script(&parse_script(text).unwrap());
        assert!(out.contains("[1001, 1002+]{https://a/1.jpg https://a/2.png}"));
        assert!(out.contains("[1001, 1002-]"));
    }

    #[test]
    fn rewritten_speed_is_rendered() {
        let text = "One. [v1001+, 40s, 1.0x]{https://youtu.be/XXXXX 11:10-11:50} Two. [v1001-] Three.";
        let mut script = parse_script(text).unwrap();
        script.set_speed(1, 0, Speed::from_hundredths(120));
        let out = serialize_script(&script);
        assert!(out.contains("[v1001+, 40s, 1.2x]{https://youtu.be/XXXXX 11:10-11:50}"), "{out}");
    }

    #[test]
    fn duration_forms() {
        let script =
            parse_script("A. [v_part1+, 90s, 1.0x] B. [v_part1-] [v_part2+, 120s, 2.5x] C. [v_part2-]").unwrap();
        let out = serialize_script(&script);
        assert!(out.contains("[v_part1+, 1min30s, 1.0x]"));
        assert!(out.contains("[v_part2+, 2min, 2.5x]"));
    }
}
