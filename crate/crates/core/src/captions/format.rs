use std::fmt::Write;

use super::{CaptionCue, CaptionError, CaptionFormat};

fn fail(line: usize, message: impl Into<String>) -> CaptionError {
    CaptionError::Format { line, message: message.into() }
}

/// `HH:MM:SS,mmm` for SRT, `HH:MM:SS.mmm` for VTT.
pub fn format_timestamp(ms: u64, format: CaptionFormat) -> String {
    let sep = match format {
        CaptionFormat::Srt => ',',
        CaptionFormat::Vtt => '.',
    };
    let (h, m, s, milli) = (ms / 3_600_000, (ms / 60_000) % 60, (ms / 1000) % 60, ms % 1000);
    format!("{h:02}:{m:02}:{s:02}{sep}{milli:03}")
}

fn parse_timestamp(text: &str, format: CaptionFormat) -> Option<u64> {
    let (clock, millis) = match format {
        // Transcription tools are inconsistent about the SRT separator.
        CaptionFormat::Srt => text.split_once(',').or_else(|| text.split_once('.'))?,
        CaptionFormat::Vtt => text.split_once('.')?,
    };
    let digits = |s: &str, n: Option<usize>| -> Option<u64> {
        let ok = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && n.is_none_or(|n| s.len() == n);
        ok.then(|| s.parse().ok()).flatten()
    };
    let ms = digits(millis, Some(3))?;
    let fields: Vec<&str> = clock.split(':').collect();
    let (h, m, s) = match (format, fields.as_slice()) {
        (_, [h, m, s]) if h.len() >= 2 => (digits(h, None)?, digits(m, Some(2))?, digits(s, Some(2))?),
        (CaptionFormat::Vtt, [m, s]) => (0, digits(m, Some(2))?, digits(s, Some(2))?),
        _ => return None,
    };
    (m < 60 && s < 60).then_some(((h * 60 + m) * 60 + s) * 1000 + ms)
}

fn parse_timing(line: &str, line_no: usize, format: CaptionFormat) -> Result<(u64, u64), CaptionError> {
    let (a, b) = line.split_once("-->").ok_or_else(|| fail(line_no, "expected `start --> end`"))?;
    // VTT cue settings may follow the end timestamp.
    let b = b.split_whitespace().next().unwrap_or("");
    let start = parse_timestamp(a.trim(), format)
        .ok_or_else(|| fail(line_no, format!("malformed timestamp `{}`", a.trim())))?;
    let end = parse_timestamp(b, format).ok_or_else(|| fail(line_no, format!("malformed timestamp `{b}`")))?;
    if end <= start {
        return Err(fail(line_no, "cue ends before it starts"));
    }
    Ok((start, end))
}

/// Parses an SRT or VTT document into cues sorted by start time.
pub fn parse_captions(text: &str, format: CaptionFormat) -> Result<Vec<CaptionCue>, CaptionError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines: Vec<(usize, &str)> =
        text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut blocks: Vec<&[(usize, &str)]> = Vec::new();
    let mut start = None;
    for (i, (_, line)) in lines.iter().enumerate() {
        match (line.trim().is_empty(), start) {
            (true, Some(s)) => {
                blocks.push(&lines[s..i]);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        blocks.push(&lines[s..]);
    }

    let mut blocks = blocks.into_iter();
    if format == CaptionFormat::Vtt {
        match blocks.next() {
            Some(header) if header[0].1.starts_with("WEBVTT") => {}
            Some(block) => return Err(fail(block[0].0, "missing WEBVTT header")),
            None => return Err(fail(1, "missing WEBVTT header")),
        }
    }

    let mut cues: Vec<CaptionCue> = Vec::new();
    for block in blocks {
        let first = block[0].1;
        if format == CaptionFormat::Vtt && ["NOTE", "STYLE", "REGION"].iter().any(|k| first.starts_with(k)) {
            continue;
        }
        let (index, timing_at) = if first.contains("-->") {
            match format {
                CaptionFormat::Srt => return Err(fail(block[0].0, "missing cue index")),
                CaptionFormat::Vtt => (None, 0),
            }
        } else {
            let ident = first.trim();
            let index = match (format, ident.parse::<u32>()) {
                (_, Ok(n)) => Some(n),
                (CaptionFormat::Vtt, Err(_)) => None,
                (CaptionFormat::Srt, Err(_)) => return Err(fail(block[0].0, format!("bad cue index `{ident}`"))),
            };
            (index, 1)
        };
        let (line_no, timing) = *block.get(timing_at).ok_or_else(|| fail(block[0].0, "cue has no timing line"))?;
        let (start_ms, end_ms) = parse_timing(timing, line_no, format)?;
        let text = block[timing_at + 1..].iter().map(|(_, l)| *l).collect::<Vec<_>>().join("\n");

        let prev = cues.last();
        let index = index.unwrap_or_else(|| prev.map_or(1, |c| c.index + 1));
        if let Some(prev) = prev {
            if index <= prev.index {
                return Err(fail(block[0].0, format!("cue index {index} does not increase")));
            }
            if start_ms < prev.start_ms {
                return Err(fail(line_no, "cue starts before the previous cue"));
            }
        }
        cues.push(CaptionCue { index, start_ms, end_ms, text });
    }
    Ok(cues)
}

pub fn export_captions(cues: &[CaptionCue], format: CaptionFormat) -> String {
    let mut out = String::new();
    if format == CaptionFormat::Vtt {
        out.push_str("WEBVTT\n\n");
    }
    for cue in cues {
        let _ = write!(
            out,
            "{}\n{} --> {}\n{}\n\n",
            cue.index,
            format_timestamp(cue.start_ms, format),
            format_timestamp(cue.end_ms, format),
            cue.text
        );
    }
    out
}
