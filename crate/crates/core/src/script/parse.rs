use super::{
    parse_clock_range, AnnotatedScript, AssetId, ClipParams, CtaKind, ParseError, Part, Polarity, SourceLoc, SourceRef,
    Span, SpanKind, Speed, StructureKind, Tag, TagLabel,
};

struct PartDraft<'a> {
    number: usize,
    title: String,
    header_loc: SourceLoc,
    lines: Vec<(usize, &'a str)>,
}

/// Parses an annotated script document.
///
/// Errors are reported for the first problem found: syntax and missing
/// sources in document order, then tag structure part by part.
pub fn parse_script(text: &str) -> Result<AnnotatedScript, ParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let drafts = split_parts(text)?;
    let mut parts = drafts.into_iter().map(scan_part).collect::<Result<Vec<_>, _>>()?;
    match_structure(&mut parts)?;
    Ok(AnnotatedScript { parts })
}

fn syntax(loc: SourceLoc, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { loc, message: message.into() }
}

fn structure(loc: SourceLoc, kind: StructureKind) -> ParseError {
    ParseError::Structure { loc, kind }
}

fn header_of(line: &str, line_no: usize) -> Option<Result<(usize, String), ParseError>> {
    let rest = line.strip_prefix("## Part")?;
    let loc = SourceLoc { line: line_no, column: 1 };
    let rest = rest.trim_start();
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    if digits.is_empty() {
        return Some(Err(syntax(loc, "part header must read `## Part <n>: <title>`")));
    }
    let after = rest[digits.len()..].trim();
    let title = match after.strip_prefix(':') {
        Some(t) => t.trim().to_string(),
        None if after.is_empty() => String::new(),
        None => return Some(Err(syntax(loc, "expected `:` after the part number"))),
    };
    match digits.parse() {
        Ok(n) => Some(Ok((n, title))),
        Err(_) => Some(Err(syntax(loc, "part number out of range"))),
    }
}

fn split_parts(text: &str) -> Result<Vec<PartDraft<'_>>, ParseError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let has_headers = lines.iter().any(|(_, l)| l.starts_with("## Part"));
    if !has_headers {
        return Ok(vec![PartDraft {
            number: 1,
            title: String::new(),
            header_loc: SourceLoc { line: 1, column: 1 },
            lines,
        }]);
    }
    let mut drafts: Vec<PartDraft> = Vec::new();
    for (line_no, line) in lines {
        match header_of(line, line_no) {
            Some(header) => {
                let (number, title) = header?;
                let expected = drafts.len() + 1;
                let header_loc = SourceLoc { line: line_no, column: 1 };
                if number != expected {
                    return Err(structure(header_loc, StructureKind::PartNumbering { expected, found: number }));
                }
                drafts.push(PartDraft { number, title, header_loc, lines: Vec::new() });
            }
            None => match drafts.last_mut() {
                Some(d) => d.lines.push((line_no, line)),
                None if line.trim().is_empty() => {}
                None => {
                    return Err(syntax(SourceLoc { line: line_no, column: 1 }, "text before the first part header"))
                }
            },
        }
    }
    Ok(drafts)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | '\u{201d}' | '\u{2019}')
}

#[derive(Default)]
struct SentenceBuf {
    text: String,
    loc: Option<SourceLoc>,
}

impl SentenceBuf {
    fn push(&mut self, c: char, loc: SourceLoc) {
        if self.loc.is_none() && !c.is_whitespace() {
            self.loc = Some(loc);
        }
        if self.loc.is_some() {
            self.text.push(c);
        }
    }

    fn is_blank(&self) -> bool {
        self.loc.is_none()
    }

    fn flush(&mut self, sentences: &mut Vec<String>, locs: &mut Vec<SourceLoc>) {
        if let Some(loc) = self.loc.take() {
            sentences.push(self.text.split_whitespace().collect::<Vec<_>>().join(" "));
            locs.push(loc);
        }
        self.text.clear();
    }
}

fn scan_part(draft: PartDraft<'_>) -> Result<Part, ParseError> {
    let mut chars: Vec<(char, SourceLoc)> = Vec::new();
    for (line_no, line) in &draft.lines {
        for (col, c) in line.chars().enumerate() {
            chars.push((c, SourceLoc { line: *line_no, column: col + 1 }));
        }
        chars.push(('\n', SourceLoc { line: *line_no, column: line.chars().count() + 1 }));
    }

    let mut sentences = Vec::new();
    let mut sentence_locs = Vec::new();
    let mut tags = Vec::new();
    let mut buf = SentenceBuf::default();
    let mut i = 0;
    while i < chars.len() {
        let (c, loc) = chars[i];
        match c {
            '[' => {
                if !buf.is_blank() {
                    return Err(syntax(loc, "tag inside a sentence; tags may only sit between sentences"));
                }
                let (tag, next) = scan_tag(&chars, i, sentences.len())?;
                tags.push(tag);
                i = next;
                continue;
            }
            ']' | '{' | '}' => return Err(syntax(loc, format!("unexpected `{c}` outside a tag"))),
            c if is_terminator(c) => {
                buf.push(c, loc);
                let mut j = i + 1;
                while j < chars.len() && (is_terminator(chars[j].0) || is_closer(chars[j].0)) {
                    buf.push(chars[j].0, chars[j].1);
                    j += 1;
                }
                if j == chars.len() || chars[j].0.is_whitespace() || chars[j].0 == '[' {
                    buf.flush(&mut sentences, &mut sentence_locs);
                }
                i = j;
                continue;
            }
            _ => buf.push(c, loc),
        }
        i += 1;
    }
    buf.flush(&mut sentences, &mut sentence_locs);

    Ok(Part {
        number: draft.number,
        title: draft.title,
        sentences,
        tags,
        spans: Vec::new(),
        header_loc: draft.header_loc,
        sentence_locs,
    })
}

/// Scans `[...]` starting at `start` plus an optional `{...}` source block.
/// Returns the tag and the index just past it.
fn scan_tag(chars: &[(char, SourceLoc)], start: usize, boundary: usize) -> Result<(Tag, usize), ParseError> {
    let loc = chars[start].1;
    let close = chars[start + 1..]
        .iter()
        .position(|(c, _)| matches!(c, ']' | '['))
        .map(|p| p + start + 1)
        .filter(|&p| chars[p].0 == ']')
        .ok_or_else(|| syntax(loc, "unterminated tag"))?;
    let body: String = chars[start + 1..close].iter().map(|(c, _)| *c).collect();
    let (label, polarity, clip, hold) = parse_tag_body(&body, loc)?;
    let mut next = close + 1;

    let mut source_text = None;
    if next < chars.len() && chars[next].0 == '{' {
        let end = chars[next + 1..]
            .iter()
            .position(|(c, _)| matches!(c, '}' | '{' | '[' | ']'))
            .map(|p| p + next + 1)
            .filter(|&p| chars[p].0 == '}')
            .ok_or_else(|| syntax(chars[next].1, "unterminated source annotation"))?;
        source_text = Some((chars[next].1, chars[next + 1..end].iter().map(|(c, _)| *c).collect::<String>()));
        next = end + 1;
    }

    let public: Vec<AssetId> = label.assets().iter().copied().filter(AssetId::is_public).collect();
    let sources = match (source_text, polarity, &label) {
        (None, Polarity::Open, TagLabel::Assets(_)) if !public.is_empty() => {
            return Err(ParseError::MissingSource { loc, id: public[0] });
        }
        (None, _, _) => Vec::new(),
        (Some((sloc, _)), Polarity::Close, _) | (Some((sloc, _)), _, TagLabel::Cta(_)) => {
            return Err(syntax(sloc, "source annotations belong on open asset tags"));
        }
        (Some(_), _, _) if public.is_empty() => {
            return Err(structure(loc, StructureKind::SourceOnOriginal(label.to_string())));
        }
        (Some((sloc, text)), _, _) => parse_sources(&text, &public, label.is_video(), sloc)?,
    };

    Ok((Tag { label, polarity, clip, sources, hold, boundary, loc }, next))
}

fn parse_sources(text: &str, public: &[AssetId], video: bool, loc: SourceLoc) -> Result<Vec<SourceRef>, ParseError> {
    let mut tokens = text.split_whitespace();
    if video {
        let url = tokens.next().ok_or_else(|| syntax(loc, "empty source annotation"))?;
        let rest: Vec<&str> = tokens.collect();
        if rest.is_empty() {
            return Err(syntax(loc, "video source needs an extraction range such as `0:10-0:35`"));
        }
        let range = parse_clock_range(&rest.join(" "))
            .ok_or_else(|| syntax(loc, format!("bad extraction range `{}`", rest.join(" "))))?;
        return Ok(vec![SourceRef { url: url.to_string(), range: Some(range) }]);
    }
    let urls: Vec<&str> = tokens.collect();
    if urls.len() != public.len() {
        return Err(syntax(
            loc,
            format!("expected {} source URL(s), one per public image, found {}", public.len(), urls.len()),
        ));
    }
    Ok(urls.into_iter().map(|u| SourceRef { url: u.to_string(), range: None }).collect())
}

type TagBody = (TagLabel, Polarity, Option<ClipParams>, bool);

fn parse_tag_body(body: &str, loc: SourceLoc) -> Result<TagBody, ParseError> {
    let body = body.trim();
    if let Some(rest) = body.strip_prefix("cta:") {
        let (kind, polarity) = match rest.trim() {
            "intro+" => (CtaKind::Intro, Polarity::Open),
            "intro-" => (CtaKind::Intro, Polarity::Close),
            "concl+" => (CtaKind::Concl, Polarity::Open),
            "concl-" => (CtaKind::Concl, Polarity::Close),
            other => return Err(syntax(loc, format!("unknown call-to-action marker `cta:{other}`"))),
        };
        return Ok((TagLabel::Cta(kind), polarity, None, false));
    }

    let items: Vec<&str> = body.split(',').map(str::trim).collect();
    let mut ids = Vec::new();
    let mut polarity = None;
    let mut consumed = items.len();
    for (k, item) in items.iter().enumerate() {
        let (id_text, pol) = if let Some(t) = item.strip_suffix('+') {
            (t, Some(Polarity::Open))
        } else if let Some(t) = item.strip_suffix('-') {
            (t, Some(Polarity::Close))
        } else {
            (*item, None)
        };
        let id: AssetId =
            id_text.trim().parse().map_err(|_| syntax(loc, format!("invalid asset id `{}`", id_text.trim())))?;
        ids.push(id);
        if pol.is_some() {
            polarity = pol;
            consumed = k + 1;
            break;
        }
    }
    let polarity = polarity.ok_or_else(|| syntax(loc, "tag needs a `+` or `-` after its id list"))?;
    let params = &items[consumed..];

    let has_video = ids.iter().any(AssetId::is_video);
    if has_video && ids.len() > 1 {
        return Err(syntax(loc, "video tags take exactly one id"));
    }

    let mut clip = None;
    let mut hold = false;
    match (has_video, polarity, params) {
        (true, Polarity::Open, [duration, speed]) => {
            let baseline_secs =
                parse_duration(duration).ok_or_else(|| syntax(loc, format!("bad duration `{duration}`")))?;
            let speed: Speed = speed
                .strip_suffix('x')
                .ok_or_else(|| syntax(loc, format!("bad speed `{speed}`")))?
                .parse()
                .map_err(|e: String| syntax(loc, e))?;
            clip = Some(ClipParams { baseline_secs, speed });
        }
        (true, Polarity::Open, _) => {
            return Err(syntax(loc, "video open tag needs `, <duration>, <speed>x`"));
        }
        (false, Polarity::Open, ["hold"]) => hold = true,
        (_, _, []) => {}
        (_, _, extra) => {
            return Err(syntax(loc, format!("unexpected tag parameters `{}`", extra.join(", "))));
        }
    }
    Ok((TagLabel::Assets(ids), polarity, clip, hold))
}

/// Accepts `<n>s`, `<n>min` and `<m>min<n>s`.
pub(crate) fn parse_duration(token: &str) -> Option<u32> {
    let digits = |s: &str| -> Option<u32> {
        (!s.is_empty() && s.len() <= 6 && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().ok()).flatten()
    };
    let secs = if let Some(m) = token.strip_suffix("min") {
        digits(m)? * 60
    } else {
        let rest = token.strip_suffix('s')?;
        match rest.split_once("min") {
            Some((m, s)) => digits(m)? * 60 + digits(s)?,
            None => digits(rest)?,
        }
    };
    (secs > 0).then_some(secs)
}

struct Active {
    tag: usize,
    span: usize,
}

fn match_structure(parts: &mut [Part]) -> Result<(), ParseError> {
    let mut seen_cta: Vec<CtaKind> = Vec::new();
    let part_count = parts.len();
    for pi in 0..part_count {
        let number = parts[pi].number;
        let is_final = pi + 1 == part_count;
        let tags = &parts[pi].tags;
        let mut spans: Vec<Span> = Vec::new();
        let mut active: Vec<Active> = Vec::new();

        for (ti, tag) in tags.iter().enumerate() {
            let label_text = tag.label.to_string();
            match (&tag.label, tag.polarity) {
                (TagLabel::Cta(kind), Polarity::Open) => {
                    let allowed = match kind {
                        CtaKind::Intro => number == 1,
                        CtaKind::Concl => is_final,
                    };
                    if !allowed {
                        return Err(structure(tag.loc, StructureKind::CtaMisplaced(*kind, number)));
                    }
                    if seen_cta.contains(kind) {
                        return Err(structure(tag.loc, StructureKind::DuplicateOpen(label_text)));
                    }
                    seen_cta.push(*kind);
                    spans.push(Span {
                        kind: SpanKind::Cta(*kind),
                        open: ti,
                        close: ti,
                        first: tag.boundary,
                        end: tag.boundary,
                        parent: None,
                    });
                    active.push(Active { tag: ti, span: spans.len() - 1 });
                }
                (TagLabel::Assets(ids), Polarity::Open) => {
                    if let Some(dup) =
                        ids.iter().find(|id| active.iter().any(|a| tags[a.tag].label.assets().contains(id)))
                    {
                        return Err(structure(tag.loc, StructureKind::DuplicateOpen(dup.to_string())));
                    }
                    let active_video = active.iter().find(|a| spans[a.span].kind == SpanKind::Video);
                    let is_video = tag.label.is_video();
                    if is_video {
                        if let Some(v) = active_video {
                            return Err(structure(
                                tag.loc,
                                StructureKind::VideoInVideo { outer: tags[v.tag].label.to_string(), inner: label_text },
                            ));
                        }
                        if let Some(img) = active.iter().find(|a| spans[a.span].kind == SpanKind::Image) {
                            return Err(structure(
                                tag.loc,
                                StructureKind::ImproperNesting(format!(
                                    "video {} opens inside active image span [{}]",
                                    label_text, tags[img.tag].label
                                )),
                            ));
                        }
                    }
                    let parent = if is_video { None } else { active_video.map(|a| a.span) };
                    spans.push(Span {
                        kind: if is_video { SpanKind::Video } else { SpanKind::Image },
                        open: ti,
                        close: ti,
                        first: tag.boundary,
                        end: tag.boundary,
                        parent,
                    });
                    active.push(Active { tag: ti, span: spans.len() - 1 });
                }
                (label, Polarity::Close) => {
                    let Some(pos) = active.iter().position(|a| &tags[a.tag].label == label) else {
                        let shares = label
                            .assets()
                            .iter()
                            .any(|id| active.iter().any(|a| tags[a.tag].label.assets().contains(id)));
                        let kind = if shares {
                            StructureKind::MismatchedClose(label_text)
                        } else {
                            StructureKind::Unbalanced(label_text)
                        };
                        return Err(structure(tag.loc, kind));
                    };
                    let span_idx = active[pos].span;
                    if spans[span_idx].kind == SpanKind::Video {
                        if let Some(img) = active.iter().find(|a| spans[a.span].parent == Some(span_idx)) {
                            return Err(structure(
                                tag.loc,
                                StructureKind::ImproperNesting(format!(
                                    "image span [{}] is still open when video {} closes",
                                    tags[img.tag].label, label_text
                                )),
                            ));
                        }
                    }
                    let span = &mut spans[span_idx];
                    span.close = ti;
                    span.end = tag.boundary;
                    if span.end == span.first {
                        return Err(structure(tag.loc, StructureKind::EmptySpan(label_text)));
                    }
                    active.remove(pos);
                }
            }
        }

        if let Some(open) = active.first() {
            let tag = &tags[open.tag];
            let closes_later = parts[pi + 1..]
                .iter()
                .any(|p| p.tags.iter().any(|t| t.polarity == Polarity::Close && t.label == tag.label));
            let kind = if closes_later {
                StructureKind::CrossPart(tag.label.to_string())
            } else {
                StructureKind::Unclosed(tag.label.to_string())
            };
            return Err(structure(tag.loc, kind));
        }
        parts[pi].spans = spans;
    }
    Ok(())
}
