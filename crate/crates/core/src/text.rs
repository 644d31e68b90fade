//! Text normalization and marker-phrase windows over span lists.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::model::{MarkerHit, TextSpan};

/// NFC, drop control characters, join `xy-\nzw` hyphenation between letters,
/// collapse whitespace runs and trim.
pub fn normalize_text(raw: &str) -> String {
    let joined = join_hyphenation(raw);
    let mut out = String::with_capacity(joined.len());
    for word in joined
        .split(char::is_whitespace)
        .map(|w| w.chars().filter(|&c| !is_dropped(c)).collect::<String>())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word);
    }
    if is_nfc_quick(out.chars()) == IsNormalized::Yes {
        return out;
    }
    out.nfc().collect()
}

fn is_dropped(c: char) -> bool {
    (c.is_control() && !c.is_whitespace()) || c == '\u{FFFE}' || c == '\u{FFFF}'
}

fn join_hyphenation(raw: &str) -> String {
    if !raw.contains('-') {
        return raw.to_string();
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut prev: Option<char> = None;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '-' && prev.is_some_and(char::is_alphabetic) {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '\n' && chars[j].is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j] == '\n' {
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_alphabetic() {
                    i = j;
                    continue;
                }
            }
        }
        out.push(c);
        if !is_dropped(c) {
            prev = Some(c);
        }
        i += 1;
    }
    out
}

/// Leading section numbers like `1.`, `7 ` or `IV.` that may precede a heading.
static ENUMERATOR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:\d{1,2}\.\s*|\d{1,2}\s+|[IVXL]{1,6}\.\s*)").expect("valid regex")
});

/// Finds the marker a normalized span starts with, either directly or after a
/// leading section number. Direct matches win; longer markers win ties.
/// Returns the marker and its byte offset in `normalized`.
pub fn match_marker<'m>(normalized: &str, markers: &'m [String]) -> Option<(&'m str, usize)> {
    let longest_at = |offset: usize| {
        markers
            .iter()
            .filter(|m| !m.is_empty() && normalized[offset..].starts_with(m.as_str()))
            .max_by_key(|m| m.len())
            .map(|m| (m.as_str(), offset))
    };
    longest_at(0).or_else(|| {
        let prefix = ENUMERATOR.find(normalized)?;
        longest_at(prefix.end())
    })
}

fn hit_at(spans: &[TextSpan], index: usize, markers: &[String]) -> Option<MarkerHit> {
    let span = &spans[index];
    let normalized = normalize_text(&span.text);
    match_marker(&normalized, markers).map(|(marker, offset)| MarkerHit {
        marker: marker.to_string(),
        page: span.page,
        span_index: index,
        char_offset: offset,
    })
}

/// First span in `[search_from, search_to)` whose normalized text starts with
/// one of `markers`. Bounds past the end of `spans` are clamped.
pub fn locate_marker(
    spans: &[TextSpan],
    markers: &[String],
    search_from: usize,
    search_to: usize,
) -> Option<MarkerHit> {
    let to = search_to.min(spans.len());
    (search_from.min(to)..to).find_map(|i| hit_at(spans, i, markers))
}

/// Last matching span in `[search_from, search_to)`.
pub fn locate_last_marker(
    spans: &[TextSpan],
    markers: &[String],
    search_from: usize,
    search_to: usize,
) -> Option<MarkerHit> {
    let to = search_to.min(spans.len());
    (search_from.min(to)..to)
        .rev()
        .find_map(|i| hit_at(spans, i, markers))
}

/// Every matching span in range, in reading order.
pub fn locate_all_markers(spans: &[TextSpan], markers: &[String]) -> Vec<MarkerHit> {
    (0..spans.len())
        .filter_map(|i| hit_at(spans, i, markers))
        .collect()
}

/// One end of a slice window.
#[derive(Debug, Clone, Copy)]
pub enum Anchor<'a> {
    Start,
    Hit(&'a MarkerHit),
    End,
}

impl Anchor<'_> {
    /// Position in a span list of length `len`, shifted by one so that
    /// `Start` sits before span 0.
    fn position(&self, len: usize) -> usize {
        match self {
            Anchor::Start => 0,
            Anchor::Hit(hit) => hit.span_index + 1,
            Anchor::End => len + 1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SliceError {
    #[error("slice start (position {from}) does not precede its end (position {to})")]
    InvalidRange { from: usize, to: usize },
    #[error("anchor span {index} is outside the {len} searched spans")]
    AnchorOutOfRange { index: usize, len: usize },
}

/// Text strictly between two anchors, normalized.
///
/// With `include_from_remainder`, the part of the start span after its marker
/// is kept, which covers one-span layouts like `Abstract— We study X.`.
/// Separator punctuation left at the front after a marker is trimmed.
pub fn slice_text(
    spans: &[TextSpan],
    from: Anchor<'_>,
    to: Anchor<'_>,
    include_from_remainder: bool,
) -> Result<String, SliceError> {
    for anchor in [from, to] {
        if let Anchor::Hit(hit) = anchor {
            if hit.span_index >= spans.len() {
                return Err(SliceError::AnchorOutOfRange {
                    index: hit.span_index,
                    len: spans.len(),
                });
            }
        }
    }
    let (start, end) = (from.position(spans.len()), to.position(spans.len()));
    if start >= end || matches!(from, Anchor::End) || matches!(to, Anchor::Start) {
        return Err(SliceError::InvalidRange {
            from: start,
            to: end,
        });
    }
    // spans strictly between the anchors
    let inner = &spans[start..end - 1];

    let mut raw = String::new();
    let mut last: Option<&TextSpan> = None;
    if let (Anchor::Hit(hit), true) = (from, include_from_remainder) {
        let span = &spans[hit.span_index];
        let normalized = normalize_text(&span.text);
        let cut = (hit.char_offset + hit.marker.len()).min(normalized.len());
        if let Some(rest) = normalized.get(cut..) {
            raw.push_str(rest);
        }
        last = Some(span);
    }
    for span in inner {
        push_span(&mut raw, last, span);
        last = Some(span);
    }

    let text = normalize_text(&raw);
    Ok(match from {
        Anchor::Hit(_) => trim_leading_separators(&text).to_string(),
        _ => text,
    })
}

/// Appends a span, breaking the line when the baseline changes so that
/// end-of-line hyphenation can be rejoined by normalization.
fn push_span(raw: &mut String, previous: Option<&TextSpan>, span: &TextSpan) {
    if let Some(prev) = previous {
        raw.push(if prev.same_line(span) { ' ' } else { '\n' });
    }
    raw.push_str(&span.text);
}

/// Joins span texts the way `slice_text` does, without any anchor handling.
pub fn join_spans(spans: &[TextSpan]) -> String {
    let mut raw = String::new();
    let mut last = None;
    for span in spans {
        push_span(&mut raw, last, span);
        last = Some(span);
    }
    normalize_text(&raw)
}

pub fn trim_leading_separators(text: &str) -> &str {
    text.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '—' | '–' | '-' | ':' | '.'))
}
