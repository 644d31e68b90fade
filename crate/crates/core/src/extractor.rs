//! The six field rules.
//!
//! Every rule returns a [`FieldOutcome`]: the field value, at most one review
//! flag (exactly when the value is missing or empty) and at most one notice
//! for recoverable deviations such as a fallback end anchor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::{select_pages, PageSelection, SelectedText};
use crate::model::{
    sizes_equal, DocumentText, Field, FieldStatus, FieldValue, MarkerConfig, MarkerHit,
    MetadataRecord, TextSpan,
};
use crate::text::{join_spans, locate_last_marker, locate_marker, slice_text, Anchor};

/// Whether a non-bold biggest span still counts as a title.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TitleMode {
    #[default]
    Strict,
    Relaxed,
}

impl FromStr for TitleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "strict" => Ok(TitleMode::Strict),
            "relaxed" => Ok(TitleMode::Relaxed),
            other => Err(format!("unknown title mode `{other}` (strict, relaxed)")),
        }
    }
}

impl fmt::Display for TitleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TitleMode::Strict => "strict",
            TitleMode::Relaxed => "relaxed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlagReason {
    MissingStartMarker,
    MissingEndMarker,
    NoTitleCandidate,
    EmptyWindow,
    NotBold,
}

impl FlagReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FlagReason::MissingStartMarker => "MissingStartMarker",
            FlagReason::MissingEndMarker => "MissingEndMarker",
            FlagReason::NoTitleCandidate => "NoTitleCandidate",
            FlagReason::EmptyWindow => "EmptyWindow",
            FlagReason::NotBold => "NotBold",
        }
    }
}

/// A field that needs manual review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFlag {
    pub doc_id: String,
    pub field: Field,
    pub reason: FlagReason,
}

/// Deviations from the plain rules that still produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoticeKind {
    /// Abstract closed at the introduction heading (no keywords section).
    IntroAsEndAnchor,
    /// Body closed at the references heading (no conclusion heading).
    ReferencesAsEndAnchor,
    /// Conclusion ran to the end of the tail pages.
    TailEndAsEndAnchor,
    /// Relaxed mode accepted a title that is not bold.
    TitleNotBold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notice {
    pub doc_id: String,
    pub field: Field,
    pub kind: NoticeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldOutcome {
    pub value: FieldValue,
    pub flag: Option<FlagReason>,
    pub notice: Option<NoticeKind>,
}

impl FieldOutcome {
    fn extracted(text: String, notice: Option<NoticeKind>) -> Self {
        if text.is_empty() {
            return FieldOutcome {
                value: FieldValue::empty(),
                flag: Some(FlagReason::EmptyWindow),
                notice,
            };
        }
        FieldOutcome {
            value: FieldValue::extracted(text),
            flag: None,
            notice,
        }
    }

    fn missing(reason: FlagReason) -> Self {
        FieldOutcome {
            value: FieldValue::missing(),
            flag: Some(reason),
            notice: None,
        }
    }

    pub fn text(&self) -> &str {
        &self.value.value
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub markers: MarkerConfig,
    pub title_mode: TitleMode,
    pub pages: PageSelection,
}

/// Slices a window, treating an inverted range as empty.
fn window(spans: &[TextSpan], from: Anchor<'_>, to: Anchor<'_>, remainder: bool) -> String {
    slice_text(spans, from, to, remainder).unwrap_or_default()
}

fn first_after(spans: &[TextSpan], markers: &[String], hit: &MarkerHit) -> Option<MarkerHit> {
    locate_marker(spans, markers, hit.span_index + 1, spans.len())
}

/// Index range of the title spans within the first page.
///
/// Candidates are the spans before the abstract marker. Among those at the
/// largest size, bold ones win, then the earliest; the pick is extended over
/// the following spans that share its style.
pub fn title_span_range(
    sel: &SelectedText,
    markers: &MarkerConfig,
) -> Option<std::ops::Range<usize>> {
    let first = &sel.first_page_spans;
    let region_end = locate_marker(first, &markers.abstract_markers, 0, first.len())
        .map_or(first.len(), |h| h.span_index);
    let region = &first[..region_end];
    let max = region
        .iter()
        .map(|s| s.font_size)
        .fold(f64::NEG_INFINITY, f64::max);
    let at_max = || (0..region.len()).filter(|&i| sizes_equal(region[i].font_size, max));
    let start = at_max()
        .find(|&i| region[i].bold)
        .or_else(|| at_max().next())?;
    let mut end = start + 1;
    while end < region.len() && region[end].same_style(&region[start]) {
        end += 1;
    }
    Some(start..end)
}

pub fn extract_title(sel: &SelectedText, markers: &MarkerConfig, mode: TitleMode) -> FieldOutcome {
    let Some(range) = title_span_range(sel, markers) else {
        return FieldOutcome::missing(FlagReason::NoTitleCandidate);
    };
    let first = &sel.first_page_spans;
    let page_max = first
        .iter()
        .map(|s| s.font_size)
        .fold(f64::NEG_INFINITY, f64::max);
    let title = &first[range];
    if mode == TitleMode::Strict && !sizes_equal(title[0].font_size, page_max) {
        return FieldOutcome::missing(FlagReason::NoTitleCandidate);
    }
    if !title[0].bold {
        return match mode {
            TitleMode::Strict => FieldOutcome::missing(FlagReason::NotBold),
            TitleMode::Relaxed => {
                FieldOutcome::extracted(join_spans(title), Some(NoticeKind::TitleNotBold))
            }
        };
    }
    FieldOutcome::extracted(join_spans(title), None)
}

pub fn extract_abstract(sel: &SelectedText, markers: &MarkerConfig) -> FieldOutcome {
    let first = &sel.first_page_spans;
    let Some(start) = locate_marker(first, &markers.abstract_markers, 0, first.len()) else {
        return FieldOutcome::missing(FlagReason::MissingStartMarker);
    };
    let (end, notice) = match first_after(first, &markers.keywords_markers, &start) {
        Some(end) => (end, None),
        None => match first_after(first, &markers.intro_markers, &start) {
            Some(end) => (end, Some(NoticeKind::IntroAsEndAnchor)),
            None => return FieldOutcome::missing(FlagReason::MissingEndMarker),
        },
    };
    FieldOutcome::extracted(
        window(first, Anchor::Hit(&start), Anchor::Hit(&end), true),
        notice,
    )
}

pub fn extract_keywords(sel: &SelectedText, markers: &MarkerConfig) -> FieldOutcome {
    let first = &sel.first_page_spans;
    let Some(start) = locate_marker(first, &markers.keywords_markers, 0, first.len()) else {
        return FieldOutcome::missing(FlagReason::MissingStartMarker);
    };
    let Some(end) = first_after(first, &markers.intro_markers, &start) else {
        return FieldOutcome::missing(FlagReason::MissingEndMarker);
    };
    FieldOutcome::extracted(
        window(first, Anchor::Hit(&start), Anchor::Hit(&end), true),
        None,
    )
}

/// Splits a keyword string on commas and semicolons.
pub fn split_keywords(raw: &str) -> Vec<String> {
    raw.split([',', ';'])
        .map(|k| k.trim().trim_end_matches('.').trim())
        .filter(|k| !k.is_empty())
        .map(str::to_string)
        .collect()
}

/// Body text runs over the whole document, since it spans pages the tail
/// selection never loads.
pub fn extract_body_text(doc: &DocumentText, markers: &MarkerConfig) -> FieldOutcome {
    let spans = &doc.spans;
    let Some(start) = locate_marker(spans, &markers.intro_markers, 0, spans.len()) else {
        return FieldOutcome::missing(FlagReason::MissingStartMarker);
    };
    let (end, notice) = match first_after(spans, &markers.conclusion_markers, &start) {
        Some(end) => (end, None),
        None => match first_after(spans, &markers.reference_markers, &start) {
            Some(end) => (end, Some(NoticeKind::ReferencesAsEndAnchor)),
            None => return FieldOutcome::missing(FlagReason::MissingEndMarker),
        },
    };
    FieldOutcome::extracted(
        window(spans, Anchor::Hit(&start), Anchor::Hit(&end), false),
        notice,
    )
}

pub fn extract_conclusion(sel: &SelectedText, markers: &MarkerConfig) -> FieldOutcome {
    let tail = &sel.tail_spans;
    let Some(start) = locate_marker(tail, &markers.conclusion_markers, 0, tail.len()) else {
        return FieldOutcome::missing(FlagReason::MissingStartMarker);
    };
    let reference = first_after(tail, &markers.reference_markers, &start);
    let acknowledgment = first_after(tail, &markers.acknowledgment_markers, &start);
    let end = [reference, acknowledgment]
        .into_iter()
        .flatten()
        .min_by_key(|h| h.span_index);
    let text = match &end {
        Some(end) => window(tail, Anchor::Hit(&start), Anchor::Hit(end), false),
        None => window(tail, Anchor::Hit(&start), Anchor::End, false),
    };
    FieldOutcome::extracted(
        text,
        end.is_none().then_some(NoticeKind::TailEndAsEndAnchor),
    )
}

/// References start at the last reference heading in the tail, since the
/// word can show up earlier in running text or a contents listing.
pub fn extract_references(sel: &SelectedText, markers: &MarkerConfig) -> FieldOutcome {
    let tail = &sel.tail_spans;
    let Some(start) = locate_last_marker(tail, &markers.reference_markers, 0, tail.len()) else {
        return FieldOutcome::missing(FlagReason::MissingStartMarker);
    };
    FieldOutcome::extracted(window(tail, Anchor::Hit(&start), Anchor::End, false), None)
}

/// Everything [`extract_all`] produces for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub record: MetadataRecord,
    pub flags: Vec<ReviewFlag>,
    pub notices: Vec<Notice>,
    /// Keywords split into a list; empty when the field is not extracted.
    pub keyword_list: Vec<String>,
}

pub fn extract_all(doc: &DocumentText, cfg: &ExtractorConfig) -> Extraction {
    let sel = select_pages(doc, &cfg.pages);
    let m = &cfg.markers;
    let outcomes = [
        (Field::Title, extract_title(&sel, m, cfg.title_mode)),
        (Field::Abstract, extract_abstract(&sel, m)),
        (Field::Keywords, extract_keywords(&sel, m)),
        (Field::BodyText, extract_body_text(doc, m)),
        (Field::Conclusions, extract_conclusion(&sel, m)),
        (Field::References, extract_references(&sel, m)),
    ];

    let mut record = MetadataRecord::new(doc.doc_id.clone());
    let mut flags = Vec::new();
    let mut notices = Vec::new();
    let mut keyword_list = Vec::new();
    for (field, outcome) in outcomes {
        if field == Field::Keywords && outcome.value.status == FieldStatus::Extracted {
            keyword_list = split_keywords(outcome.text());
        }
        if let Some(reason) = outcome.flag {
            flags.push(ReviewFlag {
                doc_id: doc.doc_id.clone(),
                field,
                reason,
            });
        }
        if let Some(kind) = outcome.notice {
            notices.push(Notice {
                doc_id: doc.doc_id.clone(),
                field,
                kind,
            });
        }
        record.set(field, outcome.value);
    }
    Extraction {
        record,
        flags,
        notices,
        keyword_list,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ROMAN: &str = "Times-Roman";
    const BOLD: &str = "Times-Bold";

    /// Spans on successive lines of one page.
    fn page(page: u32, items: &[(&str, &str, f64)]) -> Vec<TextSpan> {
        items
            .iter()
            .enumerate()
            .map(|(i, (text, font, size))| {
                TextSpan::new(*text, page, i as u32, *font, *size).with_baseline(20.0 * i as f64)
            })
            .collect()
    }

    fn body(page_no: u32, texts: &[&str]) -> Vec<TextSpan> {
        let items: Vec<_> = texts.iter().map(|t| (*t, ROMAN, 10.0)).collect();
        page(page_no, &items)
    }

    fn first_only(spans: Vec<TextSpan>) -> SelectedText {
        SelectedText {
            doc_id: "d".into(),
            first_page_spans: spans,
            tail_spans: vec![],
            tail_page_numbers: vec![],
        }
    }

    fn tail_only(spans: Vec<TextSpan>) -> SelectedText {
        SelectedText {
            doc_id: "d".into(),
            first_page_spans: vec![],
            tail_spans: spans,
            tail_page_numbers: vec![2],
        }
    }

    fn m() -> MarkerConfig {
        MarkerConfig::default()
    }

    #[test]
    fn title_examples() {
        let spans = page(
            1,
            &[
                ("Deep Parsing", BOLD, 18.0),
                ("J. Doe", ROMAN, 10.0),
                ("Abstract—We study.", ROMAN, 9.0),
            ],
        );
        let out = extract_title(&first_only(spans), &m(), TitleMode::Strict);
        assert_eq!(out.text(), "Deep Parsing");
        assert_eq!(out.flag, None);

        let spans = page(
            1,
            &[
                ("Deep Parsing", ROMAN, 18.0),
                ("J. Doe", ROMAN, 10.0),
                ("Abstract", ROMAN, 9.0),
            ],
        );
        let strict = extract_title(&first_only(spans.clone()), &m(), TitleMode::Strict);
        assert_eq!(strict.value.status, FieldStatus::Missing);
        assert_eq!(strict.flag, Some(FlagReason::NotBold));
        let relaxed = extract_title(&first_only(spans), &m(), TitleMode::Relaxed);
        assert_eq!(relaxed.text(), "Deep Parsing");
        assert_eq!(relaxed.flag, None);
        assert_eq!(relaxed.notice, Some(NoticeKind::TitleNotBold));
    }

    #[test]
    fn multi_line_title_is_joined() {
        let spans = page(
            1,
            &[
                ("Rule Based Metadata", BOLD, 18.0),
                ("Extraction Framework", BOLD, 18.0),
                ("A. Author", ROMAN, 10.0),
                ("Abstract", BOLD, 12.0),
            ],
        );
        let out = extract_title(&first_only(spans), &m(), TitleMode::Strict);
        assert_eq!(out.text(), "Rule Based Metadata Extraction Framework");
    }

    /// Oracle: enumerate maximal runs of consecutive same-style spans, keep
    /// those at the largest size, and take the first bold run (else the first).
    fn title_oracle(spans: &[TextSpan]) -> Option<String> {
        let mut runs: Vec<Vec<&TextSpan>> = Vec::new();
        for s in spans {
            match runs.last_mut() {
                Some(run) if run[0].same_style(s) => run.push(s),
                _ => runs.push(vec![s]),
            }
        }
        let max = spans
            .iter()
            .map(|s| s.font_size)
            .fold(f64::NEG_INFINITY, f64::max);
        let top: Vec<_> = runs
            .into_iter()
            .filter(|r| sizes_equal(r[0].font_size, max))
            .collect();
        let pick = top.iter().find(|r| r[0].bold).or(top.first())?;
        Some(
            pick.iter()
                .map(|s| s.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        )
    }

    proptest! {
        #[test]
        fn title_matches_run_oracle(raw in proptest::collection::vec((0usize..3, prop_oneof![Just(10.0f64), Just(14.0), Just(18.0)], "[a-z]{1,6}"), 1..12)) {
            // Sizes are unique per style so same style means same run identity.
            let fonts = ["Times-Roman", "Times-Bold", "Helvetica-Bold"];
            let spans: Vec<TextSpan> = raw.iter().enumerate().map(|(i, (f, size, text))| {
                TextSpan::new(text.clone(), 1, i as u32, fonts[*f], *size).with_baseline(20.0 * i as f64)
            }).collect();
            let out = extract_title(&first_only(spans.clone()), &m(), TitleMode::Relaxed);
            prop_assert_eq!(Some(out.text().to_string()), title_oracle(&spans));
            // the title is never smaller than any span on the page
            let range = title_span_range(&first_only(spans.clone()), &m()).unwrap();
            prop_assert!(spans.iter().all(|s| s.font_size <= spans[range.start].font_size));
        }
    }

    #[test]
    fn title_without_candidates() {
        let spans = page(1, &[("Abstract", BOLD, 12.0), ("Big", BOLD, 18.0)]);
        let out = extract_title(&first_only(spans), &m(), TitleMode::Strict);
        assert_eq!(out.flag, Some(FlagReason::NoTitleCandidate));
        let out = extract_title(&first_only(vec![]), &m(), TitleMode::Relaxed);
        assert_eq!(out.flag, Some(FlagReason::NoTitleCandidate));
    }

    #[test]
    fn abstract_examples() {
        let sel = first_only(body(1, &["Abstract", "We propose X.", "Keywords: a, b"]));
        assert_eq!(extract_abstract(&sel, &m()).text(), "We propose X.");

        let sel = first_only(body(1, &["Title", "We propose X."]));
        let out = extract_abstract(&sel, &m());
        assert_eq!(
            (out.text(), out.flag),
            ("", Some(FlagReason::MissingStartMarker))
        );

        let sel = first_only(body(1, &["Abstract— We propose X.", "Index Terms—A, B"]));
        assert_eq!(extract_abstract(&sel, &m()).text(), "We propose X.");
    }

    #[test]
    fn abstract_falls_back_to_intro() {
        let sel = first_only(body(
            1,
            &["Abstract", "We propose X.", "1. Introduction", "Text"],
        ));
        let out = extract_abstract(&sel, &m());
        assert_eq!(out.text(), "We propose X.");
        assert_eq!(out.flag, None);
        assert_eq!(out.notice, Some(NoticeKind::IntroAsEndAnchor));

        let sel = first_only(body(1, &["Abstract", "We propose X."]));
        assert_eq!(
            extract_abstract(&sel, &m()).flag,
            Some(FlagReason::MissingEndMarker)
        );

        let sel = first_only(body(1, &["Abstract", "Keywords: x", "Introduction"]));
        let out = extract_abstract(&sel, &m());
        assert_eq!(
            (out.value.status, out.flag),
            (FieldStatus::Empty, Some(FlagReason::EmptyWindow))
        );
    }

    #[test]
    fn keywords_examples() {
        let sel = first_only(body(1, &["Keywords: parsing; indexing", "1. Introduction"]));
        let out = extract_keywords(&sel, &m());
        assert_eq!(out.text(), "parsing; indexing");
        assert_eq!(split_keywords(out.text()), ["parsing", "indexing"]);

        let sel = first_only(body(1, &["Abstract", "x", "1. Introduction"]));
        assert_eq!(
            extract_keywords(&sel, &m()).flag,
            Some(FlagReason::MissingStartMarker)
        );

        let sel = first_only(body(1, &["Index Terms—A, B, C", "I. INTRODUCTION"]));
        assert_eq!(split_keywords(extract_keywords(&sel, &m()).text()).len(), 3);
    }

    proptest! {
        /// The splitter agrees with a char-by-char scan over the separator set.
        #[test]
        fn keyword_split_oracle(raw in "[a-z ,;]{0,40}") {
            let mut expected = Vec::new();
            let mut cur = String::new();
            for c in raw.chars().chain(std::iter::once(',')) {
                if c == ',' || c == ';' {
                    let t = cur.trim().to_string();
                    if !t.is_empty() {
                        expected.push(t);
                    }
                    cur.clear();
                } else {
                    cur.push(c);
                }
            }
            prop_assert_eq!(split_keywords(&raw), expected);
        }
    }

    fn doc(pages: Vec<Vec<TextSpan>>) -> DocumentText {
        let count = pages.len() as u32;
        DocumentText::new("d", count, pages.into_iter().flatten().collect()).unwrap()
    }

    #[test]
    fn body_window_contract() {
        let mut texts: Vec<String> = (0..10).map(|i| format!("pre{i}")).collect();
        texts.push("1. Introduction".into());
        texts.extend((11..500).map(|i| format!("span{i}")));
        texts.push("7. Conclusion".into());
        texts.push("after".into());
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let d = doc(vec![body(1, &refs)]);
        let expected = (11..500)
            .map(|i| format!("span{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        let out = extract_body_text(&d, &m());
        assert_eq!(out.text(), expected);
    }

    #[test]
    fn body_edge_cases() {
        let d = doc(vec![body(1, &["Title", "text"])]);
        assert_eq!(
            extract_body_text(&d, &m()).flag,
            Some(FlagReason::MissingStartMarker)
        );

        let d = doc(vec![body(
            1,
            &[
                "Introduction",
                "we reach a conclusion here",
                "Conclusion",
                "done",
            ],
        )]);
        assert_eq!(
            extract_body_text(&d, &m()).text(),
            "we reach a conclusion here"
        );

        let d = doc(vec![body(
            1,
            &["Introduction", "text", "References", "[1] x"],
        )]);
        let out = extract_body_text(&d, &m());
        assert_eq!(
            (out.text(), out.notice),
            ("text", Some(NoticeKind::ReferencesAsEndAnchor))
        );

        let d = doc(vec![body(1, &["Introduction", "text"])]);
        assert_eq!(
            extract_body_text(&d, &m()).flag,
            Some(FlagReason::MissingEndMarker)
        );
    }

    #[test]
    fn conclusion_examples() {
        let sel = tail_only(body(2, &["7. Conclusion", "We built Y.", "References"]));
        assert_eq!(extract_conclusion(&sel, &m()).text(), "We built Y.");

        let sel = tail_only(body(2, &["text", "References"]));
        assert_eq!(
            extract_conclusion(&sel, &m()).flag,
            Some(FlagReason::MissingStartMarker)
        );

        let sel = tail_only(body(
            2,
            &[
                "Conclusion",
                "We built Y.",
                "Acknowledgment",
                "thanks",
                "References",
                "[1]",
            ],
        ));
        assert_eq!(extract_conclusion(&sel, &m()).text(), "We built Y.");
        let sel = tail_only(body(
            2,
            &[
                "Conclusion",
                "We built Y.",
                "References",
                "[1]",
                "Acknowledgment",
                "thanks",
            ],
        ));
        assert_eq!(extract_conclusion(&sel, &m()).text(), "We built Y.");

        let sel = tail_only(body(2, &["Conclusion", "We built Y.", "more"]));
        let out = extract_conclusion(&sel, &m());
        assert_eq!(
            (out.text(), out.notice),
            ("We built Y. more", Some(NoticeKind::TailEndAsEndAnchor))
        );
    }

    proptest! {
        /// End anchor is the positional minimum over both end-marker kinds.
        #[test]
        fn conclusion_end_is_earliest(kinds in proptest::collection::vec(0u8..3, 1..10)) {
            let mut texts = vec!["Conclusion".to_string()];
            for (i, k) in kinds.iter().enumerate() {
                texts.push(match k {
                    0 => format!("line{i}"),
                    1 => "References".into(),
                    _ => "Acknowledgment".into(),
                });
            }
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let out = extract_conclusion(&tail_only(body(2, &refs)), &m());
            let stop = kinds.iter().position(|k| *k != 0).unwrap_or(kinds.len());
            let expected = (0..stop).map(|i| format!("line{i}")).collect::<Vec<_>>().join("\n");
            prop_assert_eq!(out.text(), crate::text::normalize_text(&expected));
        }
    }

    #[test]
    fn references_examples() {
        let sel = tail_only(body(
            2,
            &["References", "[1] A. Author, 2001.", "[2] B. Author, 2002."],
        ));
        assert_eq!(
            extract_references(&sel, &m()).text(),
            "[1] A. Author, 2001. [2] B. Author, 2002."
        );

        let sel = tail_only(body(2, &["text", "References"]));
        let out = extract_references(&sel, &m());
        assert_eq!(
            (out.value.status, out.flag),
            (FieldStatus::Empty, Some(FlagReason::EmptyWindow))
        );

        let sel = tail_only(body(
            2,
            &["References to prior work", "x", "References", "[1] y"],
        ));
        assert_eq!(extract_references(&sel, &m()).text(), "[1] y");
    }

    fn full_document(with_keywords: bool) -> DocumentText {
        let mut first = vec![
            ("Metadata at Scale", BOLD, 18.0),
            ("A. Author", ROMAN, 10.0),
            ("Abstract", BOLD, 12.0),
            ("We index papers.", ROMAN, 10.0),
        ];
        if with_keywords {
            first.push(("Keywords: metadata, indexing", ROMAN, 10.0));
        }
        first.extend([
            ("1. Introduction", BOLD, 12.0),
            ("Papers are many.", ROMAN, 10.0),
        ]);
        doc(vec![
            page(1, &first),
            body(2, &["More body.", "Still body."]),
            page(
                3,
                &[
                    ("5. Conclusion", BOLD, 12.0),
                    ("It works.", ROMAN, 10.0),
                    ("References", BOLD, 12.0),
                    ("[1] Someone, 1999.", ROMAN, 9.0),
                ],
            ),
        ])
    }

    #[test]
    fn extract_all_happy_path() {
        let out = extract_all(&full_document(true), &ExtractorConfig::default());
        assert!(out.flags.is_empty(), "{:?}", out.flags);
        assert!(out.notices.is_empty());
        let r = &out.record;
        assert_eq!(r.get(Field::Title).value, "Metadata at Scale");
        assert_eq!(r.get(Field::Abstract).value, "We index papers.");
        assert_eq!(r.get(Field::Keywords).value, "metadata, indexing");
        assert_eq!(
            r.get(Field::BodyText).value,
            "Papers are many. More body. Still body."
        );
        assert_eq!(r.get(Field::Conclusions).value, "It works.");
        assert_eq!(r.get(Field::References).value, "[1] Someone, 1999.");
        assert_eq!(out.keyword_list, ["metadata", "indexing"]);
        r.validate().unwrap();
    }

    #[test]
    fn missing_keywords_raises_one_flag() {
        let out = extract_all(&full_document(false), &ExtractorConfig::default());
        assert_eq!(out.flags.len(), 1);
        assert_eq!(out.flags[0].field, Field::Keywords);
        assert_eq!(out.flags[0].reason, FlagReason::MissingStartMarker);
        let extracted = out
            .record
            .iter()
            .filter(|(_, v)| v.status == FieldStatus::Extracted)
            .count();
        assert_eq!(extracted, 5);
        assert_eq!(out.record.get(Field::Keywords).status, FieldStatus::Missing);
    }

    #[test]
    fn rerun_is_identical() {
        let d = full_document(true);
        let cfg = ExtractorConfig::default();
        assert_eq!(extract_all(&d, &cfg), extract_all(&d.clone(), &cfg));
    }

    #[test]
    fn flags_pair_with_non_extracted_statuses() {
        for d in [
            full_document(true),
            full_document(false),
            doc(vec![body(1, &["nothing here"])]),
        ] {
            let out = extract_all(&d, &ExtractorConfig::default());
            for (field, value) in out.record.iter() {
                let flagged = out.flags.iter().filter(|f| f.field == field).count();
                assert_eq!(
                    flagged,
                    usize::from(value.status != FieldStatus::Extracted),
                    "{field}"
                );
            }
        }
    }
}
