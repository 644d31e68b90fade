//! The `.spans` interchange format.
//!
//! UTF-8 text. The first line is `doc_id<TAB>page_count`; every following
//! line is one span:
//!
//! ```text
//! page<TAB>order<TAB>font_name<TAB>font_size<TAB>bold(0|1)<TAB>baseline_y<TAB>text
//! ```
//!
//! Backslash, tab, newline and carriage return inside string columns are
//! written as `\\`, `\t`, `\n` and `\r`.

use std::fs;
use std::path::Path;

use super::IngestError;
use crate::model::{DocumentText, TextSpan};

pub const SPAN_FILE_EXTENSION: &str = "spans";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

/// Serializes a document. Equal documents give identical bytes.
pub fn render_span_file(doc: &DocumentText) -> String {
    let mut out = format!("{}\t{}\n", escape(&doc.doc_id), doc.page_count);
    for s in &doc.spans {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            s.page,
            s.order,
            escape(&s.font_name),
            s.font_size,
            u8::from(s.bold),
            s.baseline_y,
            escape(&s.text)
        ));
    }
    out
}

pub fn save_span_file(doc: &DocumentText, path: &Path) -> Result<(), IngestError> {
    fs::write(path, render_span_file(doc)).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_span_file(path: &Path) -> Result<DocumentText, IngestError> {
    let content = fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::InvalidData => IngestError::MalformedSpanFile {
            path: path.to_path_buf(),
            line: 0,
            reason: "not valid UTF-8".into(),
        },
        _ => IngestError::Io {
            path: path.to_path_buf(),
            source,
        },
    })?;
    parse_span_file(&content, path)
}

/// Parses span-file content; `path` is only used in error messages.
pub fn parse_span_file(content: &str, path: &Path) -> Result<DocumentText, IngestError> {
    let malformed = |line: usize, reason: String| IngestError::MalformedSpanFile {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = content.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(1, "missing header line".into()))?;
    let (doc_id, page_count) = header
        .split_once('\t')
        .ok_or_else(|| malformed(1, "header must be `doc_id<TAB>page_count`".into()))?;
    let doc_id = unescape(doc_id).map_err(|e| malformed(1, e))?;
    let page_count: u32 = page_count
        .parse()
        .map_err(|_| malformed(1, format!("bad page count `{page_count}`")))?;

    let mut spans = Vec::new();
    let mut line_of_span = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.splitn(7, '\t').collect();
        if cols.len() != 7 {
            return Err(malformed(
                n,
                format!("expected 7 columns, found {}", cols.len()),
            ));
        }
        let page = cols[0]
            .parse()
            .map_err(|_| malformed(n, format!("bad page `{}`", cols[0])))?;
        let order = cols[1]
            .parse()
            .map_err(|_| malformed(n, format!("bad order `{}`", cols[1])))?;
        let font_name = unescape(cols[2]).map_err(|e| malformed(n, e))?;
        let font_size: f64 = cols[3]
            .parse()
            .map_err(|_| malformed(n, format!("bad font size `{}`", cols[3])))?;
        let bold = match cols[4] {
            "0" => false,
            "1" => true,
            other => {
                return Err(malformed(
                    n,
                    format!("bold must be 0 or 1, found `{other}`"),
                ))
            }
        };
        let baseline_y: f64 = cols[5]
            .parse()
            .map_err(|_| malformed(n, format!("bad baseline `{}`", cols[5])))?;
        let text = unescape(cols[6]).map_err(|e| malformed(n, e))?;
        spans.push(TextSpan {
            text,
            page,
            order,
            font_name,
            font_size,
            bold,
            baseline_y,
        });
        line_of_span.push(n);
    }

    DocumentText::new(doc_id, page_count, spans).map_err(|err| {
        use crate::model::ModelError::*;
        let line = match &err {
            NonPositiveFontSize { index, .. }
            | PageOutOfRange { index, .. }
            | EmptySpanText { index }
            | NonFinite { index, .. } => line_of_span[*index],
            _ => 1,
        };
        malformed(line, err.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("t.spans")
    }

    #[test]
    fn fixture_with_three_spans() {
        let src = "paper\t2\n2\t0\tTimes-Roman\t10\t0\t50\tlast\n1\t1\tTimes-Roman\t10\t0\t30\tsecond\n1\t0\tTimes-Bold\t18\t1\t12.5\tTitle\\tTab\n";
        let doc = parse_span_file(src, p()).unwrap();
        assert_eq!(doc.doc_id, "paper");
        assert_eq!(doc.spans.len(), 3);
        assert_eq!(doc.spans[0].text, "Title\tTab");
        assert!(doc.spans[0].bold);
        assert_eq!(doc.spans[2].page, 2);
    }

    #[test]
    fn non_positive_font_size_is_rejected_with_line() {
        let src = "d\t1\n1\t0\tF\t10\t0\t0\tok\n1\t1\tF\t0\t0\t0\tbad\n";
        match parse_span_file(src, p()) {
            Err(IngestError::MalformedSpanFile { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let src = "d\t1\n1\t0\tF\t-2\t0\t0\tbad\n";
        assert!(matches!(
            parse_span_file(src, p()),
            Err(IngestError::MalformedSpanFile { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_lines() {
        for (src, line) in [
            ("", 1),
            ("d\n", 1),
            ("d\tx\n", 1),
            ("d\t1\n1\t0\tF\t10\t0\t0\n", 2),
            ("d\t1\n1\t0\tF\t10\t2\t0\tt\n", 2),
            ("d\t1\n1\t0\tF\t10\t0\t0\tbad\\q\n", 2),
            ("d\t1\n1\tzero\tF\t10\t0\t0\tt\n", 2),
        ] {
            match parse_span_file(src, p()) {
                Err(IngestError::MalformedSpanFile { line: l, .. }) => {
                    assert_eq!(l, line, "{src:?}")
                }
                other => panic!("{src:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn empty_and_single_span_output() {
        let empty = DocumentText::new("e", 1, vec![]).unwrap();
        assert_eq!(render_span_file(&empty), "e\t1\n");
        let one = DocumentText::new("o", 1, vec![TextSpan::new("hi", 1, 0, "F", 9.5)]).unwrap();
        assert_eq!(render_span_file(&one), "o\t1\n1\t0\tF\t9.5\t0\t0\thi\n");
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.spans");
        let doc =
            DocumentText::new("x", 1, vec![TextSpan::new("a\\b\nc", 1, 0, "F\tG", 10.0)]).unwrap();
        save_span_file(&doc, &path).unwrap();
        assert_eq!(load_span_file(&path).unwrap(), doc);
        assert!(matches!(
            load_span_file(&dir.path().join("none.spans")),
            Err(IngestError::Io { .. })
        ));
    }

    pub(crate) fn arb_document() -> impl Strategy<Value = DocumentText> {
        let span = (
            "[\\S&&\\PC]{1,3}[\\PC\\t\\n\\\\]{0,20}",
            1u32..5,
            "[A-Za-z\\-+\\\\\t]{1,16}",
            0.1f64..72.0,
            any::<bool>(),
            -10.0f64..1000.0,
        );
        (
            "[\\PC\\t\\\\]{0,12}",
            4u32..6,
            proptest::collection::vec(span, 0..30),
        )
            .prop_map(|(id, pages, raw)| {
                let mut next = [0u32; 6];
                let spans = raw
                    .into_iter()
                    .map(|(text, page, font, size, bold, y)| {
                        let order = next[page as usize];
                        next[page as usize] += 1;
                        TextSpan {
                            text,
                            page,
                            order,
                            font_name: font,
                            font_size: size,
                            bold,
                            baseline_y: y,
                        }
                    })
                    .collect();
                DocumentText::new(id, pages, spans).expect("generated document is valid")
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(doc in arb_document()) {
            let text = render_span_file(&doc);
            prop_assert_eq!(render_span_file(&doc), text.clone());
            prop_assert_eq!(parse_span_file(&text, p()).unwrap(), doc);
        }
    }
}
