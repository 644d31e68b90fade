//! Synthetic articles in span form with known ground truth.
//!
//! A [`FixtureSpec`] fixes every planted string and layout choice, so
//! [`generate`] is a pure function of it; [`FixtureSpec::random`] draws a
//! spec from a seed. Layout: a bold 18 pt title, 12 pt bold headings and
//! 10 pt body text, with the conclusion and references on the last pages.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{render_truth, GroundTruthRecord};
use crate::ingest::{render_span_file, SPAN_FILE_EXTENSION};
use crate::model::{DocumentText, MarkerConfig, TextSpan};
use crate::text::{match_marker, normalize_text};

pub const TITLE_FONT: (&str, f64) = ("Times-Bold", 18.0);
pub const HEADING_FONT: (&str, f64) = ("Times-Bold", 12.0);
pub const BODY_FONT: (&str, f64) = ("Times-Roman", 10.0);
const AUTHOR_FONT: (&str, f64) = ("Times-Roman", 11.0);
const AFFILIATION_FONT: (&str, f64) = ("Times-Italic", 9.0);
const REFERENCE_FONT: (&str, f64) = ("Times-Roman", 9.0);
const BANNER_FONT: (&str, f64) = ("Times-Roman", 18.0);
const UNBOLD_TITLE_FONT: &str = "Times-Roman";

const LINE_STEP: f64 = 12.0;
const TOP_MARGIN: f64 = 72.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
}

/// Targeted layout defects for robustness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// No keywords line.
    DropKeywords,
    /// Title set in a regular face.
    UnboldTitle,
    /// A regular banner line at the title's size above the title.
    TieTitleSizes,
    /// A body line that starts with the references marker, placed in the
    /// tail before the conclusion.
    DuplicateReferencesMarker,
    /// A body line using the word "conclusion" mid-sentence.
    InlineConclusionWord,
}

impl Perturbation {
    pub const ALL: [Perturbation; 5] = [
        Perturbation::DropKeywords,
        Perturbation::UnboldTitle,
        Perturbation::TieTitleSizes,
        Perturbation::DuplicateReferencesMarker,
        Perturbation::InlineConclusionWord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Perturbation::DropKeywords => "drop_keywords",
            Perturbation::UnboldTitle => "unbold_title",
            Perturbation::TieTitleSizes => "tie_title_sizes",
            Perturbation::DuplicateReferencesMarker => "duplicate_references_marker",
            Perturbation::InlineConclusionWord => "inline_conclusion_word",
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Perturbation::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown perturbation `{s}`"))
    }
}

/// Marker wording used by one fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerChoice {
    pub abstract_marker: String,
    /// `Some(separator)` puts the marker and the first abstract line in one
    /// span, as in `Abstract— We study ...`.
    pub abstract_inline: Option<String>,
    pub keywords_marker: String,
    pub keywords_separator: String,
    pub keyword_delimiter: String,
    /// Section numbering: "arabic", "roman" or "none".
    pub numbering: String,
    pub uppercase_headings: bool,
    pub acknowledgment_marker: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyLine {
    pub text: String,
    pub heading: bool,
}

/// Every string placed in the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedText {
    pub banner: String,
    pub title: String,
    pub authors: String,
    pub affiliation: String,
    pub abstract_lines: Vec<String>,
    pub keywords: Vec<String>,
    /// Body lines following the introduction heading on page 1.
    pub first_page_body: Vec<BodyLine>,
    /// Body lines for each later page up to the conclusion page.
    pub later_body: Vec<Vec<BodyLine>>,
    pub conclusion_lines: Vec<String>,
    pub acknowledgment_lines: Vec<String>,
    pub references: Vec<String>,
    pub inline_conclusion_line: String,
    pub duplicate_references_line: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub doc_id: String,
    pub seed: u64,
    pub page_count: u32,
    /// Put the conclusion heading on the second-to-last page.
    pub conclusion_on_penultimate: bool,
    pub markers: MarkerChoice,
    pub planted: PlantedText,
    pub perturbations: BTreeSet<Perturbation>,
}

const WORDS: &[&str] = &[
    "accurate",
    "adaptive",
    "algorithm",
    "analysis",
    "approach",
    "archive",
    "article",
    "author",
    "automatic",
    "baseline",
    "batch",
    "benchmark",
    "block",
    "boundary",
    "catalog",
    "category",
    "citation",
    "cluster",
    "collection",
    "column",
    "compact",
    "complete",
    "component",
    "corpus",
    "coverage",
    "crawler",
    "dataset",
    "decision",
    "design",
    "detection",
    "digital",
    "document",
    "domain",
    "efficient",
    "element",
    "engine",
    "evidence",
    "extraction",
    "feature",
    "field",
    "filter",
    "font",
    "format",
    "framework",
    "general",
    "graph",
    "header",
    "heuristic",
    "layout",
    "library",
    "linear",
    "line",
    "manual",
    "measure",
    "method",
    "metric",
    "model",
    "module",
    "network",
    "noise",
    "object",
    "output",
    "page",
    "paper",
    "parser",
    "pattern",
    "pipeline",
    "precision",
    "process",
    "publisher",
    "quality",
    "query",
    "random",
    "record",
    "region",
    "repository",
    "result",
    "robust",
    "rule",
    "sample",
    "scale",
    "schema",
    "scholar",
    "search",
    "segment",
    "selection",
    "sequence",
    "server",
    "signal",
    "simple",
    "source",
    "space",
    "span",
    "stable",
    "storage",
    "structure",
    "study",
    "style",
    "summary",
    "system",
    "table",
    "target",
    "task",
    "technique",
    "template",
    "token",
    "tool",
    "topic",
    "training",
    "tree",
    "unit",
    "user",
    "value",
    "vector",
    "venue",
    "volume",
    "weight",
    "window",
    "workflow",
    "year",
];

const KEYWORDS: &[&str] = &[
    "metadata extraction",
    "digital libraries",
    "document analysis",
    "information retrieval",
    "layout analysis",
    "text mining",
    "rule based systems",
    "scholarly data",
    "citation analysis",
    "pdf parsing",
    "indexing",
    "search engines",
    "font features",
    "data curation",
];

const SECTIONS: &[&str] = &[
    "Related Work",
    "Background",
    "Method",
    "System Design",
    "Data Collection",
    "Experiments",
    "Results",
    "Evaluation",
    "Discussion",
    "Limitations",
];

const FIRST_NAMES: &[&str] = &[
    "Ana", "Bilal", "Chen", "Dara", "Emil", "Farah", "Goran", "Hana", "Ivo", "Jun", "Kemal", "Lena",
];
const LAST_NAMES: &[&str] = &[
    "Novak", "Okafor", "Petrov", "Quinn", "Rossi", "Sato", "Tan", "Udeh", "Varga", "Weber",
    "Yilmaz", "Zhou",
];
const SCHOOLS: &[&str] = &[
    "Northfield University",
    "Institute of Informatics",
    "Lakeside College",
    "Technical University of Varna",
];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty list")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn words(rng: &mut ChaCha8Rng, n: usize) -> Vec<&'static str> {
    (0..n).map(|_| pick(rng, WORDS)).collect()
}

/// A line of running text; every few lines a sentence ends.
fn prose_line(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(6..12);
    let mut w: Vec<String> = words(rng, n).into_iter().map(str::to_string).collect();
    w[0] = capitalize(&w[0]);
    let mut line = w.join(" ");
    if rng.random_bool(0.4) {
        line.push_str(&format!(", {}", pick(rng, WORDS)));
    }
    line.push('.');
    line
}

fn prose(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| prose_line(rng)).collect()
}

fn person(rng: &mut ChaCha8Rng) -> (String, String) {
    (
        pick(rng, FIRST_NAMES).to_string(),
        pick(rng, LAST_NAMES).to_string(),
    )
}

fn roman(mut n: usize) -> String {
    let mut out = String::new();
    for (value, digits) in [
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ] {
        while n >= value {
            out.push_str(digits);
            n -= value;
        }
    }
    out
}

impl MarkerChoice {
    fn heading(&self, number: usize, name: &str) -> String {
        let name = if self.uppercase_headings {
            name.to_uppercase()
        } else {
            name.to_string()
        };
        match self.numbering.as_str() {
            "arabic" => format!("{number}. {name}"),
            "roman" => format!("{}. {name}", roman(number)),
            _ => name,
        }
    }
}

impl FixtureSpec {
    /// Draws a complete spec from `seed`.
    pub fn random(seed: u64) -> FixtureSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let page_count = rng.random_range(2..=14u32);

        let numbering = ["arabic", "roman", "none"]
            .choose(&mut rng)
            .expect("non-empty")
            .to_string();
        let uppercase_headings = rng.random_bool(0.4);
        let markers = MarkerChoice {
            abstract_marker: if uppercase_headings {
                "ABSTRACT"
            } else {
                "Abstract"
            }
            .to_string(),
            abstract_inline: rng.random_bool(0.5).then(|| {
                ["— ", "—", ": ", ". ", " - "]
                    .choose(&mut rng)
                    .expect("non-empty")
                    .to_string()
            }),
            keywords_marker: pick(
                &mut rng,
                &["Keywords", "KEYWORDS", "Index Terms", "INDEX TERMS"],
            )
            .to_string(),
            keywords_separator: pick(&mut rng, &[": ", "—", " — ", ". "]).to_string(),
            keyword_delimiter: pick(&mut rng, &[", ", "; "]).to_string(),
            numbering,
            uppercase_headings,
            acknowledgment_marker: rng.random_bool(0.5).then(|| {
                pick(
                    &mut rng,
                    &[
                        "Acknowledgment",
                        "ACKNOWLEDGMENT",
                        "Acknowledgement",
                        "ACKNOWLEDGEMENTS",
                    ],
                )
                .to_string()
            }),
        };

        let title_words = rng.random_range(3..7);
        let title = words(&mut rng, title_words)
            .into_iter()
            .map(capitalize)
            .collect::<Vec<_>>()
            .join(" ");
        let authors = (0..rng.random_range(1..4))
            .map(|_| {
                let (f, l) = person(&mut rng);
                format!("{f} {l}")
            })
            .collect::<Vec<_>>()
            .join(", ");
        let affiliation = format!(
            "Department of {}, {}",
            capitalize(pick(&mut rng, WORDS)),
            pick(&mut rng, SCHOOLS)
        );

        let abstract_len = rng.random_range(2..7);
        let abstract_lines = prose(&mut rng, abstract_len);
        let mut keywords: Vec<String> = Vec::new();
        while keywords.len() < rng.random_range(2..6) {
            let k = pick(&mut rng, KEYWORDS).to_string();
            if !keywords.contains(&k) {
                keywords.push(k);
            }
        }

        let conclusion_on_penultimate = page_count >= 3 && rng.random_bool(0.5);
        let conclusion_page = if conclusion_on_penultimate {
            page_count - 1
        } else {
            page_count
        };
        let first_len = rng.random_range(3..12);
        let first_page_body = prose(&mut rng, first_len)
            .into_iter()
            .map(|text| BodyLine {
                text,
                heading: false,
            })
            .collect();
        let mut section = 2;
        let later_body = (2..=conclusion_page)
            .map(|page| {
                let mut lines = Vec::new();
                if rng.random_bool(0.6) {
                    let name = pick(&mut rng, SECTIONS);
                    lines.push(BodyLine {
                        text: markers.heading(section, name),
                        heading: true,
                    });
                    section += 1;
                }
                let n = if page == conclusion_page {
                    rng.random_range(0..10)
                } else {
                    rng.random_range(15..40)
                };
                lines.extend(prose(&mut rng, n).into_iter().map(|text| BodyLine {
                    text,
                    heading: false,
                }));
                lines
            })
            .collect();

        let conclusion_len = rng.random_range(1..6);
        let conclusion_lines = prose(&mut rng, conclusion_len);
        let acknowledgment_lines = vec![format!(
            "We thank {} for helpful comments on the {}.",
            {
                let (f, l) = person(&mut rng);
                format!("{f} {l}")
            },
            pick(&mut rng, WORDS)
        )];
        let references = (1..=rng.random_range(2..9))
            .map(|i| {
                let (f, l) = person(&mut rng);
                let n = rng.random_range(3..7);
                let t = capitalize(&words(&mut rng, n).join(" "));
                format!(
                    "[{i}] {}. {l}, \"{t},\" in Proc. {} Workshop, {}.",
                    &f[..1],
                    capitalize(pick(&mut rng, WORDS)),
                    rng.random_range(1990..2025)
                )
            })
            .collect();

        let banner = format!(
            "Proceedings of the {} {} Workshop",
            capitalize(pick(&mut rng, WORDS)),
            capitalize(pick(&mut rng, WORDS))
        );
        let inline_conclusion_line = format!(
            "The {} led us to a conclusion about the {} {}.",
            pick(&mut rng, WORDS),
            pick(&mut rng, WORDS),
            pick(&mut rng, WORDS)
        );
        let duplicate_references_line = format!(
            "References to earlier {} work are listed at the end of this {}.",
            pick(&mut rng, WORDS),
            pick(&mut rng, WORDS)
        );

        FixtureSpec {
            doc_id: format!("fx-{seed:06}"),
            seed,
            page_count,
            conclusion_on_penultimate,
            markers,
            planted: PlantedText {
                banner,
                title,
                authors,
                affiliation,
                abstract_lines,
                keywords,
                first_page_body,
                later_body,
                conclusion_lines,
                acknowledgment_lines,
                references,
                inline_conclusion_line,
                duplicate_references_line,
            },
            perturbations: BTreeSet::new(),
        }
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> FixtureSpec {
        self.perturbations.insert(p);
        let suffix: Vec<&str> = self.perturbations.iter().map(|p| p.name()).collect();
        self.doc_id = format!("fx-{:06}-{}", self.seed, suffix.join("-"));
        self
    }

    pub fn has(&self, p: Perturbation) -> bool {
        self.perturbations.contains(&p)
    }

    fn conclusion_page(&self) -> u32 {
        if self.conclusion_on_penultimate {
            self.page_count - 1
        } else {
            self.page_count
        }
    }

    fn validate(&self) -> Result<(), FixtureError> {
        let invalid = |m: String| Err(FixtureError::InvalidSpec(m));
        let p = &self.planted;
        if self.page_count < 2 {
            return invalid(format!("page_count {} is below 2", self.page_count));
        }
        if self.conclusion_on_penultimate && self.page_count < 3 {
            return invalid("conclusion on the penultimate page needs 3 pages".into());
        }
        if p.later_body.len() != self.conclusion_page() as usize - 1 {
            return invalid(format!(
                "{} later body pages for a conclusion on page {}",
                p.later_body.len(),
                self.conclusion_page()
            ));
        }
        if self.doc_id.is_empty() {
            return invalid("empty document id".into());
        }
        for (name, empty) in [
            ("title", p.title.trim().is_empty()),
            ("abstract", p.abstract_lines.is_empty()),
            ("keywords", p.keywords.is_empty()),
            ("body", p.first_page_body.is_empty()),
            ("conclusion", p.conclusion_lines.is_empty()),
            ("references", p.references.is_empty()),
        ] {
            if empty {
                return invalid(format!("{name} is empty"));
            }
        }
        // No planted line may itself start a field window.
        let markers = MarkerConfig::default();
        let all: Vec<String> = markers
            .lists()
            .iter()
            .flat_map(|(_, l)| l.iter().cloned())
            .collect();
        let planted = [
            &p.banner,
            &p.title,
            &p.authors,
            &p.affiliation,
            &p.inline_conclusion_line,
        ]
        .into_iter()
        .chain(&p.abstract_lines)
        .chain(&p.keywords)
        .chain(
            p.first_page_body
                .iter()
                .chain(p.later_body.iter().flatten())
                .map(|l| &l.text),
        )
        .chain(&p.conclusion_lines)
        .chain(&p.acknowledgment_lines)
        .chain(&p.references);
        for line in planted {
            if normalize_text(line).is_empty() {
                return invalid("blank planted line".into());
            }
            if let Some((m, _)) = match_marker(&normalize_text(line), &all) {
                return invalid(format!("planted line `{line}` starts with marker `{m}`"));
            }
        }
        Ok(())
    }
}

struct Line {
    text: String,
    font: &'static str,
    size: f64,
}

fn line(text: impl Into<String>, (font, size): (&'static str, f64)) -> Line {
    Line {
        text: text.into(),
        font,
        size,
    }
}

fn body_lines(lines: &[BodyLine]) -> impl Iterator<Item = Line> + '_ {
    lines.iter().map(|l| {
        line(
            l.text.clone(),
            if l.heading { HEADING_FONT } else { BODY_FONT },
        )
    })
}

fn join(lines: impl IntoIterator<Item = impl AsRef<str>>) -> String {
    normalize_text(
        &lines
            .into_iter()
            .map(|l| l.as_ref().to_string())
            .collect::<Vec<_>>()
            .join(" "),
    )
}

/// Builds the document and its ground truth.
pub fn generate(spec: &FixtureSpec) -> Result<(DocumentText, GroundTruthRecord), FixtureError> {
    spec.validate()?;
    let p = &spec.planted;
    let m = &spec.markers;
    let mut pages: Vec<Vec<Line>> = (0..spec.page_count).map(|_| Vec::new()).collect();
    let mut body_truth: Vec<String> = Vec::new();

    // page 1: front matter
    let first = &mut pages[0];
    if spec.has(Perturbation::TieTitleSizes) {
        first.push(line(p.banner.clone(), BANNER_FONT));
    }
    let title_font = if spec.has(Perturbation::UnboldTitle) {
        (UNBOLD_TITLE_FONT, TITLE_FONT.1)
    } else {
        TITLE_FONT
    };
    first.push(line(p.title.clone(), title_font));
    first.push(line(p.authors.clone(), AUTHOR_FONT));
    first.push(line(p.affiliation.clone(), AFFILIATION_FONT));
    match &m.abstract_inline {
        Some(sep) => {
            first.push(line(
                format!("{}{sep}{}", m.abstract_marker, p.abstract_lines[0]),
                BODY_FONT,
            ));
            first.extend(
                p.abstract_lines[1..]
                    .iter()
                    .map(|l| line(l.clone(), BODY_FONT)),
            );
        }
        None => {
            first.push(line(m.abstract_marker.clone(), HEADING_FONT));
            first.extend(p.abstract_lines.iter().map(|l| line(l.clone(), BODY_FONT)));
        }
    }
    if !spec.has(Perturbation::DropKeywords) {
        first.push(line(
            format!(
                "{}{}{}",
                m.keywords_marker,
                m.keywords_separator,
                p.keywords.join(&m.keyword_delimiter)
            ),
            BODY_FONT,
        ));
    }
    first.push(line(m.heading(1, "Introduction"), HEADING_FONT));
    first.extend(body_lines(&p.first_page_body));
    body_truth.extend(p.first_page_body.iter().map(|l| l.text.clone()));

    // later body pages
    let conclusion_page = spec.conclusion_page() as usize;
    for (i, lines) in p.later_body.iter().enumerate() {
        let page = &mut pages[i + 1];
        page.extend(body_lines(lines));
        body_truth.extend(lines.iter().map(|l| l.text.clone()));
        // the adversarial word goes in the middle of the body
        if i == p.later_body.len() / 2 && spec.has(Perturbation::InlineConclusionWord) {
            page.push(line(p.inline_conclusion_line.clone(), BODY_FONT));
            body_truth.push(p.inline_conclusion_line.clone());
        }
    }
    if p.later_body.is_empty() && spec.has(Perturbation::InlineConclusionWord) {
        pages[0].push(line(p.inline_conclusion_line.clone(), BODY_FONT));
        body_truth.push(p.inline_conclusion_line.clone());
    }

    // conclusion, acknowledgment and references
    let section_count = 1 + p.later_body.iter().flatten().filter(|l| l.heading).count();
    let tail = &mut pages[conclusion_page - 1];
    if spec.has(Perturbation::DuplicateReferencesMarker) {
        tail.push(line(p.duplicate_references_line.clone(), BODY_FONT));
        body_truth.push(p.duplicate_references_line.clone());
    }
    tail.push(line(
        m.heading(section_count + 1, "Conclusion"),
        HEADING_FONT,
    ));
    tail.extend(
        p.conclusion_lines
            .iter()
            .map(|l| line(l.clone(), BODY_FONT)),
    );
    let last = pages.last_mut().expect("at least two pages");
    if let Some(ack) = &m.acknowledgment_marker {
        last.push(line(ack.clone(), HEADING_FONT));
        last.extend(
            p.acknowledgment_lines
                .iter()
                .map(|l| line(l.clone(), BODY_FONT)),
        );
    }
    last.push(line(
        if m.uppercase_headings {
            "REFERENCES"
        } else {
            "References"
        },
        HEADING_FONT,
    ));
    last.extend(p.references.iter().map(|l| line(l.clone(), REFERENCE_FONT)));

    let spans = pages
        .iter()
        .enumerate()
        .flat_map(|(i, lines)| {
            lines.iter().enumerate().map(move |(order, l)| {
                TextSpan::new(l.text.clone(), i as u32 + 1, order as u32, l.font, l.size)
                    .with_baseline(TOP_MARGIN + LINE_STEP * order as f64)
            })
        })
        .collect();
    let doc = DocumentText::new(spec.doc_id.clone(), spec.page_count, spans)
        .map_err(|e| FixtureError::InvalidSpec(e.to_string()))?;

    let truth = GroundTruthRecord {
        id: spec.doc_id.clone(),
        is_scientific: true,
        title: p.title.clone(),
        r#abstract: join(&p.abstract_lines),
        keywords: if spec.has(Perturbation::DropKeywords) {
            String::new()
        } else {
            normalize_text(&p.keywords.join(&m.keyword_delimiter))
        },
        body_text: join(&body_truth),
        conclusions: join(&p.conclusion_lines),
        references: join(&p.references),
    };
    Ok((doc, truth))
}

/// A one- or two-page non-article (a memo) with empty expected fields.
pub fn generate_unscientific(seed: u64) -> (DocumentText, GroundTruthRecord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d656d6f);
    let doc_id = format!("memo-{seed:06}");
    let page_count = rng.random_range(1..=2u32);
    let (f, l) = person(&mut rng);
    let mut spans = vec![
        TextSpan::new("Memorandum", 1, 0, "Helvetica-Bold", 16.0),
        TextSpan::new(format!("To: {f} {l}"), 1, 1, "Helvetica", 11.0).with_baseline(20.0),
    ];
    for page in 1..=page_count {
        let start = if page == 1 { 2 } else { 0 };
        let n = rng.random_range(3..15);
        for (i, text) in prose(&mut rng, n).into_iter().enumerate() {
            let order = start + i as u32;
            spans.push(
                TextSpan::new(text, page, order, "Helvetica", 11.0)
                    .with_baseline(20.0 * order as f64),
            );
        }
    }
    let doc = DocumentText::new(doc_id.clone(), page_count, spans).expect("memo spans are valid");
    let truth = GroundTruthRecord {
        id: doc_id,
        is_scientific: false,
        ..Default::default()
    };
    (doc, truth)
}

/// What [`write_corpus`] should produce.
#[derive(Debug, Clone, Default)]
pub struct CorpusPlan {
    pub seeds: Vec<u64>,
    pub perturbations: BTreeSet<Perturbation>,
    /// Seeds for non-article documents added to the corpus.
    pub unscientific_seeds: Vec<u64>,
}

/// Writes one `.spans` file per document and a `corpus.truth.jsonl` beside
/// them. Returns the truth records in doc-id order.
pub fn write_corpus(
    dir: &Path,
    plan: &CorpusPlan,
) -> Result<Vec<GroundTruthRecord>, std::io::Error> {
    fs::create_dir_all(dir)?;
    let mut truths = Vec::new();
    let mut write = |doc: &DocumentText, truth: GroundTruthRecord| -> std::io::Result<()> {
        fs::write(
            dir.join(format!("{}.{SPAN_FILE_EXTENSION}", doc.doc_id)),
            render_span_file(doc),
        )?;
        truths.push(truth);
        Ok(())
    };
    for &seed in &plan.seeds {
        let mut spec = FixtureSpec::random(seed);
        for &p in &plan.perturbations {
            spec = spec.with_perturbation(p);
        }
        let (doc, truth) = generate(&spec)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
        write(&doc, truth)?;
    }
    for &seed in &plan.unscientific_seeds {
        let (doc, truth) = generate_unscientific(seed);
        write(&doc, truth)?;
    }
    truths.sort_by(|a, b| a.id.cmp(&b.id));
    fs::write(
        dir.join(format!("corpus.{}", crate::evaluator::TRUTH_EXTENSION)),
        render_truth(&truths),
    )?;
    Ok(truths)
}
