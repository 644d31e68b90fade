//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_text;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("span {index}: font size must be positive, got {size}")]
    NonPositiveFontSize { index: usize, size: f64 },
    #[error("span {index}: page {page} outside 1..={page_count}")]
    PageOutOfRange {
        index: usize,
        page: u32,
        page_count: u32,
    },
    #[error("span {index}: text is empty after normalization")]
    EmptySpanText { index: usize },
    #[error("page {page}: reading-order position {order} used twice")]
    DuplicateOrder { page: u32, order: u32 },
    #[error("document must have at least one page")]
    NoPages,
    #[error("span {index}: {what} is not finite")]
    NonFinite { index: usize, what: &'static str },
    #[error("field {field}: {reason}")]
    InvalidField { field: Field, reason: &'static str },
    #[error("marker list `{0}` is empty")]
    EmptyMarkerList(&'static str),
    #[error("marker list `{list}` contains `{marker}` twice")]
    DuplicateMarker { list: &'static str, marker: String },
    #[error("unknown field name `{0}`")]
    UnknownField(String),
    #[error("unknown field status `{0}`")]
    UnknownStatus(String),
}

/// One run of text sharing a single font and size on one line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextSpan {
    pub text: String,
    /// 1-based page number.
    pub page: u32,
    /// 0-based reading-order position within the page.
    pub order: u32,
    pub font_name: String,
    /// Points.
    pub font_size: f64,
    pub bold: bool,
    /// Distance from the top of the page; smaller is higher.
    pub baseline_y: f64,
}

impl TextSpan {
    pub fn new(
        text: impl Into<String>,
        page: u32,
        order: u32,
        font_name: impl Into<String>,
        font_size: f64,
    ) -> Self {
        let font_name = font_name.into();
        TextSpan {
            text: text.into(),
            page,
            order,
            bold: font_name_is_bold(&font_name),
            font_name,
            font_size,
            baseline_y: 0.0,
        }
    }

    pub fn with_bold(mut self, bold: bool) -> Self {
        self.bold = bold;
        self
    }

    pub fn with_baseline(mut self, baseline_y: f64) -> Self {
        self.baseline_y = baseline_y;
        self
    }

    /// Same font, size and weight.
    pub fn same_style(&self, other: &TextSpan) -> bool {
        self.font_name == other.font_name
            && sizes_equal(self.font_size, other.font_size)
            && self.bold == other.bold
    }

    /// Spans on one page whose baselines coincide sit on one line.
    pub fn same_line(&self, other: &TextSpan) -> bool {
        self.page == other.page && (self.baseline_y - other.baseline_y).abs() <= LINE_TOLERANCE
    }

    /// `next` is the following line of the same text block: same style and
    /// page, set at most two line heights below this span.
    pub fn continued_by(&self, next: &TextSpan) -> bool {
        let drop = next.baseline_y - self.baseline_y;
        self.page == next.page
            && self.same_style(next)
            && drop > 0.5 * self.font_size
            && drop <= 2.0 * self.font_size
    }
}

/// Font sizes closer than this are considered the same size.
pub const SIZE_TOLERANCE: f64 = 0.05;
const LINE_TOLERANCE: f64 = 0.5;

pub fn sizes_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= SIZE_TOLERANCE
}

/// A font name announces a bold face when it mentions a bold, black or heavy
/// weight, in any case.
pub fn font_name_is_bold(font_name: &str) -> bool {
    let lower = font_name.to_ascii_lowercase();
    ["bold", "black", "heavy"].iter().any(|w| lower.contains(w))
}

/// Every span of one document, sorted by `(page, order)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentText {
    pub doc_id: String,
    pub page_count: u32,
    pub spans: Vec<TextSpan>,
}

impl DocumentText {
    /// Validates the span list and sorts it into reading order.
    pub fn new(
        doc_id: impl Into<String>,
        page_count: u32,
        mut spans: Vec<TextSpan>,
    ) -> Result<Self, ModelError> {
        if page_count == 0 {
            return Err(ModelError::NoPages);
        }
        for (index, span) in spans.iter().enumerate() {
            validate_span(index, span, page_count)?;
        }
        spans.sort_by_key(|s| (s.page, s.order));
        if let Some(w) = spans
            .windows(2)
            .find(|w| w[0].page == w[1].page && w[0].order == w[1].order)
        {
            return Err(ModelError::DuplicateOrder {
                page: w[0].page,
                order: w[0].order,
            });
        }
        Ok(DocumentText {
            doc_id: doc_id.into(),
            page_count,
            spans,
        })
    }

    pub fn page_spans(&self, page: u32) -> &[TextSpan] {
        let start = self.spans.partition_point(|s| s.page < page);
        let end = self.spans.partition_point(|s| s.page <= page);
        &self.spans[start..end]
    }
}

fn validate_span(index: usize, span: &TextSpan, page_count: u32) -> Result<(), ModelError> {
    if !span.font_size.is_finite() {
        return Err(ModelError::NonFinite {
            index,
            what: "font size",
        });
    }
    if !span.baseline_y.is_finite() {
        return Err(ModelError::NonFinite {
            index,
            what: "baseline",
        });
    }
    if span.font_size <= 0.0 {
        return Err(ModelError::NonPositiveFontSize {
            index,
            size: span.font_size,
        });
    }
    if span.page == 0 || span.page > page_count {
        return Err(ModelError::PageOutOfRange {
            index,
            page: span.page,
            page_count,
        });
    }
    if normalize_text(&span.text).is_empty() {
        return Err(ModelError::EmptySpanText { index });
    }
    Ok(())
}

/// Marker phrases delimiting the field windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerConfig {
    pub abstract_markers: Vec<String>,
    pub keywords_markers: Vec<String>,
    pub intro_markers: Vec<String>,
    pub conclusion_markers: Vec<String>,
    pub reference_markers: Vec<String>,
    pub acknowledgment_markers: Vec<String>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for MarkerConfig {
    fn default() -> Self {
        MarkerConfig {
            abstract_markers: strings(&["Abstract", "ABSTRACT"]),
            keywords_markers: strings(&["Keywords", "KEYWORDS", "Index Terms", "INDEX TERMS"]),
            intro_markers: strings(&[
                "I. Intro", "1. Intro", "Intro", "I. INTRO", "1. INTRO", "INTRO",
            ]),
            conclusion_markers: strings(&["Conclusion", "CONCLUSION"]),
            reference_markers: strings(&["Reference", "REFERENCE"]),
            acknowledgment_markers: strings(&[
                "ACKNOWLEDGMENT",
                "Acknowledgement",
                "Acknowledgment",
                "ACKNOWLEDGEMENT",
            ]),
        }
    }
}

impl MarkerConfig {
    pub fn lists(&self) -> [(&'static str, &[String]); 6] {
        [
            ("abstract_markers", &self.abstract_markers),
            ("keywords_markers", &self.keywords_markers),
            ("intro_markers", &self.intro_markers),
            ("conclusion_markers", &self.conclusion_markers),
            ("reference_markers", &self.reference_markers),
            ("acknowledgment_markers", &self.acknowledgment_markers),
        ]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, list) in self.lists() {
            if list.is_empty() {
                return Err(ModelError::EmptyMarkerList(name));
            }
            for (i, m) in list.iter().enumerate() {
                if list[..i].contains(m) {
                    return Err(ModelError::DuplicateMarker {
                        list: name,
                        marker: m.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Whether `marker` belongs to any configured list.
    pub fn contains(&self, marker: &str) -> bool {
        self.lists()
            .iter()
            .any(|(_, l)| l.iter().any(|m| m == marker))
    }
}

/// Position of a marker phrase inside a span list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerHit {
    pub marker: String,
    pub page: u32,
    /// Index into the span list that was searched.
    pub span_index: usize,
    /// Byte offset of the marker within the normalized span text.
    pub char_offset: usize,
}

/// The six extracted metadata fields, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Title,
    Abstract,
    Keywords,
    BodyText,
    Conclusions,
    References,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Title,
        Field::Abstract,
        Field::Keywords,
        Field::BodyText,
        Field::Conclusions,
        Field::References,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Abstract => "abstract",
            Field::Keywords => "keywords",
            Field::BodyText => "body_text",
            Field::Conclusions => "conclusions",
            Field::References => "references",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Long fields are scored by token overlap rather than exact match.
    pub fn is_long(self) -> bool {
        matches!(
            self,
            Field::BodyText | Field::Conclusions | Field::References
        )
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ModelError::UnknownField(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldStatus {
    Extracted,
    Missing,
    Empty,
}

impl FieldStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldStatus::Extracted => "extracted",
            FieldStatus::Missing => "missing",
            FieldStatus::Empty => "empty",
        }
    }
}

impl FromStr for FieldStatus {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "extracted" => Ok(FieldStatus::Extracted),
            "missing" => Ok(FieldStatus::Missing),
            "empty" => Ok(FieldStatus::Empty),
            other => Err(ModelError::UnknownStatus(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldValue {
    pub value: String,
    pub status: FieldStatus,
}

impl FieldValue {
    pub fn extracted(value: impl Into<String>) -> Self {
        FieldValue {
            value: value.into(),
            status: FieldStatus::Extracted,
        }
    }

    pub fn missing() -> Self {
        FieldValue {
            value: String::new(),
            status: FieldStatus::Missing,
        }
    }

    pub fn empty() -> Self {
        FieldValue {
            value: String::new(),
            status: FieldStatus::Empty,
        }
    }

    pub fn is_valid(&self) -> bool {
        match self.status {
            FieldStatus::Extracted => !self.value.is_empty(),
            FieldStatus::Missing | FieldStatus::Empty => self.value.is_empty(),
        }
    }
}

impl Default for FieldValue {
    fn default() -> Self {
        FieldValue::missing()
    }
}

/// The six fields extracted from one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MetadataRecord {
    pub doc_id: String,
    fields: [FieldValue; 6],
}

impl MetadataRecord {
    /// A record with every field missing.
    pub fn new(doc_id: impl Into<String>) -> Self {
        MetadataRecord {
            doc_id: doc_id.into(),
            fields: Default::default(),
        }
    }

    pub fn get(&self, field: Field) -> &FieldValue {
        &self.fields[field.index()]
    }

    pub fn set(&mut self, field: Field, value: FieldValue) {
        self.fields[field.index()] = value;
    }

    pub fn with(mut self, field: Field, value: FieldValue) -> Self {
        self.set(field, value);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (Field, &FieldValue)> {
        Field::ALL.into_iter().zip(self.fields.iter())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in self.iter() {
            if !value.is_valid() {
                let reason = match value.status {
                    FieldStatus::Extracted => "extracted value is empty",
                    _ => "missing or empty field carries a value",
                };
                return Err(ModelError::InvalidField { field, reason });
            }
        }
        Ok(())
    }
}
