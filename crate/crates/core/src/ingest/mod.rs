//! Turning input files into [`DocumentText`] and choosing the pages the
//! field rules look at.

mod pdf;
mod spans;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DocumentText, ModelError, TextSpan};

pub use pdf::{extract_document_text, LopdfBackend, TextBackend};
pub use spans::{
    load_span_file, parse_span_file, render_span_file, save_span_file, SPAN_FILE_EXTENSION,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: unreadable PDF: {reason}")]
    UnreadablePdf { path: PathBuf, reason: String },
    #[error("{path}: no extractable text")]
    NoTextContent { path: PathBuf },
    #[error("{path}:{line}: malformed span file: {reason}")]
    MalformedSpanFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}: unsupported input type")]
    UnsupportedInput { path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InvalidDocument {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
}

impl IngestError {
    /// Short reason code used in the review queue.
    pub fn reason(&self) -> &'static str {
        match self {
            IngestError::UnreadablePdf { .. } => "UnreadablePdf",
            IngestError::NoTextContent { .. } => "NoTextContent",
            IngestError::MalformedSpanFile { .. } => "MalformedSpanFile",
            IngestError::UnsupportedInput { .. } => "UnsupportedInput",
            IngestError::Io { .. } => "IoError",
            IngestError::InvalidDocument { .. } => "InvalidDocument",
        }
    }
}

/// Kinds of input the pipeline accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Pdf,
    Spans,
}

impl InputKind {
    pub fn of(path: &Path) -> Option<InputKind> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pdf" => Some(InputKind::Pdf),
            SPAN_FILE_EXTENSION => Some(InputKind::Spans),
            _ => None,
        }
    }
}

/// Loads a `.pdf` through `backend` or parses a `.spans` file.
pub fn load_document(path: &Path, backend: &dyn TextBackend) -> Result<DocumentText, IngestError> {
    match InputKind::of(path) {
        Some(InputKind::Pdf) => backend.extract(path),
        Some(InputKind::Spans) => load_span_file(path),
        None => Err(IngestError::UnsupportedInput {
            path: path.to_path_buf(),
        }),
    }
}

/// File name stem, used as the document id.
pub fn doc_id_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// How many trailing pages the conclusion and reference rules see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSelection {
    /// Documents with at most this many pages count as short.
    pub short_doc_max_pages: u32,
    pub short_tail_pages: u32,
    pub long_tail_pages: u32,
}

impl Default for PageSelection {
    fn default() -> Self {
        PageSelection {
            short_doc_max_pages: 7,
            short_tail_pages: 2,
            long_tail_pages: 4,
        }
    }
}

impl PageSelection {
    /// Trailing page numbers for a document of `page_count` pages. Page 1 is
    /// never part of the tail.
    pub fn tail_pages(&self, page_count: u32) -> Vec<u32> {
        let wanted = if page_count <= self.short_doc_max_pages {
            self.short_tail_pages
        } else {
            self.long_tail_pages
        };
        let take = wanted.min(page_count.saturating_sub(1));
        (page_count - take + 1..=page_count).collect()
    }
}

/// The first page and the tail pages of one document.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedText {
    pub doc_id: String,
    pub first_page_spans: Vec<TextSpan>,
    pub tail_spans: Vec<TextSpan>,
    pub tail_page_numbers: Vec<u32>,
}

pub fn select_pages(doc: &DocumentText, selection: &PageSelection) -> SelectedText {
    let tail_page_numbers = selection.tail_pages(doc.page_count);
    let tail_spans = match tail_page_numbers.first() {
        Some(&first) => doc
            .spans
            .iter()
            .filter(|s| s.page >= first)
            .cloned()
            .collect(),
        None => Vec::new(),
    };
    SelectedText {
        doc_id: doc.doc_id.clone(),
        first_page_spans: doc.page_spans(1).to_vec(),
        tail_spans,
        tail_page_numbers,
    }
}
