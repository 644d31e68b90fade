//! Indexed record storage, XML/JSON export and substring search.

mod json;
mod sqlite;
mod xml;

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::model::{Field, MetadataRecord, ModelError};
use crate::text::normalize_text;

pub use json::{export_json, import_json, parse_json, render_json};
pub use sqlite::SqliteStore;
pub use xml::{export_xml, import_xml, parse_xml, render_xml};

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("database: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("invalid entry `{doc_id}`: {reason}")]
    InvalidEntry { doc_id: String, reason: String },
}

impl StorageError {
    fn invalid(doc_id: &str, reason: impl ToString) -> Self {
        StorageError::InvalidEntry {
            doc_id: doc_id.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// A record keyed by the file name stem of its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub doc_id: String,
    pub record: MetadataRecord,
    pub indexed_at: DateTime<Utc>,
    pub source_path: String,
}

impl IndexEntry {
    pub fn new(
        record: MetadataRecord,
        indexed_at: DateTime<Utc>,
        source_path: impl Into<String>,
    ) -> Self {
        IndexEntry {
            doc_id: record.doc_id.clone(),
            record,
            indexed_at,
            source_path: source_path.into(),
        }
    }

    pub fn validate(&self) -> Result<(), StorageError> {
        if self.doc_id.is_empty() {
            return Err(StorageError::invalid("", "empty document id"));
        }
        if self.record.doc_id != self.doc_id {
            return Err(StorageError::invalid(
                &self.doc_id,
                format!("record id `{}` differs", self.record.doc_id),
            ));
        }
        self.record
            .validate()
            .map_err(|e: ModelError| StorageError::invalid(&self.doc_id, e))
    }
}

/// RFC 3339 with only as many fractional digits as needed, so it parses back
/// to the same instant.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn parse_timestamp(doc_id: &str, s: &str) -> Result<DateTime<Utc>, StorageError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| StorageError::invalid(doc_id, format!("bad timestamp `{s}`: {e}")))
}

/// Key-value storage of index entries. `put` overwrites on equal ids.
pub trait RecordStore {
    fn put(&mut self, entry: IndexEntry) -> Result<(), StorageError>;
    fn get(&self, doc_id: &str) -> Result<Option<IndexEntry>, StorageError>;
    /// Every entry, sorted by document id.
    fn entries(&self) -> Result<Vec<IndexEntry>, StorageError>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryStore {
    entries: BTreeMap<String, IndexEntry>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = IndexEntry>,
    ) -> Result<Self, StorageError> {
        let mut store = MemoryStore::new();
        for e in entries {
            store.put(e)?;
        }
        Ok(store)
    }
}

impl RecordStore for MemoryStore {
    fn put(&mut self, entry: IndexEntry) -> Result<(), StorageError> {
        entry.validate()?;
        self.entries.insert(entry.doc_id.clone(), entry);
        Ok(())
    }

    fn get(&self, doc_id: &str) -> Result<Option<IndexEntry>, StorageError> {
        Ok(self.entries.get(doc_id).cloned())
    }

    fn entries(&self) -> Result<Vec<IndexEntry>, StorageError> {
        Ok(self.entries.values().cloned().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub doc_id: String,
    pub field: Field,
    pub snippet: String,
}

pub const SNIPPET_CHARS: usize = 80;

/// Lowercases one char when that gives exactly one char, keeping offsets
/// aligned with the original.
fn fold(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// Char index of the first case-insensitive occurrence of `query`.
fn find_folded(haystack: &[char], query: &[char]) -> Option<usize> {
    if query.len() > haystack.len() {
        return None;
    }
    (0..=haystack.len() - query.len()).find(|&i| {
        haystack[i..i + query.len()]
            .iter()
            .map(|c| fold(*c))
            .eq(query.iter().copied())
    })
}

fn snippet(chars: &[char], at: usize, len: usize) -> String {
    let center = at + len / 2;
    let end = (center.saturating_sub(SNIPPET_CHARS / 2) + SNIPPET_CHARS).min(chars.len());
    let start = end.saturating_sub(SNIPPET_CHARS);
    chars[start..end].iter().collect()
}

/// Linear scan over every entry. An empty query matches nothing.
pub fn search(entries: &[IndexEntry], query: &str, fields: &[Field]) -> Vec<SearchHit> {
    let query: Vec<char> = normalize_text(query).chars().map(fold).collect();
    if query.is_empty() {
        return Vec::new();
    }
    let mut hits = Vec::new();
    for entry in entries {
        for (field, value) in entry.record.iter() {
            if !fields.contains(&field) {
                continue;
            }
            let chars: Vec<char> = normalize_text(&value.value).chars().collect();
            if let Some(at) = find_folded(&chars, &query) {
                hits.push(SearchHit {
                    doc_id: entry.doc_id.clone(),
                    field,
                    snippet: snippet(&chars, at, query.len()),
                });
            }
        }
    }
    hits.sort_by(|a, b| (&a.doc_id, a.field).cmp(&(&b.doc_id, b.field)));
    hits
}
