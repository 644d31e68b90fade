//! JSON export mirroring the XML layout one-to-one.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    format_timestamp, parse_timestamp, IndexEntry, MemoryStore, RecordStore, StorageError,
};
use crate::model::{Field, FieldValue, MetadataRecord};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonArticle {
    id: String,
    title: FieldValue,
    r#abstract: FieldValue,
    keywords: FieldValue,
    body_text: FieldValue,
    conclusions: FieldValue,
    references: FieldValue,
    source: String,
    indexed_at: String,
}

impl From<&IndexEntry> for JsonArticle {
    fn from(e: &IndexEntry) -> Self {
        let get = |f| e.record.get(f).clone();
        JsonArticle {
            id: e.doc_id.clone(),
            title: get(Field::Title),
            r#abstract: get(Field::Abstract),
            keywords: get(Field::Keywords),
            body_text: get(Field::BodyText),
            conclusions: get(Field::Conclusions),
            references: get(Field::References),
            source: e.source_path.clone(),
            indexed_at: format_timestamp(&e.indexed_at),
        }
    }
}

impl JsonArticle {
    fn into_entry(self) -> Result<IndexEntry, StorageError> {
        let indexed_at = parse_timestamp(&self.id, &self.indexed_at)?;
        let record = MetadataRecord::new(self.id.clone())
            .with(Field::Title, self.title)
            .with(Field::Abstract, self.r#abstract)
            .with(Field::Keywords, self.keywords)
            .with(Field::BodyText, self.body_text)
            .with(Field::Conclusions, self.conclusions)
            .with(Field::References, self.references);
        Ok(IndexEntry {
            doc_id: self.id,
            record,
            indexed_at,
            source_path: self.source,
        })
    }
}

/// Pretty-printed with two-space indentation and a trailing newline.
pub fn render_json(entries: &[IndexEntry]) -> Result<String, StorageError> {
    let articles: Vec<JsonArticle> = entries.iter().map(JsonArticle::from).collect();
    let mut out = serde_json::to_string_pretty(&articles)?;
    out.push('\n');
    Ok(out)
}

pub fn parse_json(content: &str) -> Result<MemoryStore, StorageError> {
    let articles: Vec<JsonArticle> = serde_json::from_str(content)?;
    let mut store = MemoryStore::new();
    for a in articles {
        store.put(a.into_entry()?)?;
    }
    Ok(store)
}

pub fn export_json(store: &dyn RecordStore, path: &Path) -> Result<(), StorageError> {
    let json = render_json(&store.entries()?)?;
    fs::write(path, json).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn import_json(path: &Path) -> Result<MemoryStore, StorageError> {
    let content = fs::read_to_string(path).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&content)
}
