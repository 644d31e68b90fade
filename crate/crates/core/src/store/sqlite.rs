//! Single-table SQLite store.

use std::path::Path;

use rusqlite::{params, Connection, OptionalExtension, Row};

use super::{format_timestamp, parse_timestamp, IndexEntry, RecordStore, StorageError};
use crate::model::{Field, FieldStatus, FieldValue, MetadataRecord};

const SCHEMA: &str = "CREATE TABLE IF NOT EXISTS articles (
    doc_id TEXT PRIMARY KEY NOT NULL,
    title TEXT NOT NULL, title_status TEXT NOT NULL,
    abstract TEXT NOT NULL, abstract_status TEXT NOT NULL,
    keywords TEXT NOT NULL, keywords_status TEXT NOT NULL,
    body_text TEXT NOT NULL, body_text_status TEXT NOT NULL,
    conclusions TEXT NOT NULL, conclusions_status TEXT NOT NULL,
    references_ TEXT NOT NULL, references_status TEXT NOT NULL,
    indexed_at TEXT NOT NULL,
    source_path TEXT NOT NULL
)";

const COLUMNS: &str =
    "doc_id, title, title_status, abstract, abstract_status, keywords, keywords_status, \
    body_text, body_text_status, conclusions, conclusions_status, references_, references_status, \
    indexed_at, source_path";

pub struct SqliteStore {
    conn: Connection,
}

impl SqliteStore {
    pub fn open(path: &Path) -> Result<Self, StorageError> {
        Self::with_connection(Connection::open(path)?)
    }

    pub fn in_memory() -> Result<Self, StorageError> {
        Self::with_connection(Connection::open_in_memory()?)
    }

    fn with_connection(conn: Connection) -> Result<Self, StorageError> {
        conn.execute_batch(SCHEMA)?;
        Ok(SqliteStore { conn })
    }

    /// Writes many entries in one transaction.
    pub fn put_all(
        &mut self,
        entries: impl IntoIterator<Item = IndexEntry>,
    ) -> Result<(), StorageError> {
        let tx = self.conn.transaction()?;
        for e in entries {
            insert(&tx, &e)?;
        }
        tx.commit()?;
        Ok(())
    }
}

fn insert(conn: &Connection, e: &IndexEntry) -> Result<(), StorageError> {
    e.validate()?;
    let v = |f: Field| e.record.get(f);
    conn.prepare_cached(&format!(
        "INSERT OR REPLACE INTO articles ({COLUMNS}) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15)"
    ))?
    .execute(params![
        e.doc_id,
        v(Field::Title).value,
        v(Field::Title).status.as_str(),
        v(Field::Abstract).value,
        v(Field::Abstract).status.as_str(),
        v(Field::Keywords).value,
        v(Field::Keywords).status.as_str(),
        v(Field::BodyText).value,
        v(Field::BodyText).status.as_str(),
        v(Field::Conclusions).value,
        v(Field::Conclusions).status.as_str(),
        v(Field::References).value,
        v(Field::References).status.as_str(),
        format_timestamp(&e.indexed_at),
        e.source_path,
    ])?;
    Ok(())
}

type RawRow = (String, [(String, String); 6], String, String);

fn read_row(row: &Row<'_>) -> rusqlite::Result<RawRow> {
    let pair = |i: usize| -> rusqlite::Result<(String, String)> {
        Ok((row.get(1 + 2 * i)?, row.get(2 + 2 * i)?))
    };
    Ok((
        row.get(0)?,
        [pair(0)?, pair(1)?, pair(2)?, pair(3)?, pair(4)?, pair(5)?],
        row.get(13)?,
        row.get(14)?,
    ))
}

fn to_entry((doc_id, fields, indexed_at, source_path): RawRow) -> Result<IndexEntry, StorageError> {
    let mut record = MetadataRecord::new(doc_id.clone());
    for (field, (value, status)) in Field::ALL.into_iter().zip(fields) {
        let status: FieldStatus = status
            .parse()
            .map_err(|e| StorageError::invalid(&doc_id, e))?;
        record.set(field, FieldValue { value, status });
    }
    Ok(IndexEntry {
        indexed_at: parse_timestamp(&doc_id, &indexed_at)?,
        doc_id,
        record,
        source_path,
    })
}

impl RecordStore for SqliteStore {
    fn put(&mut self, entry: IndexEntry) -> Result<(), StorageError> {
        insert(&self.conn, &entry)
    }

    fn get(&self, doc_id: &str) -> Result<Option<IndexEntry>, StorageError> {
        let raw = self
            .conn
            .query_row(
                &format!("SELECT {COLUMNS} FROM articles WHERE doc_id = ?1"),
                [doc_id],
                read_row,
            )
            .optional()?;
        raw.map(to_entry).transpose()
    }

    fn entries(&self) -> Result<Vec<IndexEntry>, StorageError> {
        let mut stmt = self
            .conn
            .prepare(&format!("SELECT {COLUMNS} FROM articles ORDER BY doc_id"))?;
        let rows = stmt.query_map([], read_row)?;
        let mut out = Vec::new();
        for row in rows {
            out.push(to_entry(row?)?);
        }
        // SQLite orders by byte value, which matches Rust string ordering
        Ok(out)
    }
}
