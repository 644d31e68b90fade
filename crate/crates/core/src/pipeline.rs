//! Batch driver: ingest, classify, extract and store a directory of inputs.
//!
//! Documents are processed on a worker pool. Every result is gathered and
//! sorted by document id before anything is written, so outputs do not
//! depend on the number of workers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

use crate::classifier::{classify, extract_features, ClassificationResult, Verdict};
use crate::config::Config;
use crate::extractor::{extract_all, Extraction, Notice};
use crate::ingest::{doc_id_for, load_document, select_pages, InputKind, TextBackend};
use crate::model::Field;
use crate::store::{
    export_json, export_xml, IndexEntry, MemoryStore, RecordStore, SqliteStore, StorageError,
};

pub const XML_FILE: &str = "metadata.xml";
pub const JSON_FILE: &str = "metadata.json";
pub const DB_FILE: &str = "metadata.db";
pub const REVIEW_QUEUE_FILE: &str = "review_queue.jsonl";
pub const CLASSIFICATION_FILE: &str = "classification.jsonl";
pub const NOTICES_FILE: &str = "notices.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Reason code for a second file with an already used document id.
pub const DUPLICATE_DOC_ID: &str = "DuplicateDocId";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input directory {0} does not exist")]
    MissingInput(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Source of timestamps and run durations.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
    /// Seconds elapsed since `start`.
    fn seconds_since(&self, start: Instant) -> f64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn seconds_since(&self, start: Instant) -> f64 {
        start.elapsed().as_secs_f64()
    }
}

/// Always reports the same instant and run duration.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock {
    pub at: DateTime<Utc>,
    pub seconds: f64,
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.at
    }

    fn seconds_since(&self, _start: Instant) -> f64 {
        self.seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub xml: bool,
    pub json: bool,
    pub db: bool,
}

impl Formats {
    pub const ALL: Formats = Formats {
        xml: true,
        json: true,
        db: true,
    };
}

impl Default for Formats {
    fn default() -> Self {
        Formats::ALL
    }
}

impl std::str::FromStr for Formats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let none = Formats {
            xml: false,
            json: false,
            db: false,
        };
        match s.trim() {
            "xml" => Ok(Formats { xml: true, ..none }),
            "json" => Ok(Formats { json: true, ..none }),
            "db" => Ok(Formats { db: true, ..none }),
            "all" => Ok(Formats::ALL),
            other => Err(format!("unknown format `{other}` (xml, json, db, all)")),
        }
    }
}

pub struct PipelineOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub config: Config,
    pub formats: Formats,
    /// Worker threads; 0 means one per available CPU.
    pub workers: usize,
    pub clock: Arc<dyn Clock>,
    pub backend: Arc<dyn TextBackend>,
}

/// One line of the review queue. `field` is `None` for whole-document
/// problems such as unreadable input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueueEntry {
    pub id: String,
    pub field: Option<Field>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub total: usize,
    pub scientific: usize,
    /// Includes `failed`.
    pub unscientific: usize,
    /// Unreadable inputs and duplicate ids, counted as unscientific.
    pub failed: usize,
    pub extracted: usize,
    /// Documents with at least one review-queue entry.
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub input: String,
    /// Input files relative to `input`, sorted.
    pub documents: Vec<String>,
    pub counts: Counts,
    pub wall_clock_seconds: f64,
    /// `extracted * 60 / wall_clock_seconds`; `None` for a zero-length run.
    pub docs_per_minute: Option<f64>,
    pub field_flags: BTreeMap<Field, usize>,
    pub title_mode: String,
    pub classifier_rule: String,
}

impl RunManifest {
    /// Exit status: 2 when anything reached the review queue, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.counts.flagged > 0 {
            2
        } else {
            0
        }
    }
}

enum Outcome {
    Failed {
        reason: &'static str,
        detail: String,
    },
    Classified(ClassificationResult, Option<Box<Extraction>>),
}

struct Processed {
    doc_id: String,
    rel_path: String,
    outcome: Outcome,
}

/// Every `.pdf` and `.spans` file under `dir`, as sorted relative paths.
pub fn discover_inputs(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if !dir.is_dir() {
        return Err(PipelineError::MissingInput(dir.to_path_buf()));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| PipelineError::Io {
            path: e.path().unwrap_or(dir).to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file() && InputKind::of(entry.path()).is_some() {
            out.push(
                entry
                    .path()
                    .strip_prefix(dir)
                    .unwrap_or(entry.path())
                    .to_path_buf(),
            );
        }
    }
    out.sort();
    Ok(out)
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

fn process_one(input: &Path, rel: &Path, config: &Config, backend: &dyn TextBackend) -> Processed {
    let doc_id = doc_id_for(rel);
    let rel_path = rel_string(rel);
    let outcome = match load_document(&input.join(rel), backend) {
        Err(e) => {
            log::warn!("{e}");
            Outcome::Failed {
                reason: e.reason(),
                detail: e.to_string(),
            }
        }
        Ok(mut doc) => {
            doc.doc_id = doc_id.clone();
            let sel = select_pages(&doc, &config.extractor.pages);
            let result = classify(
                extract_features(&sel, &config.extractor.markers),
                config.rule,
            );
            let extraction = (result.verdict == Some(Verdict::Scientific))
                .then(|| Box::new(extract_all(&doc, &config.extractor)));
            Outcome::Classified(result, extraction)
        }
    };
    Processed {
        doc_id,
        rel_path,
        outcome,
    }
}

fn write_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("plain data serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Runs the whole batch and writes every output file into `opts.output`.
pub fn run_pipeline(opts: &PipelineOptions) -> Result<RunManifest, PipelineError> {
    let start = Instant::now();
    let inputs = discover_inputs(&opts.input)?;
    fs::create_dir_all(&opts.output).map_err(io_err(&opts.output))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let mut processed: Vec<Processed> = pool.install(|| {
        inputs
            .par_iter()
            .map(|rel| process_one(&opts.input, rel, &opts.config, opts.backend.as_ref()))
            .collect()
    });
    processed.sort_by(|a, b| (&a.doc_id, &a.rel_path).cmp(&(&b.doc_id, &b.rel_path)));

    let indexed_at = opts.clock.now();
    let mut store = MemoryStore::new();
    let mut queue = Vec::new();
    let mut classifications = Vec::new();
    let mut notices: Vec<Notice> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut counts = Counts {
        total: processed.len(),
        scientific: 0,
        unscientific: 0,
        failed: 0,
        extracted: 0,
        flagged: 0,
    };

    for p in processed {
        if !seen.insert(p.doc_id.clone()) {
            log::warn!("{}: document id `{}` already used", p.rel_path, p.doc_id);
            counts.failed += 1;
            queue.push(QueueEntry {
                id: p.doc_id,
                field: None,
                reason: DUPLICATE_DOC_ID.into(),
            });
            continue;
        }
        match p.outcome {
            Outcome::Failed { reason, detail } => {
                log::debug!("queued {}: {detail}", p.doc_id);
                counts.failed += 1;
                queue.push(QueueEntry {
                    id: p.doc_id,
                    field: None,
                    reason: reason.into(),
                });
            }
            Outcome::Classified(result, extraction) => {
                classifications.push(result);
                let Some(ex) = extraction else {
                    counts.unscientific += 1;
                    continue;
                };
                counts.scientific += 1;
                queue.extend(ex.flags.iter().map(|f| QueueEntry {
                    id: f.doc_id.clone(),
                    field: Some(f.field),
                    reason: f.reason.as_str().into(),
                }));
                notices.extend(ex.notices);
                store.put(IndexEntry::new(ex.record, indexed_at, p.rel_path))?;
                counts.extracted += 1;
            }
        }
    }
    counts.unscientific += counts.failed;
    counts.flagged = queue.iter().map(|q| &q.id).collect::<BTreeSet<_>>().len();

    let out = &opts.output;
    if opts.formats.xml {
        export_xml(&store, &out.join(XML_FILE))?;
    }
    if opts.formats.json {
        export_json(&store, &out.join(JSON_FILE))?;
    }
    if opts.formats.db {
        let path = out.join(DB_FILE);
        match fs::remove_file(&path) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(io_err(&path)(e)),
            _ => {}
        }
        SqliteStore::open(&path)?.put_all(store.entries()?)?;
    }
    write_lines(&out.join(REVIEW_QUEUE_FILE), &queue)?;
    write_lines(&out.join(CLASSIFICATION_FILE), &classifications)?;
    write_lines(&out.join(NOTICES_FILE), &notices)?;

    let mut field_flags: BTreeMap<Field, usize> = Field::ALL.iter().map(|f| (*f, 0)).collect();
    for q in &queue {
        if let Some(f) = q.field {
            *field_flags.entry(f).or_default() += 1;
        }
    }
    let wall_clock_seconds = opts.clock.seconds_since(start);
    let manifest = RunManifest {
        input: opts.input.to_string_lossy().into_owned(),
        documents: inputs.iter().map(|p| rel_string(p)).collect(),
        docs_per_minute: (wall_clock_seconds > 0.0)
            .then(|| counts.extracted as f64 * 60.0 / wall_clock_seconds),
        counts,
        wall_clock_seconds,
        field_flags,
        title_mode: opts.config.extractor.title_mode.to_string(),
        classifier_rule: opts.config.rule.to_string(),
    };
    let manifest_path = out.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}
