//! Scoring extracted records and classifier verdicts against ground truth.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::Verdict;
use crate::model::{Field, FieldStatus, FieldValue, MetadataRecord};
use crate::text::normalize_text;

pub const TRUTH_EXTENSION: &str = "truth.jsonl";
pub const DEFAULT_LONG_FIELD_THRESHOLD: f64 = 0.95;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no ground truth for document `{0}`")]
    MissingTruth(String),
    #[error("truth line {line}: {reason}")]
    MalformedTruth { line: usize, reason: String },
    #[error("document `{0}` appears twice in the ground truth")]
    DuplicateTruth(String),
    #[error("ground truth has no {0} documents, so its accuracy term is undefined")]
    DegenerateTruthSet(&'static str),
    #[error("split sizes {splits:?} exceed the {corpus} available records")]
    SplitTooLarge { splits: Vec<usize>, corpus: usize },
    #[error("split size must be positive")]
    EmptySplit,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed records: {0}")]
    MalformedRecords(String),
}

/// Expected values for one document. Empty strings mean "not present".
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthRecord {
    pub id: String,
    pub is_scientific: bool,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub r#abstract: String,
    #[serde(default)]
    pub keywords: String,
    #[serde(default)]
    pub body_text: String,
    #[serde(default)]
    pub conclusions: String,
    #[serde(default)]
    pub references: String,
}

impl GroundTruthRecord {
    pub fn expected(&self, field: Field) -> &str {
        match field {
            Field::Title => &self.title,
            Field::Abstract => &self.r#abstract,
            Field::Keywords => &self.keywords,
            Field::BodyText => &self.body_text,
            Field::Conclusions => &self.conclusions,
            Field::References => &self.references,
        }
    }

    pub fn expected_mut(&mut self, field: Field) -> &mut String {
        match field {
            Field::Title => &mut self.title,
            Field::Abstract => &mut self.r#abstract,
            Field::Keywords => &mut self.keywords,
            Field::BodyText => &mut self.body_text,
            Field::Conclusions => &mut self.conclusions,
            Field::References => &mut self.references,
        }
    }
}

/// One JSON object per line; blank lines are skipped.
pub fn parse_truth(content: &str) -> Result<Vec<GroundTruthRecord>, EvalError> {
    let mut out: Vec<GroundTruthRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: GroundTruthRecord =
            serde_json::from_str(line).map_err(|e| EvalError::MalformedTruth {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if !seen.insert(record.id.clone()) {
            return Err(EvalError::DuplicateTruth(record.id));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn render_truth(records: &[GroundTruthRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("truth records serialize") + "\n")
        .collect()
}

pub fn load_truth(path: &Path) -> Result<Vec<GroundTruthRecord>, EvalError> {
    let content = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_truth(&content)
}

fn fold(s: &str) -> String {
    normalize_text(s).to_lowercase()
}

/// Multiset Jaccard over whitespace tokens of the normalized, lowercased
/// texts: sum of per-token minimum counts over sum of maximum counts.
pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let count = |s: &str| {
        let mut m: HashMap<String, usize> = HashMap::new();
        for t in fold(s).split_whitespace() {
            *m.entry(t.to_string()).or_default() += 1;
        }
        m
    };
    let (ca, cb) = (count(a), count(b));
    let mut inter = 0;
    let mut union = 0;
    for (t, &n) in &ca {
        let m = cb.get(t).copied().unwrap_or(0);
        inter += n.min(m);
        union += n.max(m);
    }
    union += cb
        .iter()
        .filter(|(t, _)| !ca.contains_key(*t))
        .map(|(_, n)| n)
        .sum::<usize>();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Short fields need an exact match after normalization and case folding;
/// long fields need token Jaccard of at least `threshold`. A value that was
/// not extracted is right only when nothing was expected.
pub fn field_correct(extracted: &FieldValue, expected: &str, field: Field, threshold: f64) -> bool {
    if extracted.status != FieldStatus::Extracted {
        return fold(expected).is_empty();
    }
    if field.is_long() {
        token_jaccard(&extracted.value, expected) >= threshold
    } else {
        fold(&extracted.value) == fold(expected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub a1: f64,
    pub a2: f64,
    pub a: f64,
}

/// `preds` pairs each verdict with whether the document truly is scientific.
pub fn classification_accuracy(preds: &[(Verdict, bool)]) -> Result<ClassAccuracy, EvalError> {
    let (mut sci, mut sci_ok, mut unsci, mut unsci_ok) = (0usize, 0usize, 0usize, 0usize);
    for &(verdict, truth) in preds {
        if truth {
            sci += 1;
            sci_ok += usize::from(verdict == Verdict::Scientific);
        } else {
            unsci += 1;
            unsci_ok += usize::from(verdict == Verdict::Unscientific);
        }
    }
    if sci == 0 {
        return Err(EvalError::DegenerateTruthSet("scientific"));
    }
    if unsci == 0 {
        return Err(EvalError::DegenerateTruthSet("unscientific"));
    }
    let a1 = sci_ok as f64 / sci as f64 * 100.0;
    let a2 = unsci_ok as f64 / unsci as f64 * 100.0;
    Ok(ClassAccuracy {
        a1,
        a2,
        a: (a1 + a2) / 2.0,
    })
}

/// Looks up each verdict's truth and scores the classifier.
pub fn score_classification(
    verdicts: &[(String, Verdict)],
    truth: &[GroundTruthRecord],
) -> Result<ClassAccuracy, EvalError> {
    let by_id: HashMap<&str, bool> = truth
        .iter()
        .map(|t| (t.id.as_str(), t.is_scientific))
        .collect();
    let preds = verdicts
        .iter()
        .map(|(id, v)| {
            by_id
                .get(id.as_str())
                .map(|t| (*v, *t))
                .ok_or_else(|| EvalError::MissingTruth(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    classification_accuracy(&preds)
}

/// A record whose fields may be absent, as produced by tools that do not
/// extract every field. Absent fields are not scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredRecord {
    pub doc_id: String,
    pub fields: [Option<FieldValue>; 6],
}

impl From<&MetadataRecord> for ScoredRecord {
    fn from(r: &MetadataRecord) -> Self {
        ScoredRecord {
            doc_id: r.doc_id.clone(),
            fields: Field::ALL.map(|f| Some(r.get(f).clone())),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForeignRecord {
    id: String,
    title: Option<FieldValue>,
    r#abstract: Option<FieldValue>,
    keywords: Option<FieldValue>,
    body_text: Option<FieldValue>,
    conclusions: Option<FieldValue>,
    references: Option<FieldValue>,
    #[serde(default)]
    #[allow(dead_code)]
    source: Option<String>,
    #[serde(default)]
    #[allow(dead_code)]
    indexed_at: Option<String>,
}

/// Reads records in the JSON export layout, where any field may be left
/// out or set to null to mark it as not supported by the producing tool.
pub fn parse_foreign_records(content: &str) -> Result<Vec<ScoredRecord>, EvalError> {
    let raw: Vec<ForeignRecord> =
        serde_json::from_str(content).map_err(|e| EvalError::MalformedRecords(e.to_string()))?;
    Ok(raw
        .into_iter()
        .map(|r| ScoredRecord {
            doc_id: r.id,
            fields: [
                r.title,
                r.r#abstract,
                r.keywords,
                r.body_text,
                r.conclusions,
                r.references,
            ],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub size: usize,
    /// Percent per field, `None` when no record in the split carries it.
    pub accuracy: BTreeMap<Field, Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub docs_per_minute: f64,
    pub seconds_per_doc: f64,
}

impl Throughput {
    pub fn from_run(docs: usize, seconds: f64) -> Option<Throughput> {
        (docs > 0 && seconds > 0.0).then(|| Throughput {
            docs_per_minute: docs as f64 * 60.0 / seconds,
            seconds_per_doc: seconds / docs as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub splits: Vec<SplitReport>,
    /// Simple mean of the split accuracies.
    pub overall: BTreeMap<Field, Option<f64>>,
    pub classification: Option<ClassAccuracy>,
    pub throughput: Option<Throughput>,
}

/// Scores the first `n` records (by document id) for each split size `n`.
pub fn run_evaluation(
    records: &[ScoredRecord],
    truth: &[GroundTruthRecord],
    splits: &[usize],
    threshold: f64,
) -> Result<EvaluationReport, EvalError> {
    if splits.contains(&0) {
        return Err(EvalError::EmptySplit);
    }
    let too_large: Vec<usize> = splits
        .iter()
        .copied()
        .filter(|&s| s > records.len())
        .collect();
    if !too_large.is_empty() {
        return Err(EvalError::SplitTooLarge {
            splits: too_large,
            corpus: records.len(),
        });
    }
    let by_id: HashMap<&str, &GroundTruthRecord> =
        truth.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut sorted: Vec<&ScoredRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    // correctness per record and field, None when the field is not supplied
    let mut scored: Vec<[Option<bool>; 6]> = Vec::with_capacity(sorted.len());
    for r in &sorted {
        let t = by_id
            .get(r.doc_id.as_str())
            .ok_or_else(|| EvalError::MissingTruth(r.doc_id.clone()))?;
        scored.push(Field::ALL.map(|f| {
            r.fields[f.index()]
                .as_ref()
                .map(|v| field_correct(v, t.expected(f), f, threshold))
        }));
    }

    let split_reports: Vec<SplitReport> = splits
        .iter()
        .map(|&size| SplitReport {
            size,
            accuracy: Field::ALL
                .into_iter()
                .map(|f| {
                    let marks: Vec<bool> =
                        scored[..size].iter().filter_map(|s| s[f.index()]).collect();
                    let acc = (!marks.is_empty()).then(|| {
                        marks.iter().filter(|m| **m).count() as f64 / marks.len() as f64 * 100.0
                    });
                    (f, acc)
                })
                .collect(),
        })
        .collect();

    let overall = Field::ALL
        .into_iter()
        .map(|f| {
            let accs: Vec<f64> = split_reports
                .iter()
                .filter_map(|s| s.accuracy[&f])
                .collect();
            (
                f,
                (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64),
            )
        })
        .collect();

    Ok(EvaluationReport {
        splits: split_reports,
        overall,
        classification: None,
        throughput: None,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.2}"))
}

impl EvaluationReport {
    /// Aligned grid with one row per field and one column per split.
    pub fn render_table(&self) -> String {
        let mut header = vec!["field".to_string()];
        header.extend(self.splits.iter().map(|s| format!("n={}", s.size)));
        header.push("overall".into());
        let mut rows = vec![header];
        for f in Field::ALL {
            let mut row = vec![f.name().to_string()];
            row.extend(self.splits.iter().map(|s| cell(s.accuracy[&f])));
            row.push(cell(self.overall[&f]));
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if c == 0 {
                        format!("{v:<w$}", w = widths[c])
                    } else {
                        format!("{v:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(
                out,
                "classification: A1 {:.2}  A2 {:.2}  A {:.2}",
                c.a1, c.a2, c.a
            );
        }
        if let Some(t) = &self.throughput {
            let _ = writeln!(
                out,
                "throughput: {:.1} docs/min, {:.3} s/doc",
                t.docs_per_minute, t.seconds_per_doc
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}
