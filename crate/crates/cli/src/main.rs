use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use scimeta::classifier::{classify, extract_features, ClassificationResult, Verdict};
use scimeta::config::{Config, CONFIG_ENV};
use scimeta::evaluator::{
    load_truth, parse_foreign_records, run_evaluation, score_classification, EvalError,
    ScoredRecord, Throughput,
};
use scimeta::extractor::{extract_all, TitleMode};
use scimeta::fixtures::{write_corpus, CorpusPlan, Perturbation};
use scimeta::ingest::{doc_id_for, load_document, render_span_file, select_pages, LopdfBackend};
use scimeta::model::Field;
use scimeta::pipeline::{
    discover_inputs, run_pipeline, Formats, PipelineOptions, RunManifest, SystemClock, DB_FILE,
    JSON_FILE, XML_FILE,
};
use scimeta::store::{import_json, import_xml, search, IndexEntry, RecordStore, SqliteStore};

/// Rule-based metadata extraction for scholarly PDFs.
#[derive(Parser)]
#[command(name = "scimeta", version)]
struct Cli {
    /// Config file; falls back to the file named by SCIMETA_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TitleFlags {
    /// Require a bold title (default unless the config says otherwise).
    #[arg(long, conflicts_with = "relaxed_title")]
    strict_title: bool,
    /// Accept a title that is not bold.
    #[arg(long)]
    relaxed_title: bool,
}

impl TitleFlags {
    fn apply(&self, cfg: &mut Config) {
        if self.strict_title {
            cfg.extractor.title_mode = TitleMode::Strict;
        } else if self.relaxed_title {
            cfg.extractor.title_mode = TitleMode::Relaxed;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify, extract and store every .pdf/.spans file under a directory.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "all")]
        format: Formats,
        /// Worker threads (default: one per CPU).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        title: TitleFlags,
    },
    /// Print the classification features and verdict for a file or directory.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Print the text spans read from one document in span-file format.
    Spans {
        #[arg(long)]
        input: PathBuf,
    },
    /// Extract the six fields from one document and print them as JSON.
    Extract {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        title: TitleFlags,
    },
    /// Case-insensitive substring search over a stored export.
    Search {
        /// metadata.json, metadata.xml, metadata.db or a pipeline output directory.
        #[arg(long)]
        input: PathBuf,
        /// Fields to search, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        fields: Vec<Field>,
        query: String,
    },
    /// Score stored or foreign records against a ground-truth file.
    Eval {
        /// A store export, pipeline output directory, or a foreign JSON array with --foreign.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        splits: Vec<usize>,
        /// Treat --input as a JSON array of records with optional fields.
        #[arg(long)]
        foreign: bool,
        /// Where to write the JSON report.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic corpus of .spans files with a truth file.
    Fixtures {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturbations to apply to every document, comma separated.
        #[arg(long, value_delimiter = ',')]
        perturb: Vec<Perturbation>,
        /// Number of non-article documents to add.
        #[arg(long, default_value_t = 0)]
        unscientific: u64,
    },
}

/// `println!` that reports a closed stdout instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)
    };
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        // a reader such as `head` went away; nothing left to say
        Err(e)
            if e.chain().any(|c| {
                c.downcast_ref::<io::Error>()
                    .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            }) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut config = Config::resolve(cli.config.as_deref())
        .with_context(|| format!("loading config (--config or {CONFIG_ENV})"))?;
    match cli.command {
        Command::Pipeline {
            input,
            output,
            format,
            workers,
            title,
        } => {
            title.apply(&mut config);
            let opts = PipelineOptions {
                input,
                output,
                config,
                formats: format,
                workers,
                clock: Arc::new(SystemClock),
                backend: Arc::new(LopdfBackend::default()),
            };
            let manifest = run_pipeline(&opts)?;
            print_summary(&manifest)?;
            Ok(manifest.exit_code() as u8)
        }
        Command::Classify { input } => classify_cmd(&input, &config),
        Command::Spans { input } => {
            let mut doc = load_document(&input, &LopdfBackend::default())?;
            doc.doc_id = doc_id_for(&input);
            write!(io::stdout().lock(), "{}", render_span_file(&doc))?;
            Ok(0)
        }
        Command::Extract { input, title } => {
            title.apply(&mut config);
            extract_cmd(&input, &config)
        }
        Command::Search {
            input,
            fields,
            query,
        } => {
            let fields = if fields.is_empty() {
                Field::ALL.to_vec()
            } else {
                fields
            };
            for hit in search(&open_store(&input)?, &query, &fields) {
                outln!("{}\t{}\t{}", hit.doc_id, hit.field, hit.snippet)?;
            }
            Ok(0)
        }
        Command::Eval {
            input,
            truth,
            splits,
            foreign,
            output,
        } => eval_cmd(&input, &truth, &splits, foreign, output.as_deref(), &config),
        Command::Fixtures {
            output,
            count,
            seed,
            perturb,
            unscientific,
        } => {
            let plan = CorpusPlan {
                seeds: (seed..seed + count).collect(),
                perturbations: perturb.into_iter().collect(),
                unscientific_seeds: (seed..seed + unscientific).collect(),
            };
            let truth = write_corpus(&output, &plan)
                .with_context(|| format!("writing {}", output.display()))?;
            outln!("wrote {} documents to {}", truth.len(), output.display())?;
            Ok(0)
        }
    }
}

fn print_summary(m: &RunManifest) -> io::Result<()> {
    let c = &m.counts;
    outln!(
        "total {}  scientific {}  unscientific {} (failed {})  extracted {}  flagged {}",
        c.total,
        c.scientific,
        c.unscientific,
        c.failed,
        c.extracted,
        c.flagged
    )?;
    match m.docs_per_minute {
        Some(rate) => outln!("{:.2} s, {rate:.1} docs/min", m.wall_clock_seconds),
        None => outln!("{:.2} s", m.wall_clock_seconds),
    }
}

fn inputs_of(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        Ok(discover_inputs(path)?
            .into_iter()
            .map(|p| path.join(p))
            .collect())
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn classify_cmd(input: &Path, config: &Config) -> Result<u8> {
    let backend = LopdfBackend::default();
    let mut code = 0;
    for path in inputs_of(input)? {
        match load_document(&path, &backend) {
            Ok(mut doc) => {
                doc.doc_id = doc_id_for(&path);
                let sel = select_pages(&doc, &config.extractor.pages);
                let result: ClassificationResult = classify(
                    extract_features(&sel, &config.extractor.markers),
                    config.rule,
                );
                outln!("{}", serde_json::to_string(&result)?)?;
            }
            Err(e) => {
                eprintln!("{e}");
                code = 2;
            }
        }
    }
    Ok(code)
}

fn extract_cmd(input: &Path, config: &Config) -> Result<u8> {
    let mut doc = load_document(input, &LopdfBackend::default())?;
    doc.doc_id = doc_id_for(input);
    let ex = extract_all(&doc, &config.extractor);
    let fields: serde_json::Map<String, serde_json::Value> = ex
        .record
        .iter()
        .map(|(f, v)| {
            (
                f.name().to_string(),
                json!({"value": v.value, "status": v.status}),
            )
        })
        .collect();
    let out = json!({
        "id": doc.doc_id,
        "fields": fields,
        "keyword_list": ex.keyword_list,
        "flags": ex.flags,
        "notices": ex.notices,
    });
    outln!("{}", serde_json::to_string_pretty(&out)?)?;
    Ok(if ex.flags.is_empty() { 0 } else { 2 })
}

/// Reads a store export, picking the format from the extension. A directory
/// is searched for the pipeline's export files.
fn open_store(path: &Path) -> Result<Vec<IndexEntry>> {
    let path = if path.is_dir() {
        [JSON_FILE, XML_FILE, DB_FILE]
            .iter()
            .map(|f| path.join(f))
            .find(|p| p.is_file())
            .with_context(|| format!("no store export in {}", path.display()))?
    } else {
        path.to_path_buf()
    };
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default();
    let entries = match ext {
        "json" => import_json(&path)?.entries()?,
        "xml" => import_xml(&path)?.entries()?,
        "db" | "sqlite" => {
            if !path.is_file() {
                bail!("{} does not exist", path.display());
            }
            SqliteStore::open(&path)?.entries()?
        }
        _ => bail!("{}: unknown store format", path.display()),
    };
    Ok(entries)
}

fn eval_cmd(
    input: &Path,
    truth_path: &Path,
    splits: &[usize],
    foreign: bool,
    output: Option<&Path>,
    config: &Config,
) -> Result<u8> {
    let truth = load_truth(truth_path)?;
    let records: Vec<ScoredRecord> = if foreign {
        let text =
            fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        parse_foreign_records(&text)?
    } else {
        open_store(input)?
            .iter()
            .map(|e| ScoredRecord::from(&e.record))
            .collect()
    };
    let mut report = run_evaluation(&records, &truth, splits, config.eval_threshold)?;

    // a pipeline output directory also carries verdicts and timing
    if input.is_dir() {
        let verdicts_path = input.join(scimeta::pipeline::CLASSIFICATION_FILE);
        if let Ok(text) = fs::read_to_string(&verdicts_path) {
            let mut verdicts = Vec::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let r: ClassificationResult = serde_json::from_str(line)
                    .with_context(|| format!("parsing {}", verdicts_path.display()))?;
                verdicts.push((r.doc_id, r.verdict.unwrap_or(Verdict::Unscientific)));
            }
            let known: BTreeSet<&str> = truth.iter().map(|t| t.id.as_str()).collect();
            verdicts.retain(|(id, _)| known.contains(id.as_str()));
            match score_classification(&verdicts, &truth) {
                Ok(acc) => report.classification = Some(acc),
                Err(e @ (EvalError::DegenerateTruthSet(_) | EvalError::EmptySplit)) => {
                    eprintln!("classification accuracy skipped: {e}")
                }
                Err(e) => return Err(e.into()),
            }
        }
        if let Ok(text) = fs::read_to_string(input.join(scimeta::pipeline::MANIFEST_FILE)) {
            let m: serde_json::Value = serde_json::from_str(&text)?;
            let docs = m["counts"]["extracted"].as_u64().unwrap_or(0) as usize;
            let secs = m["wall_clock_seconds"].as_f64().unwrap_or(0.0);
            report.throughput = Throughput::from_run(docs, secs);
        }
    }

    write!(io::stdout().lock(), "{}", report.render_table())?;
    if let Some(out) = output {
        fs::write(out, report.to_json()).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(0)
}
