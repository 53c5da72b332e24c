//! The `critmt` command line. Each pipeline stage is its own subcommand and
//! stages talk through files, so an interrupted run resumes from the last
//! file written.
//!
//! Exit codes: 0 success, 1 validation or run failure, 2 usage error.

pub mod config;

use std::collections::BTreeSet;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use critmt_core::corpus::{load_corpus, save_corpus, Corpus, CorpusError};
use critmt_core::metrics::{EmbeddingSidecar, ScoreFile};
use critmt_core::pipeline::{
    classify_corpus, extract_discrepancies, translate_corpus, DiscrepancyRule, ResponseCache, RunOptions, StageOutput,
};
use critmt_core::report::{aggregate, ExportFormat};
use critmt_core::review::{export_annotated, read_log, ReviewConfig, ReviewService, SystemClock};
use critmt_core::{ClassifierLabel, SourceLabel};
use critmt_oracles::fixtures::{derived_fixtures, render_fixtures};

use config::Config;

/// Tolerance for the overall-versus-groups consistency check on reports.
pub const REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "critmt", version, about = "Screen, annotate and score critical MT errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fill mt_text through the configured translator
    Translate(StageArgs),
    /// Fill predicted_label through the configured classifier
    Classify(StageArgs),
    /// Keep records whose gold and predicted labels match the discrepancy rule
    Extract(ExtractArgs),
    /// Score MT output against corrected references
    Score(ScoreArgs),
    /// Aggregate a score file per error group
    Report(ReportArgs),
    /// Run the annotation service
    Serve(ServeArgs),
    /// Write the oracle-derived metric fixtures
    GenFixtures {
        #[arg(long)]
        output: PathBuf,
    },
    /// Check a corpus file against the record schema and invariants
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Merge an annotation log into its corpus
    Export(ExportArgs),
}

#[derive(Debug, Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StageArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Response cache directory (overrides the config)
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    /// Concurrent client calls (overrides the config; default 4)
    #[arg(long)]
    workers: Option<usize>,
    /// Redo records that already have output
    #[arg(long)]
    force: bool,
    /// Append per-record call events to this JSONL file
    #[arg(long)]
    run_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Gold labels that trigger (comma separated or repeated)
    #[arg(long, value_delimiter = ',')]
    gold_trigger: Vec<SourceLabel>,
    #[arg(long)]
    predicted_trigger: Option<ClassifierLabel>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Embedding sidecar for BERTScore
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// BERTScore rescale baseline (overrides the sidecar header)
    #[arg(long)]
    baseline: Option<f64>,
    /// Score every record with a reference, not only critical ones
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Score file written by `score`
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// csv, table-text, plot-data or json
    #[arg(long, default_value = "csv")]
    format: ExportFormat,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long)]
    corpus: PathBuf,
    /// Append-only annotation log
    #[arg(long)]
    log: PathBuf,
    /// Idle time after which a lock may be reassigned
    #[arg(long, default_value_t = 1800)]
    lock_timeout_secs: i64,
    /// Only serve these annotator ids (comma separated)
    #[arg(long, value_delimiter = ',')]
    annotators: Vec<String>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

/// A failed command: message for stderr and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn run(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

fn fail<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::run(format!("{context}: {e}"))
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Translate(a) => stage(a, Stage::Translate),
        Command::Classify(a) => stage(a, Stage::Classify),
        Command::Extract(a) => extract(a),
        Command::Score(a) => score(a),
        Command::Report(a) => report(a),
        Command::Serve(a) => serve(a),
        Command::GenFixtures { output } => {
            fs::write(&output, render_fixtures(&derived_fixtures())).map_err(fail(&output.display().to_string()))
        }
        Command::Validate { input } => validate(&input),
        Command::Export(a) => export(a),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(Failure::run),
        None => Ok(Config::default()),
    }
}

fn corpus_failure(path: &Path) -> impl FnOnce(CorpusError) -> Failure + '_ {
    // io errors already name their file
    move |e| match e {
        CorpusError::Io { .. } => Failure::run(e.to_string()),
        other => Failure::run(format!("{}: {other}", path.display())),
    }
}

fn read_corpus(path: &Path) -> Result<Corpus, Failure> {
    load_corpus(path).map_err(corpus_failure(path))
}

fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), Failure> {
    save_corpus(corpus, path).map_err(corpus_failure(path))
}

enum Stage {
    Translate,
    Classify,
}

fn stage(a: StageArgs, which: Stage) -> Result<(), Failure> {
    let config = load_config(a.io.config.as_deref())?;
    let corpus = read_corpus(&a.io.input)?;
    let options = RunOptions {
        workers: a.workers.or(config.workers).unwrap_or(RunOptions::default().workers),
        force: a.force,
        retry: config.retry(),
    };
    let cache_dir = if a.no_cache { None } else { a.cache.or(config.cache_dir.clone()) };
    let cache = cache_dir.map(|d| ResponseCache::open(&d).map_err(fail(&d.display().to_string()))).transpose()?;
    let out: StageOutput = match which {
        Stage::Translate => translate_corpus(&corpus, config.translator().as_ref(), cache.as_ref(), &options),
        Stage::Classify => classify_corpus(&corpus, config.classifier().as_ref(), cache.as_ref(), &options),
    }
    .map_err(fail(&a.io.input.display().to_string()))?;
    if let Some(path) = &a.run_log {
        out.log.append_to(path).map_err(fail(&path.display().to_string()))?;
    }
    write_corpus(&out.corpus, &a.io.output)?;
    if out.failed.is_empty() {
        return Ok(());
    }
    let mut msg = format!("{} record(s) failed and were left out of {}:", out.failed.len(), a.io.output.display());
    for f in &out.failed {
        msg.push_str(&format!("\n  {}: {}", f.id, f.error));
    }
    Err(Failure::run(msg))
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let config = load_config(a.io.config.as_deref())?;
    let base = config.rule().map_err(Failure::run)?;
    let gold: BTreeSet<SourceLabel> =
        if a.gold_trigger.is_empty() { base.gold_trigger().clone() } else { a.gold_trigger.into_iter().collect() };
    let rule = DiscrepancyRule::new(gold, a.predicted_trigger.unwrap_or(base.predicted_trigger()))
        .map_err(|e| Failure::run(e.to_string()))?;
    let corpus = read_corpus(&a.io.input)?;
    let flagged = extract_discrepancies(&corpus, &rule).map_err(fail(&a.io.input.display().to_string()))?;
    write_corpus(&flagged, &a.io.output)?;
    eprintln!("{} of {} records flagged", flagged.len(), corpus.len());
    Ok(())
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let config = load_config(a.io.config.as_deref())?;
    let corpus = read_corpus(&a.io.input)?;
    let sidecar = a
        .embeddings
        .as_deref()
        .map(|p| EmbeddingSidecar::<f64>::load(p).map_err(fail(&p.display().to_string())))
        .transpose()?;
    let baseline = a.baseline.or(sidecar.as_ref().and_then(|s| s.baseline));
    let scorer = config.scorer().map_err(Failure::run)?.with_baseline(baseline).map_err(fail("baseline"))?;
    let selected: Vec<_> = corpus
        .records()
        .iter()
        .filter(|r| if a.all { r.reference_text().is_some() } else { r.critical() == Some(true) })
        .cloned()
        .collect();
    if a.all && selected.len() < corpus.len() {
        eprintln!("{} record(s) without a reference were not scored", corpus.len() - selected.len());
    }
    let records = scorer.score_records(&selected, sidecar.as_ref()).map_err(fail(&a.io.input.display().to_string()))?;
    let file = ScoreFile::new(scorer.settings(), records);
    let mut json = serde_json::to_string_pretty(&file).map_err(fail("score file"))?;
    json.push('\n');
    fs::write(&a.io.output, json).map_err(fail(&a.io.output.display().to_string()))
}

fn report(a: ReportArgs) -> Result<(), Failure> {
    let input = a.input.display().to_string();
    let text = fs::read_to_string(&a.input).map_err(fail(&input))?;
    let file: ScoreFile<f64> = serde_json::from_str(&text).map_err(fail(&input))?;
    let report = aggregate(&file.records, &file.fingerprint).map_err(fail(&input))?;
    report.check_consistency(REPORT_TOLERANCE).map_err(fail(&input))?;
    fs::write(&a.output, report.render(a.format)).map_err(fail(&a.output.display().to_string()))
}

fn validate(input: &Path) -> Result<(), Failure> {
    let corpus = read_corpus(input)?;
    println!("{}: {} records ok", input.display(), corpus.len());
    Ok(())
}

fn export(a: ExportArgs) -> Result<(), Failure> {
    let corpus = read_corpus(&a.corpus)?;
    let events = read_log(&a.log).map_err(fail(&a.log.display().to_string()))?;
    let out = export_annotated(&corpus, &events).map_err(fail(&a.log.display().to_string()))?;
    write_corpus(&out.corpus, &a.output)?;
    for e in &out.exceptions.unknown_records {
        eprintln!("skipped event for unknown record {:?} by {}", e.record_id, e.annotator_id);
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let corpus = read_corpus(&a.corpus)?;
    let config = ReviewConfig {
        lock_timeout: chrono_seconds(a.lock_timeout_secs)?,
        annotators: (!a.annotators.is_empty()).then(|| a.annotators.into_iter().collect()),
    };
    let service = ReviewService::open(corpus, &a.log, config, Box::new(SystemClock))
        .map_err(fail(&a.log.display().to_string()))?;
    let token = std::env::var(critmt_review::TOKEN_ENV).ok();
    let app = critmt_review::router(Arc::new(service), token);
    let addr = SocketAddr::new(a.host, a.port);
    let runtime = tokio::runtime::Runtime::new().map_err(fail("runtime"))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(fail(&addr.to_string()))?;
        let bound = listener.local_addr().map_err(fail(&addr.to_string()))?;
        eprintln!("serving on http://{bound}");
        critmt_review::serve(listener, app).await.map_err(fail("server"))
    })
}

fn chrono_seconds(secs: i64) -> Result<critmt_core::review::Duration, Failure> {
    if secs <= 0 {
        return Err(Failure { code: 2, message: "--lock-timeout-secs must be positive".into() });
    }
    Ok(critmt_core::review::Duration::seconds(secs))
}
