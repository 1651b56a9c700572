//! Command-line driver for thematic deviation experiments.
//!
//! Subcommands mirror the pipeline stages so that expensive steps can be
//! reused: `prep` (corpus to bag-of-words), `train` (one model per topic
//! count), `analyze` (divergence records), `report` (tables and plot data),
//! `rank` (most and least diverging articles), `run` (all of the above) and
//! `synth` (synthetic test corpus).
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 bad input data,
//! 3 internal error.

pub mod config;
pub mod manifest;
pub mod tables;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thematic_core::corpus::{load_corpus, load_isot_dir, LoadedCorpus};
use thematic_core::divergence::{read_records, write_records, DivergenceRecord};
use thematic_core::pipeline::{
    self, analyze, assemble_report, filter_counts, make_synthetic, prepare, rank_articles, read_prepared,
    report_from_records, train_models, write_prepared, write_report, ExperimentConfig, ExperimentReport,
    PreparedCorpus, SyntheticSpec,
};
use thematic_core::topicmodel::LdaModel;
use thematic_core::{Error, Label, Metric};

use config::{Config, InputFormat};
use manifest::RunManifest;
use tables::{emit_plot_data, emit_tables, TableOptions};

pub const DEFAULT_OUT: &str = "thematic-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "thematic", version, about = "Opening-vs-remainder thematic deviation in labeled news corpora")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CorpusArgs {
    /// Corpus file, or directory with Fake.csv and True.csv for --format isot
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// jsonl, csv or isot
    #[arg(long)]
    pub format: Option<InputFormat>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    /// Opening lengths, comma separated
    #[arg(long = "l", value_delimiter = ',')]
    pub l: Vec<usize>,
    /// Topic counts, comma separated
    #[arg(long, value_delimiter = ',')]
    pub topics: Vec<usize>,
    /// Metrics (ch, e, se), comma separated
    #[arg(long = "metric", value_delimiter = ',')]
    pub metric: Vec<Metric>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, preprocess, train, analyze and write every report file
    Run {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Preprocess a corpus into prepared.json
    Prep {
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Train one model per topic count from prepared.json
    Train {
        /// Prepared corpus (default: <out>/prepared.json)
        #[arg(long)]
        prepared: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compute divergence records from prepared.json and trained models
    Analyze {
        #[arg(long)]
        prepared: Option<PathBuf>,
        /// Directory holding model-N<n>.json files (default: <out>/models)
        #[arg(long)]
        models: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Aggregates, tests, summary tables and plot data from records.csv
    Report {
        /// Records file (default: <out>/records.csv)
        #[arg(long)]
        records: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Most and least diverging articles per class
    Rank {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long = "metric")]
        metric: Option<Metric>,
        #[arg(long = "l")]
        l: Option<usize>,
        #[arg(long)]
        topics: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Write a synthetic two-vocabulary corpus as JSONL
    Synth {
        #[arg(long, default_value_t = 200)]
        n_per_class: usize,
        #[arg(long, default_value_t = 10)]
        sentences: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::Prep { .. } => "prep",
            Command::Train { .. } => "train",
            Command::Analyze { .. } => "analyze",
            Command::Report { .. } => "report",
            Command::Rank { .. } => "rank",
            Command::Synth { .. } => "synth",
        }
    }
}

/// An error tagged with the stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub source: Error,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.source)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.source)
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_USAGE,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::DictionaryMismatch { .. }
        | Error::Csv(_)
        | Error::Json(_) => EXIT_INPUT,
        Error::Domain(_) => EXIT_INTERNAL,
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for thematic_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError { stage, source })
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn main_with<I, T>(args: I, env: Vec<(String, String)>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, env) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the configuration, applies flags and runs the command in a thread
/// pool sized by `jobs`.
pub fn execute(cli: Cli, env: Vec<(String, String)>) -> Result<(), CliError> {
    let mut config = Config::load(cli.common.config.as_deref(), env).stage("config")?;
    if let Some(seed) = cli.common.seed {
        config.experiment.seed = seed;
    }
    if let Some(jobs) = cli.common.jobs {
        config.experiment.jobs = jobs;
    }
    let out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.experiment.jobs)
        .build()
        .map_err(|e| CliError {
            stage: "startup",
            source: Error::Domain(format!("cannot start worker threads: {e}")),
        })?;
    pool.install(|| dispatch(cli.command, config, &out))
}

fn dispatch(command: Command, mut config: Config, out: &Path) -> Result<(), CliError> {
    match command {
        Command::Run { corpus, grid } => {
            apply_corpus_args(&mut config, &corpus);
            apply_grid(&mut config, &grid);
            cmd_run(&config, out).map(|_| ())
        }
        Command::Prep { corpus } => {
            apply_corpus_args(&mut config, &corpus);
            cmd_prep(&config, out).map(|_| ())
        }
        Command::Train { prepared, grid } => {
            apply_grid(&mut config, &grid);
            cmd_train(&config, prepared.as_deref(), out)
        }
        Command::Analyze { prepared, models, grid } => {
            apply_grid(&mut config, &grid);
            cmd_analyze(&config, prepared.as_deref(), models.as_deref(), out)
        }
        Command::Report { records, grid } => {
            apply_grid(&mut config, &grid);
            cmd_report(&config, records.as_deref(), out, !grid.l.is_empty(), !grid.topics.is_empty()).map(|_| ())
        }
        Command::Rank {
            records,
            metric,
            l,
            topics,
            k,
        } => cmd_rank(&config, records.as_deref(), metric, l, topics, k, out),
        Command::Synth { n_per_class, sentences } => cmd_synth(&config, n_per_class, sentences, out),
    }
}

fn apply_corpus_args(config: &mut Config, args: &CorpusArgs) {
    if let Some(p) = &args.corpus {
        config.corpus.path = Some(p.clone());
    }
    if let Some(f) = args.format {
        config.corpus.format = f;
    }
}

fn apply_grid(config: &mut Config, grid: &GridArgs) {
    if !grid.l.is_empty() {
        config.experiment.l_values = grid.l.clone();
    }
    if !grid.topics.is_empty() {
        config.experiment.n_values = grid.topics.clone();
    }
    if !grid.metric.is_empty() {
        config.experiment.metrics = grid.metric.clone();
    }
}

fn create_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| Error::io(out, e))
        .stage("output")
}

fn corpus_path(config: &Config) -> Result<PathBuf, CliError> {
    config
        .corpus
        .path
        .clone()
        .ok_or_else(|| Error::Config("no corpus given (use --corpus or [corpus] path)".into()))
        .stage("config")
}

fn load(config: &Config) -> Result<LoadedCorpus, CliError> {
    let path = corpus_path(config)?;
    let loaded = match config.corpus.corpus_format() {
        Some(format) => load_corpus(&path, &format),
        None => load_isot_dir(&path),
    }
    .stage("load")?;
    for w in &loaded.warnings {
        log::warn!("{w}");
    }
    log::info!(
        "loaded {} documents ({} fake, {} real)",
        loaded.documents.len(),
        loaded.count(Label::Fake),
        loaded.count(Label::Real)
    );
    Ok(loaded)
}

fn dataset_name(config: &Config) -> String {
    config.report.dataset.clone().unwrap_or_else(|| {
        config
            .corpus
            .path
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".into())
    })
}

fn table_options(config: &Config) -> TableOptions {
    TableOptions {
        dataset: dataset_name(config),
        l: config.report.table_l,
        n_topics: config.report.table_n,
        test: config.stats,
    }
}

/// Writes aggregates, tests, summary tables and plot data; returns the
/// written paths.
fn emit_report_files(config: &Config, report: &ExperimentReport, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    pipeline::write_aggregates(out.join("aggregates.csv"), report).stage("report")?;
    pipeline::write_tests(out.join("tests.csv"), report).stage("report")?;
    written.push(out.join("aggregates.csv"));
    written.push(out.join("tests.csv"));
    let opts = table_options(config);
    written.extend(emit_tables(report, &opts, out).stage("report")?);
    let metric = config.report.plot_metric;
    if report.cells.iter().any(|c| c.metric == metric) {
        let l = config
            .report
            .table_l
            .unwrap_or_else(|| report.cells.iter().map(|c| c.l).max().unwrap_or(1));
        let path = out.join(format!("plot_{}_l{l}.csv", metric.code()));
        emit_plot_data(report, metric, l, &path).stage("report")?;
        written.push(path);
    }
    Ok(written)
}

/// Full pipeline: load, preprocess, train, analyze, report. Writes
/// `records.csv`, `aggregates.csv`, `tests.csv`, `filtered.csv`, the summary
/// tables, plot data, `config.toml` and `manifest.json` into `out`.
pub fn cmd_run(config: &Config, out: &Path) -> Result<ExperimentReport, CliError> {
    let exp = config.experiment();
    exp.validate().stage("config")?;
    let mut manifest = RunManifest::new("run", config);
    let loaded = manifest.time("load", || load(config))?;
    record_corpus_inputs(config, &mut manifest)?;
    create_out(out)?;

    let prepared = manifest.time("prep", || prepare(&loaded.documents, &exp.textprep)).stage("prep")?;
    let models = manifest.time("train", || train_models(&prepared, &exp)).stage("train")?;
    let records = manifest
        .time("analyze", || analyze(&prepared, &models, &exp.l_values, exp.seed))
        .stage("analyze")?;
    let report = manifest.time("report", || assemble_report(&prepared, &exp, records)).stage("report")?;

    write_report(out, &report).stage("report")?;
    let mut written: Vec<PathBuf> = ["records.csv", "filtered.csv"].iter().map(|f| out.join(f)).collect();
    written.extend(emit_report_files(config, &report, out)?);
    let cfg_path = out.join("config.toml");
    std::fs::write(&cfg_path, config.to_toml())
        .map_err(|e| Error::io(&cfg_path, e))
        .stage("report")?;
    written.push(cfg_path);

    if let Some(p) = &report.provenance {
        manifest.corpus_hash = Some(p.corpus_hash.clone());
        manifest.dictionary_hash = Some(p.dictionary_hash.clone());
        manifest.training_seeds = p.training_seeds.clone();
    }
    manifest.add_outputs(&written).stage("manifest")?;
    manifest.write(&out.join("manifest.json")).stage("manifest")?;
    Ok(report)
}

fn record_corpus_inputs(config: &Config, manifest: &mut RunManifest) -> Result<(), CliError> {
    let path = corpus_path(config)?;
    match config.corpus.format {
        InputFormat::Isot => {
            for name in ["Fake.csv", "True.csv"] {
                manifest.add_input(&path.join(name)).stage("load")?;
            }
        }
        _ => manifest.add_input(&path).stage("load")?,
    }
    Ok(())
}

/// Preprocesses the corpus into `<out>/prepared.json`.
pub fn cmd_prep(config: &Config, out: &Path) -> Result<PreparedCorpus, CliError> {
    let mut manifest = RunManifest::new("prep", config);
    let loaded = manifest.time("load", || load(config))?;
    record_corpus_inputs(config, &mut manifest)?;
    create_out(out)?;
    let prepared = manifest
        .time("prep", || prepare(&loaded.documents, &config.textprep))
        .stage("prep")?;
    let path = out.join("prepared.json");
    write_prepared(&path, &prepared).stage("prep")?;
    let counts = filter_counts(&prepared, &config.experiment.l_values).stage("prep")?;
    for c in counts {
        log::info!("l={}: {} kept, {} filtered", c.l, c.kept_fake + c.kept_real, c.filtered());
    }
    manifest.corpus_hash = Some(prepared.corpus_hash.clone());
    manifest.dictionary_hash = Some(prepared.dictionary.content_hash());
    manifest.add_outputs(&[path]).stage("manifest")?;
    manifest.write(&out.join("manifest-prep.json")).stage("manifest")?;
    Ok(prepared)
}

fn model_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("model-N{n}.json"))
}

fn read_prepared_at(path: Option<&Path>, out: &Path, manifest: &mut RunManifest) -> Result<PreparedCorpus, CliError> {
    let path = path.map(Path::to_path_buf).unwrap_or_else(|| out.join("prepared.json"));
    let prepared = read_prepared(&path).stage("load")?;
    manifest.add_input(&path).stage("load")?;
    manifest.corpus_hash = Some(prepared.corpus_hash.clone());
    manifest.dictionary_hash = Some(prepared.dictionary.content_hash());
    Ok(prepared)
}

/// Trains one model per configured topic count into `<out>/models`.
pub fn cmd_train(config: &Config, prepared: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let exp = config.experiment();
    exp.validate().stage("config")?;
    let mut manifest = RunManifest::new("train", config);
    let prepared = read_prepared_at(prepared, out, &mut manifest)?;
    let dir = out.join("models");
    create_out(&dir)?;
    let models = manifest.time("train", || train_models(&prepared, &exp)).stage("train")?;
    let mut written = Vec::new();
    for m in &models {
        let p = model_path(&dir, m.num_topics());
        m.save(&p).stage("train")?;
        written.push(p);
    }
    manifest.training_seeds = exp
        .n_values
        .iter()
        .map(|&n| (n, pipeline::training_seed(exp.seed, n)))
        .collect();
    manifest.add_outputs(&written).stage("manifest")?;
    manifest.write(&out.join("manifest-train.json")).stage("manifest")
}

/// Computes `<out>/records.csv` and `<out>/filtered.csv` from a prepared
/// corpus and saved models.
pub fn cmd_analyze(
    config: &Config,
    prepared: Option<&Path>,
    models: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let exp = config.experiment();
    exp.validate().stage("config")?;
    let mut manifest = RunManifest::new("analyze", config);
    let prepared = read_prepared_at(prepared, out, &mut manifest)?;
    let dir = models.map(Path::to_path_buf).unwrap_or_else(|| out.join("models"));
    let mut loaded = Vec::new();
    for &n in &exp.n_values {
        let p = model_path(&dir, n);
        loaded.push(LdaModel::load(&p, &prepared.dictionary).stage("load")?);
        manifest.add_input(&p).stage("load")?;
    }
    create_out(out)?;
    let records = manifest
        .time("analyze", || analyze(&prepared, &loaded, &exp.l_values, exp.seed))
        .stage("analyze")?;
    let report = assemble_report(&prepared, &exp, records).stage("analyze")?;
    write_records(out.join("records.csv"), &report.records).stage("analyze")?;
    pipeline::write_filtered(out.join("filtered.csv"), &report).stage("analyze")?;
    manifest
        .add_outputs(&[out.join("records.csv"), out.join("filtered.csv")])
        .stage("manifest")?;
    manifest.write(&out.join("manifest-analyze.json")).stage("manifest")
}

fn read_records_at(path: Option<&Path>, out: &Path, manifest: &mut RunManifest) -> Result<Vec<DivergenceRecord>, CliError> {
    let path = path.map(Path::to_path_buf).unwrap_or_else(|| out.join("records.csv"));
    let records = read_records(&path).stage("load")?;
    manifest.add_input(&path).stage("load")?;
    if records.is_empty() {
        return Err(Error::Validation(format!("{} holds no records", path.display()))).stage("load");
    }
    Ok(records)
}

fn distinct(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Rebuilds the report from saved records. The `(l, N)` grid is the one
/// present in the records unless restricted by flags.
pub fn cmd_report(
    config: &Config,
    records: Option<&Path>,
    out: &Path,
    l_given: bool,
    n_given: bool,
) -> Result<ExperimentReport, CliError> {
    let mut manifest = RunManifest::new("report", config);
    let records = read_records_at(records, out, &mut manifest)?;
    let mut exp: ExperimentConfig = config.experiment();
    let ls = distinct(records.iter().map(|r| r.l));
    let ns = distinct(records.iter().map(|r| r.n_topics));
    exp.l_values = if l_given { exp.l_values } else { ls };
    exp.n_values = if n_given { exp.n_values } else { ns };
    if exp.metrics.is_empty() {
        return Err(Error::Config("at least one metric must be selected".into())).stage("config");
    }
    let kept: Vec<DivergenceRecord> = records
        .into_iter()
        .filter(|r| exp.l_values.contains(&r.l) && exp.n_values.contains(&r.n_topics))
        .collect();
    create_out(out)?;
    let report = report_from_records(kept, &exp).stage("report")?;
    let written = emit_report_files(config, &report, out)?;
    manifest.add_outputs(&written).stage("manifest")?;
    manifest.write(&out.join("manifest-report.json")).stage("manifest")?;
    Ok(report)
}

pub const RANK_COLUMNS: [&str; 7] = ["label", "direction", "rank", "doc_id", "value", "l", "N"];

/// Writes `<out>/rank.csv` and prints the lists.
pub fn cmd_rank(
    config: &Config,
    records: Option<&Path>,
    metric: Option<Metric>,
    l: Option<usize>,
    topics: Option<usize>,
    k: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("rank", config);
    let records = read_records_at(records, out, &mut manifest)?;
    let metric = metric.unwrap_or(config.report.plot_metric);
    let k = k.unwrap_or(config.report.rank_k);
    let l = l.unwrap_or_else(|| records.iter().map(|r| r.l).max().unwrap_or(1));
    let n = match topics {
        Some(n) => n,
        None => {
            let ns = distinct(records.iter().filter(|r| r.l == l).map(|r| r.n_topics));
            if ns.len() != 1 {
                return Err(Error::Config(format!(
                    "records hold several topic counts {ns:?}; choose one with --topics"
                )))
                .stage("rank");
            }
            ns[0]
        }
    };
    let cell: Vec<DivergenceRecord> = records
        .into_iter()
        .filter(|r| r.l == l && r.n_topics == n)
        .collect();
    if cell.is_empty() {
        return Err(Error::Validation(format!("no records at l={l}, N={n}"))).stage("rank");
    }
    create_out(out)?;
    let path = out.join("rank.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::from).stage("rank")?;
    w.write_record(RANK_COLUMNS).map_err(Error::from).stage("rank")?;
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    for c in rank_articles(&cell, metric, k) {
        for (direction, list) in [("top", &c.top), ("bottom", &c.bottom)] {
            let _ = writeln!(so, "{} {direction} by {metric} (l={l}, N={n}):", c.label);
            for (i, a) in list.iter().enumerate() {
                let _ = writeln!(so, "  {:>2}. {}  {}", i + 1, a.doc_id, tables::fmt_sig(a.value, 4));
                w.write_record([
                    c.label.to_string(),
                    direction.to_string(),
                    (i + 1).to_string(),
                    a.doc_id.clone(),
                    a.value.to_string(),
                    l.to_string(),
                    n.to_string(),
                ])
                .map_err(Error::from)
                .stage("rank")?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e)).stage("rank")?;
    manifest.add_outputs(&[path]).stage("manifest")?;
    manifest.write(&out.join("manifest-rank.json")).stage("manifest")
}

/// Writes `<out>/synthetic.jsonl`.
pub fn cmd_synth(config: &Config, n_per_class: usize, sentences: usize, out: &Path) -> Result<(), CliError> {
    let docs = make_synthetic(&SyntheticSpec::new(n_per_class, sentences, config.experiment.seed)).stage("synth")?;
    create_out(out)?;
    let path = out.join("synthetic.jsonl");
    write_jsonl(&path, &docs).stage("synth")
}

pub fn write_jsonl(path: &Path, docs: &[thematic_core::Document]) -> thematic_core::Result<()> {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        id: &'a str,
        label: Label,
        text: &'a str,
    }
    let mut s = String::new();
    for d in docs {
        s.push_str(&serde_json::to_string(&Row {
            id: &d.id,
            label: d.label,
            text: &d.text,
        })?);
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
