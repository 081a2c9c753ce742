//! Command-line front end: descriptor extraction, experiment sweeps,
//! plot-data export and kernel-matrix dumps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    load_csv, BalancePolicy, FeatureColumns, LabelMapping, LabeledDataset, LoadOptions, LoadReport,
};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, Branch, CellConfig, ExperimentSummary, Protocol};
use crate::features::{Pipeline, Selector};
use crate::qkernel::{gram_matrix, qkm, FeatureMapSpec, KernelMode};
use crate::smiles::{descriptors_for, DESCRIPTOR_NAMES};
use crate::svm::{Grid, SmoParams};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_PARTIAL: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qvscreen",
    version,
    about = "Quantum-kernel vs classical SVC virtual screening"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append the 16 native SMILES descriptors to a CSV.
    Descriptors(DescriptorsArgs),
    /// Run every (selector, feature count, branch) cell of an experiment config.
    Run(RunArgs),
    /// Extract (n_features, branch, mean, std) rows from a results CSV.
    Plotdata(PlotdataArgs),
    /// Dump a quantum-kernel Gram matrix in QKM1 format.
    Kernel(KernelArgs),
}

#[derive(Debug, Args)]
pub struct DescriptorsArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value = "smiles")]
    pub smiles_column: String,
    /// Defaults to `<output>.rejects.csv`.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    pub results: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub selector: Selector,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    #[arg(long)]
    pub id_column: Option<String>,
    #[arg(long)]
    pub smiles_column: Option<String>,
    #[arg(long, default_value = "pca")]
    pub selector: Selector,
    #[arg(long)]
    pub n_features: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Sampled mode with this many shots; exact when absent.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_psd_repair: bool,
    /// Upper end of the angle interval.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub angle_max: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the matrix as plain CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl std::str::FromStr for Selector {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pca" => Ok(Selector::Pca),
            "anova" => Ok(Selector::Anova),
            other => Err(format!(
                "unknown selector \"{other}\" (expected pca or anova)"
            )),
        }
    }
}

/// A full experiment matrix: one dataset, every selector × feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name written to the `target` column of results.
    pub target: String,
    /// Relative paths resolve against the config file's directory.
    pub dataset: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub smiles_column: Option<String>,
    #[serde(default)]
    pub feature_columns: FeatureColumns,
    #[serde(default)]
    pub labels: LabelMapping,
    pub selectors: Vec<Selector>,
    pub feature_counts: Vec<usize>,
    #[serde(default = "all_branches")]
    pub branches: Vec<Branch>,
    #[serde(default = "exact")]
    pub mode: KernelMode,
    #[serde(default = "two")]
    pub depth: usize,
    #[serde(default = "ten")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "five")]
    pub cv_folds: usize,
    #[serde(default)]
    pub balance: BalancePolicy,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub balance_after_split: bool,
    #[serde(default = "yes")]
    pub psd_repair: bool,
    #[serde(default)]
    pub smo: SmoParams,
    #[serde(default = "pi")]
    pub angle_max: f64,
    #[serde(default = "results_dir")]
    pub output_dir: PathBuf,
}

fn all_branches() -> Vec<Branch> {
    Branch::ALL.to_vec()
}
fn exact() -> KernelMode {
    KernelMode::Exact
}
fn two() -> usize {
    2
}
fn five() -> usize {
    5
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}
fn pi() -> f64 {
    std::f64::consts::PI
}
fn results_dir() -> PathBuf {
    PathBuf::from("results")
}

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(
                if path == "." { "<root>".into() } else { path },
                e.into_inner().to_string(),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            label_column: self.label_column.clone(),
            feature_columns: self.feature_columns.clone(),
            id_column: self.id_column.clone(),
            smiles_column: self.smiles_column.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Checks that need no data. `available` is the dataset's feature count
    /// when known.
    pub fn validate(&self, available: Option<usize>) -> Result<()> {
        if self.selectors.is_empty() {
            return Err(config_err("selectors", "at least one selector required"));
        }
        if self.feature_counts.is_empty() {
            return Err(config_err(
                "feature_counts",
                "at least one feature count required",
            ));
        }
        for (i, &n) in self.feature_counts.iter().enumerate() {
            if n == 0 {
                return Err(config_err(format!("feature_counts[{i}]"), "must be >= 1"));
            }
            if let Some(avail) = available.filter(|&a| n > a) {
                return Err(config_err(
                    format!("feature_counts[{i}]"),
                    format!("{n} features requested but the dataset has {avail} feature columns"),
                ));
            }
        }
        if self.branches.is_empty() {
            return Err(config_err("branches", "at least one branch required"));
        }
        if self.mode.shots() == Some(0) {
            return Err(config_err("mode.shots", "must be >= 1"));
        }
        if self.repeats == 0 {
            return Err(config_err("repeats", "must be >= 1"));
        }
        if self.depth == 0 {
            return Err(config_err("depth", "must be >= 1"));
        }
        if let Some(i) = self
            .grid
            .c
            .iter()
            .position(|c| !(*c > 0.0 && c.is_finite()))
        {
            return Err(config_err(
                format!("grid.c[{i}]"),
                "must be a positive number",
            ));
        }
        for n in &self.feature_counts {
            for &s in &self.selectors {
                self.cell(s, *n)
                    .validate()
                    .map_err(|e| config_err("<cell>", e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn cell(&self, selector: Selector, n_features: usize) -> CellConfig {
        CellConfig {
            selector,
            n_features,
            branches: self.branches.clone(),
            mode: self.mode,
            depth: self.depth,
            repeats: self.repeats,
            master_seed: self.master_seed,
            grid: self.grid.clone(),
            cv_folds: self.cv_folds,
            balance: self.balance.clone(),
            protocol: self.protocol,
            balance_after_split: self.balance_after_split,
            psd_repair: self.psd_repair,
            smo: self.smo,
            angle_max: self.angle_max,
        }
    }

    /// SHA-256 of the canonical JSON with `output_dir` blanked.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        hex::encode(Sha256::digest(
            serde_json::to_vec(&c).expect("config serializes"),
        ))
    }
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub const RESULTS_HEADER: [&str; 10] = [
    "target",
    "selector",
    "n_features",
    "branch",
    "C_policy",
    "mode",
    "shots",
    "mean_auc",
    "std_auc",
    "n_repeats",
];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One results-table row per summary.
pub fn results_csv(target: &str, summaries: &[ExperimentSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER)?;
    for s in summaries {
        w.write_record([
            target.to_string(),
            s.selector.to_string(),
            s.n_features.to_string(),
            s.branch.to_string(),
            s.branch.c_policy().to_string(),
            s.mode.to_string(),
            s.mode.shots().map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(s.mean_auc),
            fmt_opt(s.std_auc),
            s.per_repeat_auc.len().to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellFailure {
    pub selector: Selector,
    pub n_features: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub target: String,
    pub config_hash: String,
    pub cells: Vec<ExperimentSummary>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub library_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub dataset_sha256: String,
    pub repeat_seeds: Vec<u64>,
    pub load_report: LoadSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadSummary {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub dropped_non_numeric: usize,
    pub dropped_non_finite: usize,
    pub dropped_smiles: usize,
    pub n_actives: usize,
    pub n_inactives: usize,
    pub feature_names: Vec<String>,
}

impl LoadSummary {
    fn new(r: &LoadReport, ds: &LabeledDataset) -> Self {
        Self {
            rows_read: r.rows_read,
            rows_kept: r.rows_kept,
            dropped_non_numeric: r.dropped_non_numeric,
            dropped_non_finite: r.dropped_non_finite,
            dropped_smiles: r.dropped_smiles,
            n_actives: ds.count(crate::dataset::ACTIVE),
            n_inactives: ds.count(crate::dataset::INACTIVE),
            feature_names: ds.feature_names.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summaries: Vec<ExperimentSummary>,
    pub failures: Vec<CellFailure>,
}

impl RunOutcome {
    pub fn complete(&self) -> bool {
        self.failures.is_empty() && self.summaries.iter().all(ExperimentSummary::completed)
    }
}

/// Loads and validates the config, then runs each cell in order, rewriting
/// `results.csv` / `results.json` after every cell. Errors returned here are
/// validation failures; cell failures are recorded in the outcome.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate(None)?;
    let (ds, report) = load_csv(&cfg.dataset, &cfg.load_options())?;
    cfg.validate(Some(ds.n_features()))?;

    let hash = cfg.hash();
    let dir = cfg.output_dir.join(&hash[..16]);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let dataset_bytes = fs::read(&cfg.dataset).map_err(|e| Error::io(&cfg.dataset, e))?;
    let manifest = Manifest {
        library_version: crate::VERSION.to_string(),
        config_hash: hash.clone(),
        config: cfg.clone(),
        dataset_sha256: hex::encode(Sha256::digest(&dataset_bytes)),
        repeat_seeds: (1..=cfg.repeats as u64)
            .map(|r| cfg.master_seed.wrapping_add(r))
            .collect(),
        load_report: LoadSummary::new(&report, &ds),
    };
    write_atomic(
        &dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;

    let mut rejects = csv::Writer::from_writer(Vec::new());
    rejects.write_record(["line", "id", "reason"])?;
    for r in &report.rejected {
        rejects.write_record([r.line.to_string(), r.id.clone(), r.reason.clone()])?;
    }
    let rejects = rejects
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    write_atomic(&dir.join("rejects.csv"), &rejects)?;

    let mut outcome = RunOutcome {
        dir: dir.clone(),
        summaries: Vec::new(),
        failures: Vec::new(),
    };
    for &selector in &cfg.selectors {
        for &n in &cfg.feature_counts {
            match run_experiment(&ds, &cfg.cell(selector, n)) {
                Ok(s) => outcome.summaries.extend(s),
                Err(e) => outcome.failures.push(CellFailure {
                    selector,
                    n_features: n,
                    error: e.to_string(),
                }),
            }
            write_atomic(
                &dir.join("results.csv"),
                &results_csv(&cfg.target, &outcome.summaries)?,
            )?;
            let doc = ResultsDocument {
                target: cfg.target.clone(),
                config_hash: hash.clone(),
                cells: outcome.summaries.clone(),
                failures: outcome.failures.clone(),
            };
            write_atomic(
                &dir.join("results.json"),
                serde_json::to_string_pretty(&doc)?.as_bytes(),
            )?;
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescriptorsReport {
    pub written: usize,
    pub rejected: usize,
}

/// Appends descriptor columns to every row whose SMILES parses; other rows go
/// to the rejects file with the parse position.
pub fn cmd_descriptors(args: &DescriptorsArgs) -> Result<DescriptorsReport> {
    let rejects_path = args.rejects.clone().unwrap_or_else(|| {
        let mut p = args.output.as_os_str().to_owned();
        p.push(".rejects.csv");
        PathBuf::from(p)
    });
    let raw = fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let mut report = DescriptorsReport {
        written: 0,
        rejected: 0,
    };
    if raw.iter().all(u8::is_ascii_whitespace) {
        write_atomic(&args.output, b"")?;
        write_atomic(&rejects_path, b"")?;
        return Ok(report);
    }

    let mut rdr = csv::Reader::from_reader(raw.as_slice());
    let headers = rdr.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == args.smiles_column)
        .ok_or_else(|| Error::MissingColumn(args.smiles_column.clone()))?;

    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(headers.iter().chain(DESCRIPTOR_NAMES.iter().copied()))?;
    let mut rej = csv::Writer::from_writer(Vec::new());
    rej.write_record(["line", "smiles", "position", "error"])?;

    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let smiles = rec.get(col).unwrap_or("").trim();
        match descriptors_for(smiles) {
            Ok(d) => {
                let values = d.to_array().map(|v| v.to_string());
                out.write_record(rec.iter().map(str::to_string).chain(values))?;
                report.written += 1;
            }
            Err(e) => {
                rej.write_record([
                    line.to_string(),
                    smiles.to_string(),
                    e.position.to_string(),
                    e.kind.to_string(),
                ])?;
                report.rejected += 1;
            }
        }
    }
    let buf = |w: csv::Writer<Vec<u8>>| {
        w.into_inner()
            .map_err(|e| Error::io("<csv buffer>", e.into_error()))
    };
    write_atomic(&args.output, &buf(out)?)?;
    write_atomic(&rejects_path, &buf(rej)?)?;
    Ok(report)
}

/// Rows of a results CSV for one target and selector, values copied verbatim.
pub fn cmd_plotdata(args: &PlotdataArgs, sink: &mut dyn Write) -> Result<usize> {
    let mut rdr = csv::Reader::from_path(&args.results)?;
    let headers = rdr.headers()?.clone();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (t, s, n, b, m, sd) = (
        idx("target")?,
        idx("selector")?,
        idx("n_features")?,
        idx("branch")?,
        idx("mean_auc")?,
        idx("std_auc")?,
    );
    let selector = args.selector.to_string();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n_features", "branch", "mean", "std"])?;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if rec[t] == *args.target && rec[s] == selector {
            w.write_record([&rec[n], &rec[b], &rec[m], &rec[sd]])?;
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::invalid(format!(
            "no rows for target \"{}\" and selector {selector}",
            args.target
        )));
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    sink.write_all(&bytes)
        .map_err(|e| Error::io("<output>", e))?;
    Ok(rows)
}

/// Fits the feature pipeline on every row and writes the self-Gram matrix.
pub fn cmd_kernel(args: &KernelArgs) -> Result<(usize, usize)> {
    let opts = LoadOptions {
        id_column: args.id_column.clone(),
        smiles_column: args.smiles_column.clone(),
        ..LoadOptions::new(args.label_column.clone())
    };
    let (ds, _) = load_csv(&args.data, &opts)?;
    let pipeline = Pipeline::fit_with_angle_max(
        &ds.features,
        &ds.labels,
        &ds.ids,
        args.selector,
        args.n_features,
        args.angle_max,
    )?;
    let angles = pipeline.angles(&ds.features)?;
    let mode = args
        .shots
        .map_or(KernelMode::Exact, |shots| KernelMode::Sampled { shots });
    let fm = FeatureMapSpec::new(args.n_features, args.depth)?;
    let k = gram_matrix(&angles, None, &fm, mode, args.seed, !args.no_psd_repair)?;
    qkm::save(&k, &args.out)?;
    if let Some(path) = &args.csv {
        let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        qkm::write_csv(&k, f)?;
    }
    Ok((k.nrows(), k.ncols()))
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> ExitCode {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    let fail = |e: Error| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_VALIDATION)
    };
    match &cli.command {
        Command::Descriptors(a) => match cmd_descriptors(a) {
            Ok(r) => {
                eprintln!("{} rows written, {} rejected", r.written, r.rejected);
                ExitCode::from(EXIT_OK)
            }
            Err(e) => fail(e),
        },
        Command::Run(a) => match cmd_run(a) {
            Ok(o) => {
                for f in &o.failures {
                    eprintln!("cell {} / {} failed: {}", f.selector, f.n_features, f.error);
                }
                for s in o.summaries.iter().filter(|s| s.n_failed > 0) {
                    eprintln!(
                        "cell {} / {} / {}: {} repeat(s) failed",
                        s.selector, s.n_features, s.branch, s.n_failed
                    );
                }
                println!("{}", o.dir.display());
                ExitCode::from(if o.complete() { EXIT_OK } else { EXIT_PARTIAL })
            }
            Err(e) => fail(e),
        },
        Command::Plotdata(a) => {
            let res = match &a.out {
                Some(p) => {
                    let mut buf = Vec::new();
                    cmd_plotdata(a, &mut buf).and_then(|_| write_atomic(p, &buf))
                }
                None => cmd_plotdata(a, &mut std::io::stdout()).map(|_| ()),
            };
            res.map_or_else(fail, |_| ExitCode::from(EXIT_OK))
        }
        Command::Kernel(a) => match cmd_kernel(a) {
            Ok((r, c)) => {
                eprintln!("wrote {r}x{c} kernel to {}", a.out.display());
                ExitCode::from(EXIT_OK)
            }
            Err(e) => fail(e),
        },
    }
}
