//! `tactile` command-line interface.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 format, 5 data shape.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::dataset::{ContactMode, Dataset, StrainTrace, Task};
use crate::error::Error;
use crate::eval::{cross_validate, GROUPS};
use crate::features::extract;
use crate::io::{self, FormatError, ModelEntry, ReportConfig, ReportFile};
use crate::learn::ModelSpec;
use crate::plot;
use crate::simulator::{generate_corpus, SimConfig};
use crate::stats::significance_profile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_DATA: i32 = 5;

pub const TOOL_VERSION: &str = concat!("tactile ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let code = match e {
            FormatError::Io { .. } => EXIT_IO,
            _ => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

fn data_error(e: Error) -> CliError {
    let code = match e {
        Error::TooFewPerClass { .. }
        | Error::SingleClass
        | Error::Empty
        | Error::DimensionMismatch { .. } => EXIT_DATA,
        Error::ConfigInvalid(_) => EXIT_USAGE,
        _ => EXIT_FORMAT,
    };
    CliError::new(code, e.to_string())
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Texture,
    Stiffness,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Texture => Task::Texture,
            TaskArg::Stiffness => Task::Stiffness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fc,
    Ac,
}

impl From<ModeArg> for ContactMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fc => ContactMode::Flexion,
            ModeArg::Ac => ContactMode::Abduction,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tactile",
    version,
    about = "Tendon-strain tactile sensing pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trace corpus (JSONL).
    Simulate(SimulateArgs),
    /// Convert a two-column time,strain CSV log into trace records.
    Convert(ConvertArgs),
    /// Extract per-trial features from a corpus into CSV.
    Extract(ExtractArgs),
    /// Repeated k-fold cross-validation of the selected models.
    Evaluate(EvaluateArgs),
    /// Rank-sum p-value matrices and per-feature average p-values.
    Significance(SignificanceArgs),
    /// Render report charts and print an accuracy table.
    Report(ReportArgs),
    /// Run every stage for all task and contact-mode groups.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, value_enum, default_value = "fc")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 60)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON simulator settings; missing keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: TaskArg,
    #[arg(long, value_enum, default_value = "fc")]
    pub mode: ModeArg,
    #[arg(long)]
    pub label: String,
    /// Trial id; defaults to the input file stem.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Add to an existing corpus instead of replacing it.
    #[arg(long)]
    pub append: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "knn,svm-linear,svm-rbf,dtree"
    )]
    pub models: Vec<String>,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Contact mode recorded in the report (feature files do not carry it).
    #[arg(long, value_enum, default_value = "fc")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub significance: Option<PathBuf>,
    #[arg(long)]
    pub plot: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub trials: usize,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn load_sim_config(path: Option<&Path>) -> CliResult<SimConfig> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::new(
            EXIT_FORMAT,
            format!(
                "{}:{}: column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ),
        )
    })?;
    cfg.validate().map_err(data_error)?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> CliResult<String> {
    let cfg = load_sim_config(args.config.as_deref())?;
    let corpus = generate_corpus(
        args.task.into(),
        args.mode.into(),
        args.trials,
        &cfg,
        args.seed,
    )
    .map_err(data_error)?;
    io::write_corpus(&args.out, &corpus)?;
    Ok(format!(
        "wrote {} records to {}\n",
        corpus.len(),
        args.out.display()
    ))
}

pub fn convert(args: &ConvertArgs) -> CliResult<String> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", args.input.display())))?;
    let id = args.id.clone().unwrap_or_else(|| {
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".into())
    });
    let trace = io::trace_from_time_series(
        &text,
        args.kind.into(),
        args.mode.into(),
        &args.label,
        &id,
        &args.input,
    )?;
    let mut corpus = if args.append && args.out.exists() {
        io::read_corpus(&args.out)?
    } else {
        Vec::new()
    };
    corpus.push(trace);
    io::write_corpus(&args.out, &corpus)?;
    Ok(format!(
        "wrote {} records to {}\n",
        corpus.len(),
        args.out.display()
    ))
}

fn extract_corpus(corpus: &[StrainTrace]) -> CliResult<Dataset> {
    let first = corpus
        .first()
        .ok_or_else(|| CliError::new(EXIT_FORMAT, "corpus is empty"))?;
    if let Some(bad) = corpus
        .iter()
        .find(|t| t.kind != first.kind || t.mode != first.mode)
    {
        return Err(CliError::new(
            EXIT_FORMAT,
            format!(
                "mixed tasks: record `{}` is {}/{} but the corpus starts as {}/{}",
                bad.trial_id, bad.kind, bad.mode, first.kind, first.mode
            ),
        ));
    }
    let rows = corpus
        .par_iter()
        .map(|t| {
            extract(t)
                .map(|f| (f, t.label.clone()))
                .map_err(|e| CliError::new(EXIT_FORMAT, format!("record `{}`: {e}", t.trial_id)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Dataset::build(rows, first.kind, first.mode).map_err(data_error)
}

pub fn extract_cmd(args: &ExtractArgs) -> CliResult<String> {
    let corpus = io::read_corpus(&args.input)?;
    let ds = extract_corpus(&corpus)?;
    io::write_features(&args.out, &ds)?;
    Ok(format!(
        "wrote {} rows x {} features to {}\n",
        ds.len(),
        ds.n_features(),
        args.out.display()
    ))
}

fn parse_models(names: &[String]) -> CliResult<Vec<ModelSpec>> {
    names
        .iter()
        .filter(|n| !n.trim().is_empty())
        .map(|n| {
            n.parse::<ModelSpec>()
                .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))
        })
        .collect()
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn evaluate_dataset(
    ds: &Dataset,
    models: &[ModelSpec],
    k: usize,
    runs: usize,
    seed: u64,
    features_name: String,
) -> CliResult<ReportFile> {
    if ds.labels_present().len() < 2 {
        return Err(data_error(Error::SingleClass));
    }
    let reports = models
        .iter()
        .map(|m| cross_validate(ds, m, k, runs, seed).map_err(data_error))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ReportFile {
        task: ds.task,
        mode: ds.mode,
        models: reports.iter().map(ModelEntry::from).collect(),
        config: ReportConfig {
            k,
            runs,
            seed,
            models: models.iter().map(|m| m.short_name().to_string()).collect(),
            features: features_name,
        },
        tool_version: TOOL_VERSION.to_string(),
    })
}

fn accuracy_rows(report: &ReportFile) -> Vec<Vec<String>> {
    report
        .models
        .iter()
        .map(|m| {
            let (lo, hi) = m
                .run_accuracies
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| {
                    (lo.min(a), hi.max(a))
                });
            vec![
                m.name.clone(),
                format!("{:.4}", m.mean_accuracy),
                format!("{lo:.4}"),
                format!("{hi:.4}"),
            ]
        })
        .collect()
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<String> {
    let models = parse_models(&args.models)?;
    if models.is_empty() {
        return Err(CliError::new(EXIT_USAGE, "no models selected"));
    }
    let ds = io::read_features(&args.features, args.mode.into())?;
    let report = evaluate_dataset(
        &ds,
        &models,
        args.k,
        args.runs,
        args.seed,
        file_name(&args.features),
    )?;
    io::write_report(&args.out, &report)?;
    Ok(plot::text_table(
        &["model", "mean", "min run", "max run"],
        &accuracy_rows(&report),
    ))
}

pub fn significance(args: &SignificanceArgs) -> CliResult<String> {
    let ds = io::read_features(&args.features, ContactMode::Flexion)?;
    let profile = significance_profile(&ds).map_err(data_error)?;
    io::write_significance(&args.out, &profile)?;
    let below = profile.average_p.iter().filter(|&&p| p < 0.05).count();
    Ok(format!(
        "{} of {} features have average p < 0.05; wrote {}\n",
        below,
        profile.average_p.len(),
        args.out.display()
    ))
}

fn companion_path(plot: &Path, suffix: &str) -> PathBuf {
    let stem = plot
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    plot.with_file_name(format!("{stem}{suffix}.svg"))
}

pub fn report(args: &ReportArgs) -> CliResult<String> {
    let rep = io::read_report(&args.input)?;
    let title = format!("{} {}", rep.task, rep.mode);
    let bars = rep
        .models
        .iter()
        .map(|m| (m.name.clone(), m.mean_accuracy))
        .collect();
    let svg = plot::accuracy_chart(
        &format!("Cross-validated accuracy, {title}"),
        &[(title.clone(), bars)],
    );
    io::write_atomic(&args.plot, svg.as_bytes())?;
    let mut out = plot::text_table(
        &["model", "mean", "min run", "max run"],
        &accuracy_rows(&rep),
    );
    if let Some(sig) = &args.significance {
        let profile = io::read_significance(sig)?;
        let path = companion_path(&args.plot, "_significance");
        let svg = plot::significance_chart(&format!("Average rank-sum p-value, {title}"), &profile);
        io::write_atomic(&path, svg.as_bytes())?;
        out.push_str(&format!(
            "wrote {} and {}\n",
            args.plot.display(),
            path.display()
        ));
    } else {
        out.push_str(&format!("wrote {}\n", args.plot.display()));
    }
    Ok(out)
}

pub fn pipeline(args: &PipelineArgs) -> CliResult<String> {
    let cfg = load_sim_config(args.config.as_deref())?;
    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", args.out.display())))?;
    let models = ModelSpec::defaults();
    let mut summary_rows = Vec::new();
    let mut chart_groups = Vec::new();
    let mut csv = String::from("task,mode,model,mean_accuracy\n");
    for (task, mode) in GROUPS {
        let dir = args
            .out
            .join(format!("{}_{}", task, mode.as_str().to_ascii_lowercase()));
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
        let corpus =
            generate_corpus(task, mode, args.trials, &cfg, args.seed).map_err(data_error)?;
        io::write_corpus(&dir.join("corpus.jsonl"), &corpus)?;
        let ds = extract_corpus(&corpus)?;
        let features_path = dir.join("features.csv");
        io::write_features(&features_path, &ds)?;
        let rep = evaluate_dataset(
            &ds,
            &models,
            args.k,
            args.runs,
            args.seed,
            file_name(&features_path),
        )?;
        io::write_report(&dir.join("report.json"), &rep)?;
        let profile = significance_profile(&ds).map_err(data_error)?;
        io::write_significance(&dir.join("significance.csv"), &profile)?;
        report(&ReportArgs {
            input: dir.join("report.json"),
            significance: Some(dir.join("significance.csv")),
            plot: dir.join("accuracy.svg"),
        })?;
        let group = format!("{task} {mode}");
        let mut bars = Vec::new();
        for m in &rep.models {
            summary_rows.push(vec![
                task.to_string(),
                mode.to_string(),
                m.name.clone(),
                format!("{:.4}", m.mean_accuracy),
            ]);
            csv.push_str(&format!("{task},{mode},{},{}\n", m.name, m.mean_accuracy));
            bars.push((m.name.clone(), m.mean_accuracy));
        }
        chart_groups.push((group, bars));
    }
    let table = plot::text_table(&["task", "mode", "model", "mean accuracy"], &summary_rows);
    io::write_atomic(&args.out.join("summary.txt"), table.as_bytes())?;
    io::write_atomic(&args.out.join("summary.csv"), csv.as_bytes())?;
    let svg = plot::accuracy_chart(
        "Cross-validated accuracy by contact mode and model",
        &chart_groups,
    );
    io::write_atomic(&args.out.join("summary.svg"), svg.as_bytes())?;
    Ok(table)
}

pub fn dispatch(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Convert(a) => convert(a),
        Command::Extract(a) => extract_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Significance(a) => significance(a),
        Command::Report(a) => report(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

/// Parses `args` (including the program name), runs the command, prints its
/// output and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
