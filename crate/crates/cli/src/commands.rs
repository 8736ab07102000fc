//! Subcommand implementations. Each renders its whole output to a string
//! first; nothing is written until the computation succeeded.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bandlab_core::{
    run_comparison, run_trajectory, sweep_grid, MetricSummary, ProcessConfig, RunSummary,
    StrategyConfig, SweepCell, Trajectory,
};
use serde::Serialize;

use crate::cli::{
    Command, CompareArgs, OutputFormat, StrategyName, SweepArgs, TrajectoryArgs, TruncateArgs,
};
use crate::dist_file::load_distribution;
use crate::error::CliError;
use crate::format::{parse_list, parse_range, sig6};
use crate::report::{build_case_study, column_names};

pub fn run(command: &Command) -> Result<(), CliError> {
    let (output, out) = match command {
        Command::Truncate(args) => (truncate(args)?, &args.out),
        Command::Trajectory(args) => (trajectory(args)?, &args.out),
        Command::Compare(args) => (compare(args)?, &args.out),
        Command::Sweep(args) => (sweep(args)?, &args.out),
    };
    write_output(out.as_deref(), &output)
}

pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, content).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

pub fn load_process(path: &Path) -> Result<ProcessConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config: ProcessConfig = serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: path.to_path_buf(),
        field: "process config".into(),
        message: e.to_string(),
    })?;
    config.validate()?;
    Ok(config)
}

const CASE_STUDY_STRATEGIES: [StrategyName; 4] = [
    StrategyName::TopB,
    StrategyName::TopP,
    StrategyName::TopK,
    StrategyName::MinP,
];

pub fn truncate(args: &TruncateArgs) -> Result<String, CliError> {
    let configs = args.strategy.configs(&CASE_STUDY_STRATEGIES)?;
    let dist = load_distribution(&args.file)?;
    let study = build_case_study(&dist, &configs, args.top)?;
    match args.format {
        OutputFormat::Table => Ok(study.render_table()),
        OutputFormat::Json => Ok(study.to_json()),
        OutputFormat::Csv => study.to_csv(),
    }
}

fn single_strategy(configs: Vec<StrategyConfig>) -> Result<StrategyConfig, CliError> {
    match configs.as_slice() {
        [one] => Ok(*one),
        _ => Err(CliError::Usage(format!(
            "trajectory runs exactly one strategy, got {}",
            configs.len()
        ))),
    }
}

pub fn trajectory(args: &TrajectoryArgs) -> Result<String, CliError> {
    let strategy = single_strategy(args.strategy.configs(&[StrategyName::TopB])?)?;
    let process = load_process(&args.config)?;
    let run = run_trajectory(&process, &strategy, args.seed)?;
    trajectory_csv(&run)
}

fn csv_error(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("csv encoding failed: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(csv_error)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn trajectory_csv(run: &Trajectory) -> Result<String, CliError> {
    let mut w = crate::csv_writer(Vec::new());
    w.write_record([
        "step",
        "entropy",
        "normalized_entropy",
        "support_size",
        "bandwidth",
        "sampled_token",
        "mode_agreement",
    ])
    .map_err(csv_error)?;
    for r in &run.records {
        w.write_record([
            r.step.to_string(),
            sig6(r.entropy),
            sig6(r.normalized_entropy),
            r.support_size.to_string(),
            r.bandwidth.map(sig6).unwrap_or_default(),
            r.sampled_token.to_string(),
            r.mode_agreement.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

#[derive(Debug, Serialize)]
struct MetricJson {
    mean: f64,
    variance: f64,
}

impl From<&MetricSummary> for MetricJson {
    fn from(m: &MetricSummary) -> Self {
        Self {
            mean: m.mean,
            variance: m.variance,
        }
    }
}

#[derive(Debug, Serialize)]
struct CompareEntry {
    config: StrategyConfig,
    n_seeds: usize,
    /// Post-truncation entropy.
    mean_entropy: MetricJson,
    mean_pre_entropy: MetricJson,
    mean_support_size: MetricJson,
    geometric_mean_branching: MetricJson,
    mode_agreement_rate: MetricJson,
}

impl From<&RunSummary> for CompareEntry {
    fn from(s: &RunSummary) -> Self {
        Self {
            config: s.strategy,
            n_seeds: s.n_seeds,
            mean_entropy: (&s.mean_entropy).into(),
            mean_pre_entropy: (&s.mean_pre_entropy).into(),
            mean_support_size: (&s.mean_support_size).into(),
            geometric_mean_branching: (&s.geometric_mean_branching).into(),
            mode_agreement_rate: (&s.mode_agreement_rate).into(),
        }
    }
}

pub fn compare(args: &CompareArgs) -> Result<String, CliError> {
    let configs = args
        .strategy
        .configs(&[StrategyName::TopB, StrategyName::TopP])?;
    let process = load_process(&args.config)?;
    let summaries = run_comparison(&process, &configs, args.seeds)?;
    Ok(compare_json(&configs, &summaries))
}

/// JSON object keyed by strategy name.
pub fn compare_json(configs: &[StrategyConfig], summaries: &[RunSummary]) -> String {
    let entries: BTreeMap<String, CompareEntry> = column_names(configs)
        .into_iter()
        .zip(summaries)
        .map(|(name, s)| (name, s.into()))
        .collect();
    let mut s = serde_json::to_string_pretty(&entries).expect("summaries always serialize");
    s.push('\n');
    s
}

pub fn sweep(args: &SweepArgs) -> Result<String, CliError> {
    let bandwidths = parse_range(&args.bandwidths)?;
    let temperatures = parse_list(&args.temperatures)?;
    let process = load_process(&args.config)?;
    let cells = sweep_grid(&process, &bandwidths, &temperatures, args.seeds)?;
    sweep_csv(&cells)
}

pub fn sweep_csv(cells: &[SweepCell]) -> Result<String, CliError> {
    let mut w = crate::csv_writer(Vec::new());
    w.write_record([
        "bandwidth",
        "temperature",
        "mean_entropy",
        "mean_support_size",
        "mode_agreement_rate",
        "variance_mode_agreement",
    ])
    .map_err(csv_error)?;
    for c in cells {
        let s = &c.summary;
        w.write_record([
            sig6(c.bandwidth),
            sig6(c.temperature),
            sig6(s.mean_entropy.mean),
            sig6(s.mean_support_size.mean),
            sig6(s.mode_agreement_rate.mean),
            sig6(s.mode_agreement_rate.variance),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}
