//! Command-line front-end for the association score library.

mod groups;
mod ingest;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ascore_core::{
    calibrate_correction, convergence_sweep, equitability_sweep, estimate_association,
    permutation_test, semipartial_association, CalibrationGrid, ConvergenceCell,
    EquitabilityCell, EstimatorConfig, Family, SemipartialRequest,
};

use groups::{parse_grouping, parse_name_groups};
use ingest::ingest_csv;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {detail}")]
    UnreadableFile { path: String, detail: String },
    #[error("duplicated column name {name:?} in header")]
    DuplicateHeader { name: String },
    #[error("no complete numeric rows in {path}")]
    NoNumericRows { path: String },
    #[error("bad grouping expression {expr:?}: {reason}")]
    BadGrouping { expr: String, reason: String },
    #[error("cannot write {path}: {detail}")]
    UnwritableOutput { path: String, detail: String },
    #[error(transparent)]
    Core(#[from] ascore_core::Error),
}

impl CliError {
    /// Stable machine-readable error kind for the JSON error object.
    fn kind(&self) -> &'static str {
        match self {
            CliError::UnreadableFile { .. } => "unreadable-file",
            CliError::DuplicateHeader { .. } => "duplicate-header-name",
            CliError::NoNumericRows { .. } => "no-numeric-rows",
            CliError::BadGrouping { .. } => "invalid-grouping",
            CliError::UnwritableOutput { .. } => "unwritable-output",
            CliError::Core(err) => match err {
                ascore_core::Error::SampleTooSmall { .. } => "sample-too-small",
                ascore_core::Error::InvalidGrouping(_) => "invalid-grouping",
                ascore_core::Error::UnsupportedGrouping(_) => "unsupported-grouping",
                ascore_core::Error::InvalidTable(_) => "invalid-table",
                ascore_core::Error::InvalidParameter(_) => "invalid-parameter",
                ascore_core::Error::UnknownFamily(_) => "unknown-family",
                ascore_core::Error::MalformedCorrectionTable(_) => "malformed-correction-table",
            },
        }
    }
}

/// Association score estimation between groups of variables.
#[derive(Parser)]
#[command(name = "ascore", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the association score between column groups
    Assoc(AssocArgs),
    /// Permutation test of independence between two column groups
    Test(TestArgs),
    /// Semipartial association of y with x, controlling for c
    Semipartial(SemipartialArgs),
    /// Synthetic-relationship benchmark sweeps
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Regenerate the small-sample correction table by simulation
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct AssocArgs {
    /// CSV file with a header row of column names
    #[arg(long)]
    input: PathBuf,
    /// Column groups: pipe-separated lists of comma-separated names,
    /// e.g. "x1,x2|y"
    #[arg(long)]
    groups: String,
    /// Report the raw score without the small-sample correction
    #[arg(long)]
    no_correction: bool,
    /// Write the result here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exactly two groups, e.g. "x1,x2|y"
    #[arg(long)]
    groups: String,
    /// Number of permutation replicates
    #[arg(long, default_value_t = 200)]
    b: usize,
    /// Seed for the permutation streams
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_correction: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SemipartialArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exactly three role-ordered groups: response, predictors, controls —
    /// e.g. "y|x1,x2|c"
    #[arg(long)]
    groups: String,
    #[arg(long)]
    no_correction: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Mean score vs true R-squared across families and noise levels
    Equitability(EquitabilityArgs),
    /// Mean score vs sample size for fixed relationships
    Convergence(ConvergenceArgs),
}

#[derive(Args)]
struct EquitabilityArgs {
    /// Comma-separated family identifiers (e.g. "linear,sigmoid,circle")
    #[arg(long, value_delimiter = ',')]
    families: Vec<String>,
    /// Comma-separated noise standard deviations
    #[arg(long, value_delimiter = ',')]
    noise: Vec<f64>,
    /// Sample size per replicate
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    /// Predictor dimension (1 or 2; 2 only for functional families)
    #[arg(long = "x-dim", default_value_t = 1)]
    x_dim: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Comma-separated family identifiers
    #[arg(long, value_delimiter = ',', default_values_t = [
        "circle".to_string(),
        "gaussian-r2-0.5".to_string(),
        "independent".to_string(),
    ])]
    families: Vec<String>,
    /// Comma-separated ascending sample sizes
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Comma-separated ascending sample sizes (default: the shipped grid)
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = ascore_core::correction::DEFAULT_CALIBRATION_SEED)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let obj = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            eprintln!("{}", obj);
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Assoc(args) => {
            let table = ingest_csv(&args.input)?;
            let grouping = parse_grouping(&args.groups, &table)?;
            let cfg = config(args.no_correction);
            let fit = estimate_association(&table, &grouping, &cfg)?;
            emit(&args.output, &json_line(&fit)?)
        }
        Command::Test(args) => {
            let table = ingest_csv(&args.input)?;
            let grouping = parse_grouping(&args.groups, &table)?;
            let cfg = config(args.no_correction);
            let mut result = permutation_test(&table, &grouping, args.b, args.seed, &cfg)?;
            // The replicate scores are diagnostics; the report stays compact.
            result.permuted_stats = None;
            emit(&args.output, &json_line(&result)?)
        }
        Command::Semipartial(args) => {
            let table = ingest_csv(&args.input)?;
            let roles = parse_name_groups(&args.groups, &table)?;
            if roles.len() != 3 {
                return Err(CliError::BadGrouping {
                    expr: args.groups.clone(),
                    reason: format!(
                        "semipartial needs exactly 3 groups (response|predictors|controls), got {}",
                        roles.len()
                    ),
                });
            }
            let mut roles = roles.into_iter();
            let req = SemipartialRequest {
                y_cols: roles.next().unwrap(),
                x_cols: roles.next().unwrap(),
                c_cols: roles.next().unwrap(),
                cfg: config(args.no_correction),
            };
            let value = semipartial_association(&table, &req)?;
            emit(
                &args.output,
                &format!("{}\n", serde_json::json!({ "semipartial": value })),
            )
        }
        Command::Bench(BenchCommand::Equitability(args)) => {
            let families = parse_families(&args.families)?;
            let cells = equitability_sweep(
                &families,
                &args.noise,
                args.n,
                args.replicates,
                args.x_dim,
                args.seed,
            )?;
            let text = format_equitability(&cells, &args);
            emit(&args.output, &text)
        }
        Command::Bench(BenchCommand::Convergence(args)) => {
            let families = parse_families(&args.families)?;
            let cells = convergence_sweep(&families, &args.n, args.replicates, args.seed)?;
            let text = format_convergence(&cells, &args);
            emit(&args.output, &text)
        }
        Command::Calibrate(args) => {
            let mut grid = CalibrationGrid::default();
            if let Some(ns) = args.n {
                grid.ns = ns;
            }
            grid.replicates = args.replicates;
            grid.seed = args.seed;
            eprintln!(
                "calibrating {} cells x {} replicates (the full default grid takes tens of minutes)",
                grid.ns.len() * grid.rho2s.len(),
                grid.replicates
            );
            let table = calibrate_correction(&grid)?;
            emit(&args.output, &table.to_text())
        }
    }
}

fn config(no_correction: bool) -> EstimatorConfig {
    EstimatorConfig {
        apply_correction: !no_correction,
        ..EstimatorConfig::default()
    }
}

fn parse_families(ids: &[String]) -> Result<Vec<Family>, CliError> {
    ids.iter()
        .map(|id| id.parse::<Family>().map_err(CliError::from))
        .collect()
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("results serialize to JSON");
    text.push('\n');
    Ok(text)
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn format_equitability(cells: &[EquitabilityCell], args: &EquitabilityArgs) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# equitability sweep\tn={}\treplicates={}\tx_dim={}\tseed={}",
        args.n, args.replicates, args.x_dim, args.seed
    );
    let _ = writeln!(out, "family\tnoise_sigma\ttrue_r2\tmean_a\tsd_a");
    for cell in cells {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            cell.family,
            cell.noise_sigma,
            fmt_opt(cell.true_r2),
            cell.mean_a,
            cell.sd_a
        );
    }
    out
}

fn format_convergence(cells: &[ConvergenceCell], args: &ConvergenceArgs) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# convergence sweep\treplicates={}\tseed={}",
        args.replicates, args.seed
    );
    let _ = writeln!(out, "family\tn\tmean_a\tsd_a");
    for cell in cells {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            cell.family, cell.n, cell.mean_a, cell.sd_a
        );
    }
    out
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::UnwritableOutput {
                path: path.display().to_string(),
                detail: e.to_string(),
            })
        }
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}
