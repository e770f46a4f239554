//! Command-line front end: `test`, `calibrate-a1` and `experiment`.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use frontier_gof::decision::{regularity_ratio, run_test, CxPolicy, GofConfig, DEFAULT_A1};
use frontier_gof::poisson_mc::{estimate_a1, with_workers, A1Config, Integration};
use frontier_gof::report::{A1Summary, ExperimentSummary, Payload, Report, TestSummary};
use frontier_gof::series::load_series;
use frontier_gof::sims::run_experiment;
use frontier_gof::specfile::parse_specs;
use frontier_gof::GofError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Seed used when neither `--seed` nor `GOF_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

/// Window-count ratio above which the Poisson calibration is flagged as doubtful.
pub const IRREGULARITY_LIMIT: f64 = 3.0;

#[derive(Debug, Parser)]
#[command(name = "frontier-gof", version, about = "Goodness-of-fit tests for affine frontiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a two-column series for an affine frontier.
    Test(TestArgs),
    /// Estimate the variance constant A_γ by Monte Carlo.
    #[command(name = "calibrate-a1")]
    CalibrateA1(CalibrateArgs),
    /// Run size/power experiments from a spec file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct TestArgs {
    /// Delimited file with a label column and a value column.
    #[arg(long)]
    data: PathBuf,
    /// Bandwidth of the frontier at the statistic points.
    #[arg(long, default_value_t = 0.2)]
    h: f64,
    /// Bandwidth of the frontier used for the residuals.
    #[arg(long, default_value_t = 0.2)]
    h1: f64,
    /// Number of upper order statistics in the scale estimate.
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Known tail scale; estimated when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_A1)]
    a1: f64,
    /// `auto` or a fixed positive value.
    #[arg(long, default_value = "auto", value_parser = parse_cx)]
    cx: CxPolicy,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long)]
    reps: usize,
    #[arg(long, env = "GOF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Strip depth; `20/γ` when omitted.
    #[arg(long)]
    depth: Option<f64>,
    /// Use composite Simpson on this many intervals instead of exact integration.
    #[arg(long)]
    simpson: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Seed for specs that do not set one.
    #[arg(long, env = "GOF_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    json: bool,
}

fn parse_cx(s: &str) -> Result<CxPolicy, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(CxPolicy::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(CxPolicy::Fixed(v)),
        _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
    }
}

fn usage(msg: impl std::fmt::Display) -> GofError {
    GofError::Domain(msg.to_string())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let started = Instant::now();
    let result = match &cli.command {
        Command::Test(a) => cmd_test(a, &args),
        Command::CalibrateA1(a) => cmd_calibrate_a1(a, &args),
        Command::Experiment(a) => cmd_experiment(a, &args),
    };
    match result {
        Ok((mut report, json, code)) => {
            report.wall_time_secs = started.elapsed().as_secs_f64();
            let text = if json { report.to_json() + "\n" } else { report.to_table() };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_ERROR;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<(Report, bool, i32), GofError>;

fn cmd_test(a: &TestArgs, args: &[String]) -> CmdResult {
    let config = GofConfig {
        h: a.h,
        h1: a.h1,
        k: a.k,
        level: a.level,
        gamma: a.gamma,
        a1: a.a1,
        cx_policy: a.cx,
    };
    config.validate()?;
    let (series, sample) = load_series(&a.data, config.h.max(config.h1))?;
    let outcome = run_test(&sample, &config)?;

    let mut warnings = Vec::new();
    let ratio = regularity_ratio(&sample, config.h)?;
    if ratio > IRREGULARITY_LIMIT {
        warnings.push(format!(
            "design is irregular (window-count ratio {ratio:.2} > {IRREGULARITY_LIMIT}); \
             the assumptions behind the A1-calibrated test are doubtful"
        ));
    }
    if config.cx_policy == CxPolicy::Auto {
        warnings.push(format!(
            "C_x normalised by the {} design points inside [0, 1]",
            outcome.n_eligible
        ));
    }
    if series.skipped_count > 0 {
        warnings.push(format!(
            "{} rows with missing values dropped before assigning odd/even positions",
            series.skipped_count
        ));
    }
    if outcome.dropped_last {
        warnings.push("odd number of design points: the last point was dropped".into());
    }
    if outcome.merged_ties > 0 {
        warnings.push(format!("{} tied abscissae merged (kept the largest response)", outcome.merged_ties));
    }

    let summary = TestSummary::new(
        a.data.display().to_string(),
        series.parsed_count,
        series.skipped_count,
        &config,
        &outcome,
    );
    let mut report = Report::new(args.to_vec(), Payload::Test(summary));
    report.warnings = warnings;
    let code = if outcome.any_reject() { EXIT_REJECT } else { EXIT_OK };
    Ok((report, a.json, code))
}

fn cmd_calibrate_a1(a: &CalibrateArgs, args: &[String]) -> CmdResult {
    if a.reps == 0 {
        return Err(usage("--reps must be positive"));
    }
    if a.workers == Some(0) {
        return Err(usage("--workers must be positive"));
    }
    let mut config = A1Config::new(a.reps, a.gamma, a.seed);
    if let Some(d) = a.depth {
        config.depth = d;
    }
    if let Some(grid_n) = a.simpson {
        config.integration = Integration::Simpson { grid_n };
    }
    let estimate = with_workers(a.workers, || estimate_a1(&config))?;
    let mut report = Report::new(args.to_vec(), Payload::CalibrateA1(A1Summary::new(&config, &estimate)));
    if estimate.degenerate_draws > 0 {
        report.warnings.push(format!(
            "{} draws redrawn because a frontier window had an empty side",
            estimate.degenerate_draws
        ));
    }
    Ok((report, a.json, EXIT_OK))
}

fn cmd_experiment(a: &ExperimentArgs, args: &[String]) -> CmdResult {
    if a.workers == Some(0) {
        return Err(usage("--workers must be positive"));
    }
    let text = std::fs::read_to_string(&a.spec)?;
    let specs = parse_specs(&text, a.seed)?;
    let results = with_workers(a.workers, || {
        specs.iter().map(run_experiment).collect::<Result<Vec<_>, _>>()
    })?;
    let warnings = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.reps_failed > 0)
        .map(|(i, r)| format!("experiment {}: {} failed replicates", i + 1, r.reps_failed))
        .collect();
    let mut report = Report::new(args.to_vec(), Payload::Experiment(ExperimentSummary { results }));
    report.warnings = warnings;
    Ok((report, a.json, EXIT_OK))
}
