//! Command-line entry point.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{parse_config, ExperimentKind, Format};
use crate::experiment::{run_experiment, RunError, RunOptions, EXIT_EXPECTATION, EXIT_OK, EXIT_USAGE};
use crate::report::{emit_report, Manifest};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "HALFLIE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "halflie", version, about = "Run half-Lie group experiments from JSON configs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve a step control on a group or on H.
    Evolve(RunArgs),
    /// Trotter products of a pair of curves.
    Trotter(RunArgs),
    /// Powers of a single curve.
    StrongTrotter(RunArgs),
    /// Group-commutator products, or the limit ladder of an oscillator.
    Commutator(RunArgs),
    /// Smooth-vector seminorms.
    Seminorms(RunArgs),
    /// Smooth a cocycle and check the result.
    CocycleSmooth(RunArgs),
    /// Sampled norm inequalities of the exponential chart.
    Bounds(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to $HALFLIE_OUT_DIR, then the config, then `.`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for sampled suprema.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Print nothing on success.
    #[arg(long, short)]
    pub quiet: bool,
}

impl Command {
    pub fn split(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::Evolve(a) => (ExperimentKind::Evolve, a),
            Command::Trotter(a) => (ExperimentKind::Trotter, a),
            Command::StrongTrotter(a) => (ExperimentKind::StrongTrotter, a),
            Command::Commutator(a) => (ExperimentKind::Commutator, a),
            Command::Seminorms(a) => (ExperimentKind::Seminorms, a),
            Command::CocycleSmooth(a) => (ExperimentKind::CocycleSmooth, a),
            Command::Bounds(a) => (ExperimentKind::Bounds, a),
        }
    }
}

/// Parses `args`, runs the experiment and returns the process exit code:
/// 0 when every expectation holds, 1 for usage errors, 2 for failed
/// expectations and 3 for numerical failures.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("halflie {kind}: {e}");
            e.exit_code()
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<i32, RunError> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.config)
        .map_err(|e| RunError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config = parse_config(&text)?;
    let output = config.output.clone().unwrap_or_default();
    let format = args.format.or(output.format).unwrap_or(Format::Csv);
    let dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let opts = RunOptions { seed: args.seed.or(config.seed).unwrap_or(0), jobs: args.jobs.unwrap_or(0) };

    let result = run_experiment(&config, kind, &opts)?;
    let report = &result.report;
    let path = emit_report(report, format, &dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::Unsupported => RunError::Usage(e.to_string()),
        _ => RunError::Io(e),
    })?;
    let manifest = Manifest {
        report: report.file_name(format),
        experiment: kind.as_str().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        seed: opts.seed,
        jobs: opts.jobs,
        config: serde_json::to_value(&config).expect("plain data"),
        probe: result.probe.map(|p| {
            json!({
                "identity": p.identity,
                "homomorphism": p.homomorphism,
                "naturality": p.naturality,
                "derived_homomorphism": p.derived_homomorphism,
            })
        }),
        checks_passed: report.all_passed(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    manifest.write(&dir, report)?;

    if !args.quiet {
        for check in &report.checks {
            eprintln!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
        }
        println!("{}", path.display());
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_EXPECTATION })
}
