use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bl_skorokhod::config::ExperimentConfig;
use bl_verify::{check_output_dir, execute, load_config, write_outputs, CliError, Command};

/// Verifies the Brascamp–Lieb moment inequality and its variance corrections
/// through monotone transport and Bass's Skorokhod embedding.
///
/// Exit status: 0 when every check passes, 1 when an inequality fails,
/// 2 on configuration or usage errors.
#[derive(Parser)]
#[command(name = "bl-verify", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Transport, embedding, quadrature verdicts and Monte Carlo cross-checks.
    Run(Opts),
    /// Simulate the embedding and write the ensembles.
    Embed(Opts),
    /// Quadrature-only verdicts, without simulation.
    Verify(Opts),
    /// Local-time sandwich curves from the embedding.
    Sandwich(Opts),
    /// Slope-map comparisons for the slope-map potentials of the config.
    Appendix(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Matrix {
    Default,
}

#[derive(Args)]
struct Opts {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH", conflicts_with = "matrix")]
    config: Option<PathBuf>,
    /// Built-in experiment matrix.
    #[arg(long)]
    matrix: Option<Matrix>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn config_from(opts: &Opts) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&opts.config, opts.matrix) {
        (Some(path), _) => load_config(path)?,
        (None, Some(Matrix::Default)) => ExperimentConfig::default_matrix(),
        (None, None) => return Err(CliError::Config("one of --config or --matrix is required".into())),
    };
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(n) = opts.paths {
        cfg.n_paths = n;
    }
    if let Some(n) = opts.steps {
        cfg.n_steps = n;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn run(command: Command, opts: &Opts) -> Result<i32, CliError> {
    let cfg = config_from(opts)?;
    let out = PathBuf::from(&cfg.output_dir);
    let outcome = execute(command, &cfg)?;
    check_output_dir(&out)?;
    write_outputs(&out, &outcome.files)?;
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    println!(
        "{}: {} entries, {} potentials, {} failure(s); outputs in {}",
        if outcome.pass() { "PASS" } else { "FAIL" },
        outcome.report.entries.len(),
        outcome.report.potentials.len(),
        outcome.failures.len(),
        out.display()
    );
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, opts) = match &cli.command {
        Sub::Run(o) => (Command::Run, o),
        Sub::Embed(o) => (Command::Embed, o),
        Sub::Verify(o) => (Command::Verify, o),
        Sub::Sandwich(o) => (Command::Sandwich, o),
        Sub::Appendix(o) => (Command::Appendix, o),
    };
    match run(command, opts) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("bl-verify: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
