use std::process::ExitCode;

use clap::{Parser, Subcommand};
use klab_cli::{cmd_qtable, cmd_report, cmd_spectrum, run_criteria};
use klab_core::config::ExperimentConfig;
use klab_core::error::Error;

/// Numerical laboratory for two-term spectral counting asymptotics.
///
/// KLAB_SEED is reserved and unused: every computation is deterministic.
#[derive(Parser)]
#[command(name = "klab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (key=value lines or a single JSON object).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<String>,

    /// Thread count (overrides the config).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Spectral cutoff (overrides the config).
    #[arg(long = "lambda-max", global = true)]
    lambda_max: Option<f64>,

    /// Loop-detection horizon (overrides the config).
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,

    /// Quadrature nodes per periodic dimension (overrides the config).
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Smoothing-kernel Fourier support radius (overrides the config).
    #[arg(long = "kernel-a", global = true)]
    kernel_a: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate eigendata and period integrals into spectrum.csv.
    Spectrum,
    /// Build the loop table with q(t) values into qtable.json.
    Qtable,
    /// Emit counting.csv, report.json, and figure1.gp.
    Report,
    /// Run the acceptance criteria applicable to the config.
    Verify,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(lambda_max) = cli.lambda_max {
        cfg.lambda_max = lambda_max;
    }
    if let Some(t_max) = cli.t_max {
        cfg.t_max = t_max;
    }
    if let Some(nodes) = cli.nodes {
        cfg.nodes = nodes;
    }
    if let Some(a) = cli.kernel_a {
        cfg.kernel_a = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Exit-code contract: 0 ok, 1 criterion failure, 2 config error,
/// 3 numerical non-convergence.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(exit_code_for(&err));
        }
    };
    let result = match cli.command {
        Command::Spectrum => cmd_spectrum(cfg).map(Some),
        Command::Qtable => cmd_qtable(cfg).map(Some),
        Command::Report => cmd_report(cfg).map(Some),
        Command::Verify => match run_criteria(cfg) {
            Ok(results) => {
                let mut all_ok = true;
                for r in &results {
                    println!("{}", r.line());
                    all_ok &= r.passed_or_skipped();
                }
                if !all_ok {
                    eprintln!("error: criterion failure");
                    return ExitCode::from(1);
                }
                Ok(None)
            }
            Err(err) => Err(err),
        },
    };
    match result {
        Ok(Some(output)) => {
            for msg in &output.messages {
                println!("{msg}");
            }
            for file in &output.files {
                println!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
