use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rbcom::parallel::with_thread_cap;
use rbcom::system::{Analysis, Case};
use rbcom_sim::{load_config, run_analysis, CliError};

/// Resonant-beam optical link simulator.
#[derive(Debug, Parser)]
#[command(name = "rbcom-sim", version)]
struct Args {
    /// iv-curve, operating-point, small-signal, freq-response, noise,
    /// snr-capacity, power-sweep, distance-sweep or monte-carlo
    analysis: Analysis,
    /// JSON system configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides run.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Applies a reference case (L120 or L10) on top of the config
    #[arg(long)]
    case: Option<Case>,
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var("RBCOM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(
                rbcom::Error::Config(format!("RBCOM_THREADS must be a positive integer, got `{v}`")).into(),
            ),
        },
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(case) = args.case {
        cfg.apply_case(case);
    }
    cfg.run.analysis = args.analysis;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    let result = with_thread_cap(threads()?, || run_analysis(&cfg, &args.out))?;
    for f in &result.files {
        println!("{}", args.out.join(f).display());
    }
    println!("{}", args.out.join("summary.json").display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
