use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use billiard_cli::{run, Archive, ExperimentConfig, ExperimentKind};
use clap::Parser;

/// Runs one billiard pressure experiment from a JSON config.
#[derive(Debug, Parser)]
#[command(name = "billiard-thermo", version)]
struct Args {
    experiment: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main_inner(args: Args) -> Result<bool> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if config.experiment != args.experiment {
        bail!(
            "config is for {}, not {}",
            config.experiment.name(),
            args.experiment.name()
        );
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let out = args
        .out
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(config.experiment.name()));
    let outcome = run(&config, &out, &Archive::from_env())?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
    Ok(outcome.degraded)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match main_inner(Args::parse()) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            log::warn!("finished with degraded results");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
