use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tucker_bench::config::{ExperimentConfig, Overrides};

/// Runs one numerical experiment and writes its CSV tables.
#[derive(Parser, Debug)]
#[command(name = "tucker-bench", version)]
struct Cli {
    /// TOML experiment description; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let mut cfg = match &cli.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&cli.overrides);
        tucker_bench::run_and_write(cfg)
    })();
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tucker-bench: {e:#}");
            ExitCode::FAILURE
        }
    }
}
