use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rparvi_cli::{load_config, run_command, RunOptions};

/// Reward-guided particle sampler.
#[derive(Debug, Parser)]
#[command(name = "rparvi", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads for particle updates (0 = auto).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = load_config(&args.config).and_then(|mut cfg| {
        if let Some(seed) = args.seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(dir) = args.output_dir {
            cfg.output.directory = dir;
        }
        run_command(&cfg, &RunOptions { workers: args.workers, quiet: args.quiet })
    });
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
