use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use ornlab_cli::{run, Command};

/// Build designs, compute exact loads, run Monte Carlo suites and emit curve data.
#[derive(Debug, Parser)]
#[command(name = "ornlab", version)]
struct Args {
    command: Command,
    /// JSON config for the command.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, default_value = "ornlab-out")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn main_inner(args: &Args) -> anyhow::Result<bool> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let text = match &args.config {
        Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?),
        None => None,
    };
    let base = args.config.as_ref().and_then(|p| p.parent()).map(PathBuf::from).unwrap_or_default();
    let outcome = run(args.command, text.as_deref(), &base, args.seed)?;
    for path in outcome.write_to(&args.out).with_context(|| format!("writing to {}", args.out.display()))? {
        println!("wrote {}", path.display());
    }
    for check in &outcome.checks {
        println!("{check}");
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
