use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use pointerlab_cli::{find_experiment, registry, CliError, RunConfig, RunContext};

/// Numerical laboratory for pointer-state robustness and diffusion.
#[derive(Parser, Debug)]
#[command(name = "pointerlab", version, about)]
struct Args {
    /// Experiment name; one of the registered experiments (see --list).
    experiment: Option<String>,

    /// JSON run configuration; defaults apply for missing sections.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the noise seed and the ensemble master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides outputs.directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Restrict series artifacts to one format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Worker threads for trajectory ensembles (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// List the registered experiments and exit.
    #[arg(long)]
    list: bool,
}

fn run(args: Args) -> Result<(), CliError> {
    if args.list {
        for e in registry() {
            println!("{:<16} {}", e.name(), e.summary());
        }
        return Ok(());
    }
    let name = args
        .experiment
        .as_deref()
        .ok_or_else(|| CliError::Config("no experiment given; try --list".into()))?;
    let experiment = find_experiment(name).ok_or_else(|| {
        let known: Vec<&str> = registry().iter().map(|e| e.name()).collect();
        CliError::Config(format!(
            "unknown experiment '{name}'; registered: {}",
            known.join(", ")
        ))
    })?;

    if let Some(n) = args.threads {
        // ignore failures: the global pool can only be set once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.noise.seed = seed;
        config.ensemble.master_seed = seed;
    }
    if let Some(format) = &args.format {
        config.outputs.formats = vec![format.clone()];
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.outputs.directory));

    let mut ctx = RunContext::new(config, &out_dir)?;
    experiment.run(&mut ctx)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pointerlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
