use std::path::PathBuf;
use std::process::ExitCode;

use besov::cli::{execute, parse_config, Command, Format, WORKERS_ENV};
use besov::error::Error;
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "besov", version, about = "Weighted Besov space and Carleson measure toolkit")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run(args: Args) -> Result<(), Error> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let workers: usize = v
            .parse()
            .ok()
            .filter(|w| *w > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| Error::Io { path: args.config.display().to_string(), source })?;
    let mut cfg = parse_config(&text, Some(args.command))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    cfg.base_dir = args.config.parent().map(|p| p.to_path_buf());
    cfg.out = args.out.clone();
    cfg.format = args.format;
    let report = execute(&cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
