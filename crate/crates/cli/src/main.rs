use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spheropt_cli::{load_config, run, write_report, Command, RunConfig};

/// Polynomial optimization over products of spheres with certified minimizers.
#[derive(Parser)]
#[command(name = "spheropt", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Polynomial problem (JSON) or tensor (JSON or text).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report file, or a directory for a file named by the config hash.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "kmax")]
    k_max: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match &args.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    config.command = Some(args.command);
    if args.input.is_some() {
        config.input = args.input;
    }
    if args.out.is_some() {
        config.output = args.out;
    }
    if let Some(k) = args.k_max {
        config.k_max = k;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &config.output {
        Some(out) => match write_report(&report, out) {
            Ok(path) => eprintln!("report written to {}", path.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => println!("{}", report.to_json()),
    }
    ExitCode::from(report.status.exit_code() as u8)
}
