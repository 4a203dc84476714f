use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lebesgue_lab::{error_json, error_kind, exit_code, prepare, run, Command};

/// Numerical experiments on Lebesgue's cusp.
#[derive(Parser)]
#[command(name = "lebesgue-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and LEBESGUE_LAB_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim(), None));
            return ExitCode::from(1);
        }
    };
    let cfg = match prepare(cli.command, cli.config.as_ref(), cli.out, cli.seed) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("{msg}");
            return ExitCode::from(code as u8);
        }
    };
    match run(&cfg) {
        Ok(summary) => {
            println!("{}", serde_json::to_string(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(error_kind(&e), &e.to_string(), None));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
