use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod report;

use config::{Command, RunConfig};
use error::CliError;
use report::write_file;

/// Grassmannian geometry scans and mean curvature flow runs driven by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "gaussflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory that relative report paths are resolved against.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sampled commands; overrides scan.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn output_path(out_dir: Option<&Path>, configured: Option<&str>, default: String) -> PathBuf {
    let p = PathBuf::from(configured.map_or(default, str::to_owned));
    match out_dir {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let config = RunConfig::load(path)?.resolve(cli.command, cli.seed)?;
    let hash = config.hash();
    let report = commands::run(&config)?;

    let name = config.command().name();
    let out = cli.out.as_deref();
    let csv = output_path(out, config.out.csv.as_deref(), format!("{name}.csv"));
    let json = output_path(out, config.out.json.as_deref(), format!("{name}.json"));
    write_file(&csv, &report.to_csv(&hash))?;
    write_file(&json, &report.to_json(&config, &hash))?;

    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {}: worst {:e}, limit {:e}", c.name, c.worst, c.limit);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
