use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zonekit_cli::{init_threads, run, CheckStatus, RunConfig, RunOptions, EXIT_CONFIG, EXIT_FAILURE};

/// Compute zone diagrams from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "zonekit", version, about)]
struct Args {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory [default: out/<config file stem>].
    #[arg(long, value_name = "PATH")]
    out_dir: Option<PathBuf>,
    /// Replace a config value, e.g. `resolution=[512,512]` or `norm.p=3`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run the checks listed in the config.
    #[arg(long)]
    verify: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let prepared = match RunConfig::load(&args.config, &args.overrides) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let out_dir = args.out_dir.unwrap_or_else(|| {
        let stem = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        PathBuf::from("out").join(stem)
    });
    let opts = RunOptions { out_dir: out_dir.clone(), verify: args.verify, quiet: args.quiet };
    match run(&prepared, &opts) {
        Ok(summary) if summary.pass => ExitCode::SUCCESS,
        Ok(summary) => {
            for c in summary.checks.iter().filter(|c| c.status == CheckStatus::Fail) {
                let at = c.report.as_ref().map(|r| out_dir.join(r).display().to_string());
                eprintln!(
                    "check {} failed{}{}",
                    c.id.name(),
                    c.detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default(),
                    at.map(|p| format!(" (report: {p})")).unwrap_or_default()
                );
            }
            eprintln!("summary: {}", out_dir.join("summary.json").display());
            ExitCode::from(EXIT_FAILURE as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE as u8)
        }
    }
}
