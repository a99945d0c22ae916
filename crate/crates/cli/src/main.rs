use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kjplate_cli::config::{parse_config, Command};
use kjplate_cli::pipeline::run_and_report;

/// Flow-plate interaction experiments.
#[derive(Parser, Debug)]
#[command(name = "kjplate", version)]
struct Args {
    /// One of hilbert, symbols, possio, flowmap, plate, simulate, verify-all.
    command: String,
    /// Path to a key=value config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Some(command) = Command::parse(&args.command) else {
        return usage(&format!("unknown command '{}'", args.command));
    };
    let mut text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage(&format!("cannot read {}: {e}", args.config.display())),
    };
    let names_command = text
        .lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace())
        .any(|t| t.starts_with("command="));
    if !names_command {
        text = format!("command={command}\n{text}");
    }
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors.0 {
                eprintln!("config error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    if cfg.command != command {
        return usage(&format!("config is for '{}' but '{}' was requested", cfg.command, command));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    let report = run_and_report(&cfg);
    for line in report.summary_lines() {
        println!("{line}");
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
