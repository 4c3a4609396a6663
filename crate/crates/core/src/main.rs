use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use pwlab::cli::{execute, Cli, Outcome, Resolved};
use pwlab::Error;

fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{name}.csv"))
}

fn write(out: Option<&Path>, outcome: &Outcome) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    match out {
        Some(path) => {
            std::fs::write(path, json + "\n")?;
            for (name, csv) in &outcome.tables {
                std::fs::write(table_path(path, name), csv)?;
            }
        }
        None => match writeln!(std::io::stdout().lock(), "{json}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Resolved::from_cli(&cli).and_then(|r| execute(&r));
    match result {
        Ok(outcome) => {
            if let Err(e) = write(cli.out.as_deref(), &outcome) {
                eprintln!("pwlab: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if outcome.certified {
                ExitCode::SUCCESS
            } else {
                eprintln!("pwlab: certificate check failed; see report");
                ExitCode::from(3)
            }
        }
        Err(e @ Error::Certificate(_)) => {
            eprintln!("pwlab: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("pwlab: {e}");
            ExitCode::from(2)
        }
    }
}
