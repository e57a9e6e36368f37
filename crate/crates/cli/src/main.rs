use std::path::PathBuf;
use std::process::ExitCode;

use cdglue_cli::{builtins, load, run, CliError};
use clap::{Parser, Subcommand};

/// Curvature-dimension checks for glued weighted manifolds.
#[derive(Parser)]
#[command(name = "cdglue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or `builtin:<name>`.
    Run {
        scenario: String,
        /// Output directory for report.json and sweep CSVs.
        #[arg(long, default_value = "cdglue-out")]
        out: PathBuf,
    },
    /// List the builtin scenarios.
    Builtins,
    /// Print a builtin scenario as TOML.
    Describe { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Run { scenario, out } => {
            let s = load(&scenario)?;
            let report = run(&s)?;
            let dir = out.join(&s.name);
            for t in &report.tasks {
                let status = serde_json::to_value(t.status).expect("status serializes");
                let msg = t.error.as_ref().map(|e| format!(": {}", e.message)).unwrap_or_default();
                println!("[{}] {:<18} {}{msg}", t.index, t.kind, status.as_str().unwrap_or("?"));
            }
            for p in report.write(&dir)? {
                println!("wrote {}", p.display());
            }
            println!("status: {:?} (exit {})", report.status, report.exit_code);
            Ok(report.exit_code)
        }
        Command::Builtins => {
            for b in &builtins::BUILTINS {
                println!("{:<22} {}", b.name, b.summary);
            }
            Ok(0)
        }
        Command::Describe { name } => {
            print!("{}", builtins::find(&name)?.source);
            Ok(0)
        }
    }
}
