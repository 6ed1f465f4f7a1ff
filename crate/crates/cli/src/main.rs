use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tdras_cli::{init_thread_pool, run::run_file, tables::tables_file, CliError};

/// Restricted-active-space dynamics for trapped bosons.
#[derive(Parser)]
#[command(name = "tdras", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single relaxation, propagation, quench, dimension or cost task.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relax every cell of a ground-state table.
    Tables {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_thread_pool().and_then(|_| match &cli.command {
        Command::Run { config, out } => run_file(config, out.as_deref()).map(|s| {
            println!("{}", serde_json::to_string(&s).unwrap_or_default());
        }),
        Command::Tables { config, out } => tables_file(config, out.as_deref()).map(|rows| {
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("{} cells, {} failed", rows.len(), failed);
        }),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &CliError) {
    eprintln!("tdras: {e}");
}
