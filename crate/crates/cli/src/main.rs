use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stvem_cli::config::RunConfig;
use stvem_cli::rates::fit_rates;
use stvem_cli::table::read_csv;
use stvem_cli::{run, CliError};

/// Space-time virtual element studies for the heat equation.
#[derive(Parser)]
#[command(name = "stvem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a TOML config.
    Run { config: PathBuf },
    /// Fit convergence rates to an existing study.csv and print them as JSON.
    Rates { csv: PathBuf },
    /// Write the meshes a study starts from, without solving.
    MeshDump { config: PathBuf },
}

fn thread_pool() -> Result<(), CliError> {
    let Ok(v) = std::env::var("STVEM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config("STVEM_THREADS", format!("`{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("STVEM_THREADS", e.to_string()))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    thread_pool()?;
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let (rows, summary) = run::run(&cfg)?;
            let last = rows.last().expect("at least one row");
            println!(
                "{} rows written to {}; final N_dofs {}, EY {:.4e}, eta {:.4e}",
                summary.rows,
                cfg.output_dir.display(),
                last.n_dofs,
                last.ey,
                last.eta
            );
        }
        Command::Rates { csv } => {
            let rows = read_csv(std::fs::File::open(csv)?)?;
            let s = fit_rates(&rows)?;
            println!("{}", serde_json::to_string_pretty(&s).map_err(std::io::Error::from)?);
        }
        Command::MeshDump { config } => {
            let cfg = RunConfig::load(&config)?;
            let n = run::mesh_dump(&cfg)?;
            println!("{n} meshes written to {}", cfg.output_dir.join("meshes").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stvem: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
