use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hopfdec::commands::{cmd_convergence, cmd_geometry, cmd_hopf, cmd_mesh, cmd_sweep};
use hopfdec::config::{cache_dir, Command, ExperimentConfig, Overrides};
use hopfdec::error::{HopfError, Result};

#[derive(Parser)]
#[command(
    name = "hopfdec",
    version,
    about = "Discrete Hopf invariants and Heisenberg geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a triangulated 3-sphere mesh as versioned JSON.
    Mesh(Flags),
    /// Hopf invariant report of one map, as JSON.
    Hopf(Flags),
    /// Rotation-homotopy or radial sweep, as CSV.
    Sweep(Flags),
    /// Carnot-Caratheodory distance batches, contact and rank reports, as JSON.
    Geometry(Flags),
    /// Pullback and Hopf-invariant convergence table, as CSV.
    Convergence(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json(path: Option<&Path>, json: &str) -> Result<()> {
    let mut out = output(path)?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

fn run(command: Command, flags: Flags) -> Result<()> {
    let mut cfg = match &flags.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        command: Some(command),
        level: flags.level,
        map: flags.map,
        alpha: flags.alpha,
        out: flags.out,
        seed: flags.seed,
    });
    cfg.validate()?;
    if let Some(n) = flags.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HopfError::Precondition(format!("thread pool: {e}")))?;
    }
    let cache = cache_dir();
    let cache = cache.as_deref();
    let out = cfg.output_path.as_deref();
    let provenance = cfg.provenance();
    match command {
        Command::Mesh => {
            let summary = cmd_mesh(&cfg, cache)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Hopf => emit_json(out, &cmd_hopf(&cfg, cache)?.to_json())?,
        Command::Geometry => emit_json(out, &cmd_geometry(&cfg, cache)?.to_json())?,
        Command::Sweep => cmd_sweep(&cfg, cache)?.write_csv(output(out)?, Some(&provenance))?,
        Command::Convergence => {
            cmd_convergence(&cfg, cache)?.write_csv(output(out)?, Some(&provenance))?
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Mesh(f) => (Command::Mesh, f),
        Cmd::Hopf(f) => (Command::Hopf, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::Geometry(f) => (Command::Geometry, f),
        Cmd::Convergence(f) => (Command::Convergence, f),
    };
    match run(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hopfdec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
