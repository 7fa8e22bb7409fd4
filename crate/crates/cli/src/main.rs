//! `corral` command-line front end.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "corral", version, about = "Corral, herd and release quantum-walk wave packets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hold a packet in one corral and measure at the revival time.
    Corral(Flags),
    /// Move the packet to a second corral in one hop.
    Herd(Flags),
    /// Move the packet through a chain of adjacent corrals.
    Multistation(Flags),
    /// Mean fidelity under coin disorder over a grid of strengths.
    DisorderSweep(Flags),
    /// Fidelity of a fixed schedule against the packet width.
    SigmaSweep(Flags),
    /// Cross-check the walk against the k-space solution.
    OracleCheck(Flags),
    /// Per-step spin-resolved probabilities.
    Frames(Flags),
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Plan file (JSON). Without it the built-in reference plan is used.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Average over the 451-state spin grid.
    #[arg(long)]
    pub grid: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub p_step: Option<f64>,
    /// Heatmap time stride.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Last step to record (frames) or to evolve (oracle-check).
    #[arg(long)]
    pub until: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Corral(f) => ("corral", f),
            Command::Herd(f) => ("herd", f),
            Command::Multistation(f) => ("multistation", f),
            Command::DisorderSweep(f) => ("disorder-sweep", f),
            Command::SigmaSweep(f) => ("sigma-sweep", f),
            Command::OracleCheck(f) => ("oracle-check", f),
            Command::Frames(f) => ("frames", f),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = cli.command.parts();
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();

    if let Err(e) = std::fs::create_dir_all(&flags.out) {
        eprintln!("error: cannot create {}: {e}", flags.out.display());
        return ExitCode::FAILURE;
    }
    let (report, report_name) = commands::run(name, flags);
    let failed = report.error.is_some();
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }

    let text = serde_json::to_string_pretty(&report).expect("reports always serialize") + "\n";
    let path = flags.out.join(report_name);
    if let Err(e) = std::fs::write(&path, text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::FAILURE;
    }
    let info = json!({
        "command": name,
        "started_unix": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
    });
    let _ = std::fs::write(flags.out.join("run_info.json"), info.to_string() + "\n");
    if failed {
        ExitCode::FAILURE
    } else {
        println!("wrote {}", path.display());
        ExitCode::SUCCESS
    }
}
