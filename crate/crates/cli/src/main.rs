use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swarmcage_cli::app::{self, RunRequest};

#[derive(Parser)]
#[command(name = "swarmcage", version, about = "Density-driven swarm caging and transport simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write CSV logs, metrics and SVG figures.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated snapshot times in seconds.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Render one step of a trajectory log as an SVG snapshot.
    Render {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        step: usize,
        /// Output path; defaults to `snapshot_<step>.svg` next to the log.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, seed, snapshots, max_steps } => {
            let req = RunRequest { scenario, out, seed, snapshots, max_steps };
            app::run(&req).map(|report| {
                let s = &report.summary;
                for c in &s.cargos {
                    match c.delivery_time {
                        Some(t) => println!("cargo {}: delivered at {t:.2} s, team {}", c.id, c.final_team_size),
                        None => println!("cargo {}: {:?}, team {}", c.id, c.final_phase, c.final_team_size),
                    }
                }
                println!("{} steps, outputs in {}", s.step_count, req.out.display());
                if let Some(w) = s.wall_clock_s {
                    eprintln!("wall-clock: {w:.2} s");
                }
            })
        }
        Command::Validate { scenario } => app::validate(&scenario).map(|s| {
            println!("ok: {} agents, {} cargos", s.config.n_agents, s.cargos.len());
        }),
        Command::Render { log, scenario, step, out } => {
            app::render(&log, &scenario, step, out.as_deref()).map(|p| println!("wrote {}", p.display()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
