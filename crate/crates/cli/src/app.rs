//! Subcommand implementations, kept separate from argument parsing so they
//! can be driven from tests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use swarmcage_core::world::CargoSnapshot;
use swarmcage_core::{run_config, CargoPhase, RunFailure, RunLog, StepRecord};
use thiserror::Error;

use crate::export::{self, ExportError};
use crate::metrics::{self, MetricsSummary};
use crate::scenario::{load_scenario, Scenario, ScenarioError};
use crate::svg::{self, RenderOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Run(Box<RunFailure>),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for bad input (parse or validation), 2 for failures at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(ScenarioError::Io { .. }) => 2,
            CliError::Scenario(_) | CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// Snapshot times in seconds; empty renders the first and last records.
    pub snapshots: Vec<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: MetricsSummary,
    pub files: Vec<PathBuf>,
}

/// Index of the first record at or after `t`, else the last one.
fn record_near(log: &RunLog, t: f64) -> usize {
    log.records.iter().position(|r| r.t >= t - 1e-9).unwrap_or(log.records.len() - 1)
}

fn write_outputs(
    log: &RunLog,
    scenario: &Scenario,
    req: &RunRequest,
) -> Result<(Vec<PathBuf>, MetricsSummary), CliError> {
    std::fs::create_dir_all(&req.out).map_err(io_err(&req.out))?;
    let mut files = Vec::new();
    let path = req.out.join("trajectory.csv");
    export::export_trajectory(log, &path)?;
    files.push(path);
    let path = req.out.join("cargos.csv");
    export::export_cargos(log, &path)?;
    files.push(path);

    let summary = metrics::summarize(log, scenario);
    let path = req.out.join("metrics.json");
    std::fs::write(&path, metrics::to_json(&summary)).map_err(io_err(&path))?;
    files.push(path);

    let opts = RenderOptions::default();
    let mut picks: Vec<usize> = if req.snapshots.is_empty() {
        vec![0, log.records.len() - 1]
    } else {
        req.snapshots.iter().map(|&t| record_near(log, t)).collect()
    };
    picks.dedup();
    for idx in picks {
        let rec = &log.records[idx];
        let path = req.out.join(format!("snapshot_{:06}.svg", rec.step));
        svg::write_svg(&path, &svg::render_snapshot(rec, scenario, &opts)).map_err(io_err(&path))?;
        files.push(path);
    }
    let path = req.out.join("trajectories.svg");
    svg::write_svg(&path, &svg::render_trajectories(log, scenario, &opts)).map_err(io_err(&path))?;
    files.push(path);
    Ok((files, summary))
}

/// `run`: simulate, then export logs, metrics and figures. On a mid-run
/// failure the partial log is still written before the error is returned.
pub fn run(req: &RunRequest) -> Result<RunReport, CliError> {
    let mut scenario = load_scenario(&req.scenario)?;
    if let Some(seed) = req.seed {
        scenario.config.seed = seed;
    }
    if let Some(max) = req.max_steps {
        scenario.config.max_steps = max;
    }
    scenario.validate().map_err(ScenarioError::from)?;
    if req.snapshots.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CliError::Usage("snapshot times must be non-negative".into()));
    }

    let started = Instant::now();
    let outcome = run_config(scenario.config.clone(), &scenario.cargos, scenario.starts.as_deref());
    let elapsed = started.elapsed().as_secs_f64();
    match outcome {
        Ok(log) => {
            let (files, mut summary) = write_outputs(&log, &scenario, req)?;
            summary.wall_clock_s = Some(elapsed);
            Ok(RunReport { summary, files })
        }
        Err(failure) => {
            if !failure.log.records.is_empty() {
                write_outputs(&failure.log, &scenario, req)?;
            }
            Err(CliError::Run(Box::new(failure)))
        }
    }
}

/// `validate`: parse and validate only.
pub fn validate(path: &Path) -> Result<Scenario, CliError> {
    Ok(load_scenario(path)?)
}

/// `render`: snapshot of step `step` from a trajectory log. Cargo states
/// come from a `cargos.csv` next to the log when present; otherwise the
/// scenario's initial cargos are drawn.
pub fn render(log_path: &Path, scenario_path: &Path, step: usize, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let rows = export::read_trajectory(log_path)?;
    let sidecar = log_path.with_file_name("cargos.csv");
    let cargo_rows = if sidecar.exists() { export::read_cargos(&sidecar)? } else { Vec::new() };
    let mut record: StepRecord = export::record_at(step, &rows, &cargo_rows, scenario.config.d_min)
        .ok_or_else(|| CliError::Usage(format!("step {step} is not in {}", log_path.display())))?;
    if record.cargos.is_empty() {
        record.cargos = scenario
            .cargos
            .iter()
            .enumerate()
            .map(|(id, c)| CargoSnapshot {
                id,
                center: c.center,
                radius: c.radius,
                phase: CargoPhase::Idle,
                transport_dir: None,
                team: Vec::new(),
                displacement: Default::default(),
            })
            .collect();
    }
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => log_path.with_file_name(format!("snapshot_{step:06}.svg")),
    };
    let svg = svg::render_snapshot(&record, &scenario, &RenderOptions::default());
    svg::write_svg(&target, &svg).map_err(io_err(&target))?;
    Ok(target)
}
