use serde::Serialize;
use swarmcage_core::{CargoPhase, RunLog};

use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CargoMetrics {
    pub id: usize,
    pub radius: f64,
    pub final_phase: CargoPhase,
    /// Present iff the cargo was delivered.
    pub delivery_time: Option<f64>,
    pub delivery_step: Option<usize>,
    /// Caging team at the delivery step, or at the last step otherwise.
    pub final_team_size: usize,
    pub final_team: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub completed: bool,
    pub step_count: usize,
    pub simulated_time: f64,
    pub cargos: Vec<CargoMetrics>,
    /// Smallest inter-agent distance over every record.
    pub min_inter_agent_distance: Option<f64>,
    pub min_barrier: Option<f64>,
    pub final_locational_cost: f64,
    /// Kept out of the JSON so that identical runs give identical files.
    #[serde(skip)]
    pub wall_clock_s: Option<f64>,
}

fn min_distance(positions: &[swarmcage_core::Point2]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let d = positions[i].distance(positions[j]);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// Aggregates a non-empty log.
pub fn summarize(log: &RunLog, scenario: &Scenario) -> MetricsSummary {
    let last = log.records.last().expect("non-empty log");
    let cargos = (0..scenario.cargos.len())
        .map(|id| {
            let delivered = log.records.iter().find(|r| r.cargos[id].phase == CargoPhase::Delivered);
            let at = delivered.unwrap_or(last);
            CargoMetrics {
                id,
                radius: scenario.cargos[id].radius,
                final_phase: last.cargos[id].phase,
                delivery_time: delivered.map(|r| r.t),
                delivery_step: delivered.map(|r| r.step),
                final_team_size: at.cargos[id].team.len(),
                final_team: at.cargos[id].team.clone(),
            }
        })
        .collect();
    let fold_min =
        |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    MetricsSummary {
        completed: log.completed,
        step_count: log.steps(),
        simulated_time: last.t,
        cargos,
        min_inter_agent_distance: fold_min(&mut log.records.iter().filter_map(|r| min_distance(&r.positions))),
        min_barrier: fold_min(&mut log.records.iter().filter_map(|r| r.min_h)),
        final_locational_cost: last.locational_cost,
        wall_clock_s: None,
    }
}

pub fn to_json(summary: &MetricsSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("metrics serialize");
    s.push('\n');
    s
}
