//! Simulation engine: agent and cargo state, the per-step pipeline, and
//! whole-run orchestration.

mod cargo;
mod config;

pub use cargo::{
    caging_status, cargo_update, largest_angular_gap, nearest_wall_direction, CagingStatus, Cargo, CargoPhase,
    CargoSpec, TransportParams,
};
pub use config::{ValidationError, WorldConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coordination::{centroids, locational_cost, nominal_control};
use crate::density::{refresh_components, update_detection, DensityError, DensityField};
use crate::geometry::{compute_voronoi, GeometryError, Point2, Quadrature, Vec2, VoronoiCell};
use crate::qp::{QpError, QpOptions};
use crate::safety::{filter_controls, min_barrier, DiscObstacle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub position: Point2,
    pub control: Vec2,
    /// Cargo currently sensed, if any.
    pub detected: Option<usize>,
}

impl AgentState {
    pub fn new(id: usize, position: Point2) -> Self {
        AgentState { id, position, control: Vec2::ZERO, detected: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CargoSnapshot {
    pub id: usize,
    pub center: Point2,
    pub radius: f64,
    pub phase: CargoPhase,
    pub transport_dir: Option<Vec2>,
    pub team: Vec<usize>,
    /// Displacement applied during the step that produced the record.
    pub displacement: Vec2,
}

/// State after one step. Record 0 is the initial configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub positions: Vec<Point2>,
    /// Controls applied to reach `positions`; zero in record 0.
    pub controls: Vec<Vec2>,
    pub detected: Vec<Option<usize>>,
    /// Smallest pairwise barrier value; `None` with fewer than two agents.
    pub min_h: Option<f64>,
    /// H on the partition and field from which this step's controls were
    /// computed (for record 0: the initial partition).
    pub locational_cost: f64,
    pub cargos: Vec<CargoSnapshot>,
    pub active_components: usize,
    /// Barrier rows in the QP, and how many were active at the solution.
    pub constraint_count: usize,
    pub active_constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("density: {0}")]
    Density(#[from] DensityError),
    #[error("geometry failure at step {step}: {source}")]
    Geometry { step: usize, source: GeometryError },
    #[error("safety QP failed at step {step}: {source}")]
    Qp { step: usize, source: QpError },
}

#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    agents: Vec<AgentState>,
    cargos: Vec<Cargo>,
    field: DensityField,
    step: usize,
}

/// Jittered grid block centered on the domain, filled row-major.
pub fn initial_positions(config: &WorldConfig) -> Vec<Point2> {
    let n = config.n_agents;
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols);
    let s = config.start_spacing;
    let center = config.domain.center();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..n)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            let base = center
                + Point2::new((c as f64 - (cols - 1) as f64 / 2.0) * s, (r as f64 - (rows - 1) as f64 / 2.0) * s);
            let jitter = Point2::new(rng.gen_range(-0.1..=0.1), rng.gen_range(-0.1..=0.1)) * s;
            config.domain.clamp(base + jitter)
        })
        .collect()
}

fn validate_cargos(config: &WorldConfig, cargos: &[CargoSpec]) -> Result<(), ValidationError> {
    for (i, c) in cargos.iter().enumerate() {
        if !(c.radius.is_finite() && c.radius > 0.0) {
            return Err(ValidationError::new("positive_cargo_radius", format!("cargo {i} radius {}", c.radius)));
        }
        if !c.center.is_finite() || config.domain.distance_to_boundary(c.center) <= c.radius {
            return Err(ValidationError::new("cargo_in_domain", format!("cargo {i} does not fit inside the domain")));
        }
        if let Some(g) = c.goal {
            if g.normalized().is_none() || !g.is_finite() {
                return Err(ValidationError::new(
                    "cargo_goal_direction",
                    format!("cargo {i} goal must be a nonzero vector"),
                ));
            }
        }
        for (j, other) in cargos.iter().enumerate().take(i) {
            let gap = c.center.distance(other.center) - c.radius - other.radius;
            if gap < config.r_sense {
                return Err(ValidationError::new(
                    "cargo_clearance",
                    format!("cargos {j} and {i} are {gap:.3} m apart, need at least r_sense = {}", config.r_sense),
                ));
            }
        }
    }
    Ok(())
}

fn validate_starts(config: &WorldConfig, cargos: &[CargoSpec], starts: &[Point2]) -> Result<(), ValidationError> {
    if starts.len() != config.n_agents {
        return Err(ValidationError::new(
            "start_count",
            format!("{} start positions for {} agents", starts.len(), config.n_agents),
        ));
    }
    for (i, p) in starts.iter().enumerate() {
        if !p.is_finite() || !config.domain.contains(*p, 0.0) {
            return Err(ValidationError::new("start_in_domain", format!("agent {i} starts outside the domain")));
        }
    }
    if config.cargo_exclusion {
        for (i, p) in starts.iter().enumerate() {
            if cargos.iter().any(|c| p.distance(c.center) < c.radius) {
                return Err(ValidationError::new("start_outside_cargo", format!("agent {i} starts inside a cargo")));
            }
        }
    }
    if let Some(h) = min_barrier(starts, config.d_min) {
        if h < 0.0 {
            return Err(ValidationError::new("start_separation", "two agents start closer than d_min"));
        }
    }
    Ok(())
}

/// Full pre-run validation; returns the start positions that would be used.
pub fn validate_setup(
    config: &WorldConfig,
    cargos: &[CargoSpec],
    starts: Option<&[Point2]>,
) -> Result<Vec<Point2>, ValidationError> {
    config.validate()?;
    validate_cargos(config, cargos)?;
    let positions = match starts {
        Some(s) => s.to_vec(),
        None => initial_positions(config),
    };
    validate_starts(config, cargos, &positions)?;
    Ok(positions)
}

impl World {
    /// Builds a world from a validated config. Without explicit `starts`
    /// the agents are placed with [`initial_positions`].
    pub fn new(config: WorldConfig, cargos: &[CargoSpec], starts: Option<&[Point2]>) -> Result<World, WorldError> {
        let positions = validate_setup(&config, cargos, starts)?;
        let agents = positions.iter().enumerate().map(|(i, &p)| AgentState::new(i, p)).collect();
        let cargos = cargos.iter().enumerate().map(|(i, c)| Cargo::new(i, c.center, c.radius, c.goal)).collect();
        let field = DensityField::new(config.phi0, config.n_agents)?;
        Ok(World { config, agents, cargos, field, step: 0 })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn cargos(&self) -> &[Cargo] {
        &self.cargos
    }

    pub fn field(&self) -> &DensityField {
        &self.field
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.agents.iter().map(|a| a.position).collect()
    }

    pub fn all_delivered(&self) -> bool {
        self.cargos.iter().all(|c| c.phase == CargoPhase::Delivered)
    }

    fn quadrature(&self) -> Quadrature {
        Quadrature::new(self.config.quadrature_depth)
    }

    /// Sensing, density refresh and the Voronoi partition.
    fn sense_and_partition(&mut self) -> Result<Vec<VoronoiCell>, WorldError> {
        let sensed: Vec<Cargo> = self
            .cargos
            .iter()
            .filter(|c| !(self.config.release_after_delivery && c.phase == CargoPhase::Delivered))
            .cloned()
            .collect();
        let detections = update_detection(&self.agents, &sensed, self.config.r_sense);
        for det in &detections {
            self.agents[det.agent].detected = det.cargo;
        }
        self.field = refresh_components(
            &self.field,
            &detections,
            &self.agents,
            &self.cargos,
            self.config.scaling_law(),
            self.config.peak_anchor,
        );
        compute_voronoi(&self.positions(), &self.config.domain)
            .map_err(|source| WorldError::Geometry { step: self.step, source })
    }

    fn snapshot(&self, cost: f64, displacements: &[Vec2], counts: (usize, usize)) -> StepRecord {
        StepRecord {
            step: self.step,
            t: self.time(),
            positions: self.positions(),
            controls: self.agents.iter().map(|a| a.control).collect(),
            detected: self.agents.iter().map(|a| a.detected).collect(),
            min_h: min_barrier(&self.positions(), self.config.d_min),
            locational_cost: cost,
            cargos: self
                .cargos
                .iter()
                .zip(displacements)
                .map(|(c, &d)| CargoSnapshot {
                    id: c.id,
                    center: c.center,
                    radius: c.radius,
                    phase: c.phase,
                    transport_dir: c.transport_dir,
                    team: c.team.clone(),
                    displacement: d,
                })
                .collect(),
            active_components: self.field.active_count(),
            constraint_count: counts.0,
            active_constraints: counts.1,
        }
    }

    /// Record of the current state without advancing. Runs sensing so the
    /// detections and cost are meaningful.
    pub fn initial_record(&mut self) -> Result<StepRecord, WorldError> {
        let cells = self.sense_and_partition()?;
        let cost = locational_cost(&cells, &self.positions(), &self.field, self.quadrature());
        Ok(self.snapshot(cost, &vec![Vec2::ZERO; self.cargos.len()], (0, 0)))
    }

    /// Domain clamp followed, when enabled, by radial projection out of
    /// every cargo disc. The disc barrier rows keep agents outside up to
    /// discretization error, so the projection only removes that residue.
    fn confine(&self, p: Point2) -> Point2 {
        let mut p = self.config.domain.clamp(p);
        if self.config.cargo_exclusion {
            for c in &self.cargos {
                let offset = p - c.center;
                if offset.norm() < c.radius {
                    let dir = offset.normalized().unwrap_or(Point2::new(1.0, 0.0));
                    p = self.config.domain.clamp(c.center + dir * c.radius);
                }
            }
        }
        p
    }

    /// Velocity each agent inherits from the cargo it is caging.
    fn drift(&self) -> Vec<Vec2> {
        let mut drift = vec![Vec2::ZERO; self.agents.len()];
        let mut claimed = vec![false; self.agents.len()];
        let cfg = &self.config;
        for cargo in &self.cargos {
            let v = cargo.transport_velocity(&cfg.domain, cfg.v_cargo, cfg.taper_dist);
            if v == Vec2::ZERO {
                continue;
            }
            for &a in &cargo.team {
                if !claimed[a] {
                    claimed[a] = true;
                    drift[a] = v;
                }
            }
        }
        drift
    }

    /// Advances one step through the fixed pipeline and returns its record.
    pub fn step(&mut self) -> Result<StepRecord, WorldError> {
        let cells = self.sense_and_partition()?;
        let positions = self.positions();
        let q = self.quadrature();
        let centers =
            centroids(&cells, &self.field, q).map_err(|source| WorldError::Geometry { step: self.step, source })?;
        let cost = locational_cost(&cells, &positions, &self.field, q);

        let cfg = self.config.clone();
        let nominal: Vec<Vec2> =
            positions.iter().zip(&centers).map(|(&p, &c)| nominal_control(p, c, cfg.k, cfg.u_max)).collect();
        let drift = self.drift();
        let has_drift = drift.iter().any(|d| *d != Vec2::ZERO);
        let discs: Vec<DiscObstacle> = if cfg.cargo_exclusion {
            self.cargos
                .iter()
                .map(|c| DiscObstacle {
                    center: c.center,
                    radius: c.radius,
                    velocity: c.transport_velocity(&cfg.domain, cfg.v_cargo, cfg.taper_dist),
                })
                .collect()
        } else {
            Vec::new()
        };
        let outcome = filter_controls(
            &nominal,
            &positions,
            has_drift.then_some(drift.as_slice()),
            &discs,
            &cfg.safety_params(),
            QpOptions::default(),
        )
        .map_err(|source| WorldError::Qp { step: self.step, source })?;

        for (i, &u) in outcome.controls.iter().enumerate() {
            self.agents[i].control = u;
            self.agents[i].position = self.confine(self.agents[i].position + u * cfg.dt);
        }

        let moved = self.positions();
        let params = cfg.transport_params();
        let mut dragged = vec![false; self.agents.len()];
        let mut displacements = Vec::with_capacity(self.cargos.len());
        for k in 0..self.cargos.len() {
            if self.cargos[k].phase == CargoPhase::Delivered {
                displacements.push(Vec2::ZERO);
                continue;
            }
            let status = caging_status(&self.cargos[k], &moved, cfg.contact_band, cfg.max_gap, cfg.min_team);
            let (next, disp) = cargo_update(&self.cargos[k], &status, &cfg.domain, &params, cfg.dt);
            self.cargos[k] = next;
            if disp != Vec2::ZERO {
                for &a in &self.cargos[k].team {
                    if !dragged[a] {
                        dragged[a] = true;
                        self.agents[a].position += disp;
                    }
                }
            }
            displacements.push(disp);
        }
        if displacements.iter().any(|d| *d != Vec2::ZERO) {
            // A moving cargo may sweep over bystanders, and dragged agents
            // may be pushed past the boundary.
            for i in 0..self.agents.len() {
                self.agents[i].position = self.confine(self.agents[i].position);
            }
        }

        self.step += 1;
        Ok(self.snapshot(cost, &displacements, (outcome.constraint_count, outcome.active_count)))
    }
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<StepRecord>,
    /// Every cargo reached Delivered (vacuously true without cargos, in
    /// which case the run uses all `max_steps`).
    pub completed: bool,
}

impl RunLog {
    pub fn steps(&self) -> usize {
        self.records.last().map_or(0, |r| r.step)
    }
}

/// A run that stopped on an error; `log` holds every record produced
/// before the failing step.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("run aborted after {} steps: {error}", log.steps())]
pub struct RunFailure {
    pub log: RunLog,
    pub error: WorldError,
}

/// Steps until every cargo is delivered or `max_steps` is reached.
pub fn run(world: &mut World) -> Result<RunLog, RunFailure> {
    let mut records = Vec::with_capacity(world.config.max_steps.min(100_000) + 1);
    let fail = |records: Vec<StepRecord>, error| RunFailure { log: RunLog { records, completed: false }, error };
    match world.initial_record() {
        Ok(r) => records.push(r),
        Err(e) => return Err(fail(records, e)),
    }
    let has_cargos = !world.cargos.is_empty();
    while world.step < world.config.max_steps && !(has_cargos && world.all_delivered()) {
        match world.step() {
            Ok(r) => records.push(r),
            Err(e) => return Err(fail(records, e)),
        }
    }
    Ok(RunLog { records, completed: has_cargos && world.all_delivered() })
}

/// Convenience wrapper building the world and running it.
pub fn run_config(config: WorldConfig, cargos: &[CargoSpec], starts: Option<&[Point2]>) -> Result<RunLog, RunFailure> {
    let mut world = World::new(config, cargos, starts)
        .map_err(|error| RunFailure { log: RunLog { records: Vec::new(), completed: false }, error })?;
    run(&mut world)
}
