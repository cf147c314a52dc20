//! Pairwise control barrier functions and the per-step safety filter.
//!
//! For agents i < j the barrier is `h = ‖pᵢ − pⱼ‖² − d_min²`. Under
//! single-integrator dynamics the forward-invariance condition
//! `ḣ + γh ≥ 0` is linear in the stacked control vector:
//!
//! ```text
//! 2(pᵢ − pⱼ)·uᵢ − 2(pᵢ − pⱼ)·uⱼ ≥ −γh
//! ```
//!
//! Optional disc obstacles (cargo bodies) add one row per nearby agent with
//! `h = ‖pᵢ − c‖² − R²`, measured relative to the obstacle's velocity.
//!
//! The filter returns the stacked control closest to the nominal one that
//! satisfies every such row.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Vec2};
use crate::qp::{self, LinearInequality, QpError, QpOptions, QpSolution};

/// Gain for the linear row under a forward-Euler step of length `dt`.
///
/// Because `h` is a convex quadratic of the relative position, a control
/// meeting `∇h·u ≥ −γ_d h` with `γ_d = (1 − e^{−γ dt})/dt` guarantees
/// `h(k+1) ≥ e^{−γ dt} h(k)`, the sampled form of `ḣ ≥ −γh`.
pub fn discrete_gamma(gamma: f64, dt: f64) -> f64 {
    -(-gamma * dt).exp_m1() / dt
}

/// Separation beyond which a pair row can never bind when each agent moves
/// at most `speed`: there `|ḣ| ≤ 4·d·speed ≤ γ(d² − d_min²)`. Pruning pairs
/// farther apart than this leaves the QP solution unchanged.
pub fn non_binding_radius(d_min: f64, gamma: f64, speed: f64) -> f64 {
    (2.0 * speed + (4.0 * speed * speed + gamma * gamma * d_min * d_min).sqrt()) / gamma
}

/// `‖pᵢ − pⱼ‖² − d_min²`
pub fn barrier_value(p_i: Point2, p_j: Point2, d_min: f64) -> f64 {
    p_i.distance_squared(p_j) - d_min * d_min
}

/// Smallest barrier value over all unordered pairs, `None` for fewer than two agents.
pub fn min_barrier(positions: &[Point2], d_min: f64) -> Option<f64> {
    let mut min: Option<f64> = None;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let h = barrier_value(positions[i], positions[j], d_min);
            min = Some(min.map_or(h, |m| m.min(h)));
        }
    }
    min
}

/// One CBF row over the stacked control `[u₀ₓ, u₀ᵧ, u₁ₓ, …]`.
///
/// Agent `i`'s block is `gradient`, agent `j`'s block is `−gradient`; the
/// row reads `row·u ≥ bound` with `bound = −γh`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyConstraint {
    pub pair: (usize, usize),
    /// ∂h/∂pᵢ = 2(pᵢ − pⱼ)
    pub gradient: Vec2,
    pub barrier: f64,
    pub bound: f64,
}

impl SafetyConstraint {
    pub fn row(&self, n_agents: usize) -> Vec<f64> {
        let mut row = vec![0.0; 2 * n_agents];
        let (i, j) = self.pair;
        row[2 * i] = self.gradient.x;
        row[2 * i + 1] = self.gradient.y;
        row[2 * j] = -self.gradient.x;
        row[2 * j + 1] = -self.gradient.y;
        row
    }

    /// `ḣ` for the stacked control `u`.
    pub fn rate(&self, u: &[f64]) -> f64 {
        let (i, j) = self.pair;
        self.gradient.x * (u[2 * i] - u[2 * j]) + self.gradient.y * (u[2 * i + 1] - u[2 * j + 1])
    }

    pub fn is_satisfied(&self, u: &[f64], tol: f64) -> bool {
        self.rate(u) >= self.bound - tol
    }
}

/// One constraint for every unordered pair closer than `r_active`.
pub fn build_constraints(positions: &[Point2], d_min: f64, gamma: f64, r_active: f64) -> Vec<SafetyConstraint> {
    let mut out = Vec::new();
    let reach = r_active * r_active;
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let diff = positions[i] - positions[j];
            if diff.norm_squared() > reach {
                continue;
            }
            let barrier = barrier_value(positions[i], positions[j], d_min);
            out.push(SafetyConstraint { pair: (i, j), gradient: diff * 2.0, barrier, bound: -gamma * barrier });
        }
    }
    out
}

/// A moving disc agents may touch but not enter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscObstacle {
    pub center: Point2,
    pub radius: f64,
    pub velocity: Vec2,
}

/// Single-agent barrier row `gradient·uᵢ ≥ bound` against a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleConstraint {
    pub agent: usize,
    /// ∂h/∂pᵢ = 2(pᵢ − c)
    pub gradient: Vec2,
    pub barrier: f64,
    /// `−γh + gradient·v_c`, before any drift shift.
    pub bound: f64,
}

impl ObstacleConstraint {
    pub fn row(&self, n_agents: usize) -> Vec<f64> {
        let mut row = vec![0.0; 2 * n_agents];
        row[2 * self.agent] = self.gradient.x;
        row[2 * self.agent + 1] = self.gradient.y;
        row
    }

    pub fn rate(&self, u: &[f64]) -> f64 {
        self.gradient.x * u[2 * self.agent] + self.gradient.y * u[2 * self.agent + 1]
    }
}

/// Rows for every agent whose distance to a rim is below `r_active`.
pub fn build_obstacle_constraints(
    positions: &[Point2],
    obstacles: &[DiscObstacle],
    gamma: f64,
    r_active: f64,
) -> Vec<ObstacleConstraint> {
    let mut out = Vec::new();
    for (agent, &p) in positions.iter().enumerate() {
        for ob in obstacles {
            let diff = p - ob.center;
            if diff.norm() - ob.radius > r_active {
                continue;
            }
            let barrier = diff.norm_squared() - ob.radius * ob.radius;
            let gradient = diff * 2.0;
            out.push(ObstacleConstraint {
                agent,
                gradient,
                barrier,
                bound: -gamma * barrier + gradient.dot(ob.velocity),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Stacked nominal control, length 2N.
    pub u_nom: Vec<f64>,
    pub constraints: Vec<SafetyConstraint>,
    pub obstacles: Vec<ObstacleConstraint>,
}

impl QpProblem {
    pub fn new(nominal: &[Vec2], constraints: Vec<SafetyConstraint>) -> Self {
        QpProblem { u_nom: stack(nominal), constraints, obstacles: Vec::new() }
    }

    pub fn with_obstacles(mut self, obstacles: Vec<ObstacleConstraint>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn n_agents(&self) -> usize {
        self.u_nom.len() / 2
    }

    /// Constraints as dense rows, with the bound shifted by `−row·drift`
    /// for agents that are displaced independently of their control.
    pub fn rows(&self, drift: Option<&[f64]>) -> Vec<LinearInequality> {
        let n = self.n_agents();
        let pairs = self.constraints.iter().map(|c| {
            let shift = drift.map_or(0.0, |w| c.rate(w));
            LinearInequality::new(c.row(n), c.bound - shift)
        });
        let discs = self.obstacles.iter().map(|c| {
            let shift = drift.map_or(0.0, |w| c.rate(w));
            LinearInequality::new(c.row(n), c.bound - shift)
        });
        pairs.chain(discs).collect()
    }
}

/// Joint solve over all 2N control variables.
pub fn solve_qp(problem: &QpProblem, opts: QpOptions) -> Result<QpSolution, QpError> {
    qp::project(&problem.u_nom, &problem.rows(None), opts)
}

/// Per-agent solve in which each agent of a pair carries half of the
/// required barrier rate: `∂h/∂pᵢ·uᵢ ≥ (bound − drift term)/2`.
pub fn solve_decentralized(problem: &QpProblem, drift: Option<&[f64]>, opts: QpOptions) -> Result<Vec<f64>, QpError> {
    let n = problem.n_agents();
    let mut u = problem.u_nom.clone();
    for agent in 0..n {
        let mut rows: Vec<LinearInequality> = problem
            .constraints
            .iter()
            .filter_map(|c| {
                let g = if c.pair.0 == agent {
                    c.gradient
                } else if c.pair.1 == agent {
                    -c.gradient
                } else {
                    return None;
                };
                let shift = drift.map_or(0.0, |w| c.rate(w));
                Some(LinearInequality::new(vec![g.x, g.y], 0.5 * (c.bound - shift)))
            })
            .collect();
        rows.extend(problem.obstacles.iter().filter(|c| c.agent == agent).map(|c| {
            let shift = drift.map_or(0.0, |w| c.rate(w));
            LinearInequality::new(vec![c.gradient.x, c.gradient.y], c.bound - shift)
        }));
        let local = [problem.u_nom[2 * agent], problem.u_nom[2 * agent + 1]];
        let sol = qp::project(&local, &rows, opts)?;
        u[2 * agent] = sol.u[0];
        u[2 * agent + 1] = sol.u[1];
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyParams {
    pub d_min: f64,
    pub gamma: f64,
    pub r_active: f64,
    pub u_max: f64,
    pub decentralized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub controls: Vec<Vec2>,
    pub constraint_count: usize,
    pub active_count: usize,
    /// Whether the filtered vector was uniformly scaled down to respect `u_max`.
    pub rescaled: bool,
}

/// Runs the CBF filter on nominal controls.
///
/// `drift` is the per-agent velocity imposed from outside the controller
/// (cargo dragging); barrier rates account for it. `obstacles` adds disc
/// rows; pass an empty slice for pairwise safety only. If any filtered control
/// exceeds `u_max`, the whole stacked vector is scaled by one common factor,
/// which keeps every row with a non-positive bound satisfied; the scaling is
/// skipped when it would break a row.
pub fn filter_controls(
    nominal: &[Vec2],
    positions: &[Point2],
    drift: Option<&[Vec2]>,
    obstacles: &[DiscObstacle],
    params: &SafetyParams,
    opts: QpOptions,
) -> Result<FilterOutcome, QpError> {
    let constraints = build_constraints(positions, params.d_min, params.gamma, params.r_active);
    let discs = build_obstacle_constraints(positions, obstacles, params.gamma, params.r_active);
    let problem = QpProblem::new(nominal, constraints).with_obstacles(discs);
    let drift = drift.map(stack);
    let rows = problem.rows(drift.as_deref());

    let (u, active_count) = if params.decentralized {
        let u = solve_decentralized(&problem, drift.as_deref(), opts)?;
        let active = rows.iter().filter(|r| r.slack(&u).abs() <= 1e-9).count();
        (u, active)
    } else {
        let sol = qp::project(&problem.u_nom, &rows, opts)?;
        let active = sol.active.len();
        (sol.u, active)
    };

    let peak = u.chunks_exact(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
    let mut out = u;
    let mut rescaled = false;
    if peak > params.u_max {
        let alpha = params.u_max / peak;
        let scaled: Vec<f64> = out.iter().map(|v| v * alpha).collect();
        if rows.iter().all(|r| r.slack(&scaled) >= -1e-12) {
            out = scaled;
            rescaled = true;
        }
    }

    Ok(FilterOutcome { controls: unstack(&out), constraint_count: rows.len(), active_count, rescaled })
}

pub fn stack(v: &[Vec2]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y]).collect()
}

pub fn unstack(u: &[f64]) -> Vec<Vec2> {
    u.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}
