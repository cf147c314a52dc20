//! Dense active-set solver for Euclidean projection onto a polyhedron:
//!
//! ```text
//! minimize   ‖u − u_nom‖²
//! subject to aⱼ·u ≥ bⱼ   for every row j
//! ```
//!
//! This is the Goldfarb–Idnani dual method specialised to an identity
//! Hessian. It starts at the unconstrained minimizer `u_nom`, repeatedly
//! picks the most violated row and moves along the part of its normal that is
//! orthogonal to the working set, dropping rows whose multipliers would turn
//! negative. With H = I every subproblem is a small Gram-matrix solve.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    pub max_iterations: usize,
    /// Violation tolerance, scaled by the row norm.
    pub tolerance: f64,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { max_iterations: 100, tolerance: 1e-10 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("constraints are infeasible (row {row} cannot be satisfied)")]
    Infeasible { row: usize },
    #[error("no convergence after {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("row {row} has length {len}, expected {expected}")]
    DimensionMismatch { row: usize, len: usize, expected: usize },
    #[error("working set became numerically singular")]
    Singular,
}

/// `row · u >= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub row: Vec<f64>,
    pub bound: f64,
}

impl LinearInequality {
    pub fn new(row: Vec<f64>, bound: f64) -> Self {
        LinearInequality { row, bound }
    }

    /// `row·u − bound`; non-negative when satisfied.
    pub fn slack(&self, u: &[f64]) -> f64 {
        dot(&self.row, u) - self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub u: Vec<f64>,
    /// One multiplier per input row; zero for rows outside the final working set.
    pub multipliers: Vec<f64>,
    pub active: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// ‖u − u_nom − Σ λⱼ aⱼ‖∞
    pub stationarity: f64,
    /// max(0, bⱼ − aⱼ·u)
    pub primal: f64,
    /// max(0, −λⱼ)
    pub dual: f64,
    /// max |λⱼ (aⱼ·u − bⱼ)|
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

pub fn kkt_residuals(u_nom: &[f64], rows: &[LinearInequality], sol: &QpSolution) -> KktResiduals {
    let mut grad: Vec<f64> = sol.u.iter().zip(u_nom).map(|(u, u0)| u - u0).collect();
    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    for (c, &lambda) in rows.iter().zip(&sol.multipliers) {
        axpy(-lambda, &c.row, &mut grad);
        let s = c.slack(&sol.u);
        primal = primal.max(-s);
        dual = dual.max(-lambda);
        complementarity = complementarity.max((lambda * s).abs());
    }
    KktResiduals { stationarity: grad.iter().fold(0.0, |m, g| m.max(g.abs())), primal, dual, complementarity }
}

/// Projects `u_nom` onto `{u : rows}`; see the module docs.
pub fn project(u_nom: &[f64], rows: &[LinearInequality], opts: QpOptions) -> Result<QpSolution, QpError> {
    let n = u_nom.len();
    for (row, c) in rows.iter().enumerate() {
        if c.row.len() != n {
            return Err(QpError::DimensionMismatch { row, len: c.row.len(), expected: n });
        }
    }
    let norms: Vec<f64> = rows.iter().map(|c| dot(&c.row, &c.row).sqrt()).collect();
    // An all-zero row reads 0 >= bound.
    if let Some(row) = (0..rows.len()).find(|&j| norms[j] == 0.0 && rows[j].bound > opts.tolerance) {
        return Err(QpError::Infeasible { row });
    }

    let mut u = u_nom.to_vec();
    let mut working: Vec<usize> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut iterations = 0;

    loop {
        // Most violated row by normalized slack.
        let mut pick: Option<(usize, f64)> = None;
        for (j, c) in rows.iter().enumerate() {
            if norms[j] == 0.0 || working.contains(&j) {
                continue;
            }
            let s = c.slack(&u) / norms[j];
            if s < -opts.tolerance && pick.is_none_or(|(_, best)| s < best) {
                pick = Some((j, s));
            }
        }
        let Some((p, _)) = pick else { break };

        let a_p = &rows[p].row;
        let mut lambda_p = 0.0;
        loop {
            iterations += 1;
            if iterations > opts.max_iterations {
                return Err(QpError::MaxIterations { iterations: opts.max_iterations });
            }
            // r = (N Nᵀ)⁻¹ N a_p, z = a_p − Nᵀ r
            let r = if working.is_empty() {
                Vec::new()
            } else {
                let gram = gram_matrix(rows, &working);
                let rhs: Vec<f64> = working.iter().map(|&j| dot(&rows[j].row, a_p)).collect();
                cholesky_solve(&gram, &rhs).ok_or(QpError::Singular)?
            };
            let mut z = a_p.clone();
            for (&j, &rj) in working.iter().zip(&r) {
                axpy(-rj, &rows[j].row, &mut z);
            }

            // Dual step length: first working multiplier to hit zero.
            let mut partial: Option<(usize, f64)> = None;
            for (k, (&rk, &lk)) in r.iter().zip(&lambda).enumerate() {
                if rk > 1e-14 {
                    let t = lk / rk;
                    if partial.is_none_or(|(_, best)| t < best) {
                        partial = Some((k, t));
                    }
                }
            }
            // Primal step length: reach the boundary of row p.
            let zz = dot(&z, a_p);
            let full = (zz > 1e-14 * norms[p] * norms[p]).then(|| -rows[p].slack(&u) / zz);

            match (partial, full) {
                (None, None) => return Err(QpError::Infeasible { row: p }),
                (Some((k, t)), None) => {
                    step_multipliers(&mut lambda, &r, t);
                    lambda_p += t;
                    working.remove(k);
                    lambda.remove(k);
                }
                (partial, Some(t_full)) => {
                    let t = partial.map_or(t_full, |(_, t1)| t1.min(t_full));
                    axpy(t, &z, &mut u);
                    step_multipliers(&mut lambda, &r, t);
                    lambda_p += t;
                    match partial {
                        Some((k, t1)) if t1 < t_full => {
                            working.remove(k);
                            lambda.remove(k);
                        }
                        _ => {
                            working.push(p);
                            lambda.push(lambda_p);
                            break;
                        }
                    }
                }
            }
        }
    }

    // Re-solve the final equality system for an accurate KKT point.
    if !working.is_empty() {
        let gram = gram_matrix(rows, &working);
        let rhs: Vec<f64> = working.iter().map(|&j| rows[j].bound - dot(&rows[j].row, u_nom)).collect();
        if let Some(exact) = cholesky_solve(&gram, &rhs) {
            if exact.iter().all(|&l| l >= -opts.tolerance) {
                lambda = exact;
                u = u_nom.to_vec();
                for (&j, &l) in working.iter().zip(&lambda) {
                    axpy(l, &rows[j].row, &mut u);
                }
            }
        }
    }

    let mut multipliers = vec![0.0; rows.len()];
    for (&j, &l) in working.iter().zip(&lambda) {
        multipliers[j] = l.max(0.0);
    }
    let mut active = working;
    active.sort_unstable();
    Ok(QpSolution { u, multipliers, active, iterations })
}

fn step_multipliers(lambda: &mut [f64], r: &[f64], t: f64) {
    for (l, &rk) in lambda.iter_mut().zip(r) {
        *l = (*l - t * rk).max(0.0);
    }
}

fn gram_matrix(rows: &[LinearInequality], working: &[usize]) -> Vec<Vec<f64>> {
    working.iter().map(|&i| working.iter().map(|&j| dot(&rows[i].row, &rows[j].row)).collect()).collect()
}

/// Solves `G x = b` for symmetric positive definite `G`; `None` if a pivot
/// collapses.
fn cholesky_solve(g: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| g[i][i]).fold(0.0, f64::max);
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = g[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 1e-13 * scale {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
