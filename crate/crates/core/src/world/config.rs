use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{PeakAnchor, ScalingLaw};
use crate::geometry::{quadrature, Point2, Rect};
use crate::safety::{discrete_gamma, non_binding_radius, SafetyParams};

use super::cargo::TransportParams;

/// A violated configuration constraint, identified by a stable name.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name}: {detail}")]
pub struct ValidationError {
    pub name: &'static str,
    pub detail: String,
}

impl ValidationError {
    pub fn new(name: &'static str, detail: impl Into<String>) -> Self {
        ValidationError { name, detail: detail.into() }
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub domain: Rect,
    pub n_agents: usize,
    /// CVT gain.
    pub k: f64,
    /// CBF class-K gain.
    pub gamma: f64,
    pub d_min: f64,
    pub r_sense: f64,
    pub u_max: f64,
    pub dt: f64,
    /// Density floor everywhere in the domain.
    pub phi0: f64,
    pub kappa_omega: f64,
    pub kappa_sigma: f64,
    pub peak_anchor: PeakAnchor,
    pub contact_band: f64,
    pub max_gap: f64,
    pub min_team: usize,
    pub v_cargo: f64,
    pub delivery_margin: f64,
    pub taper_dist: f64,
    /// Use the sampled-time barrier gain so that `h` decays no faster than
    /// `e^{−γt}` along the Euler trajectory.
    pub discrete_barrier: bool,
    /// Pairs farther apart than this carry no barrier row. `None` picks the
    /// smallest radius at which pruning provably cannot change the solution.
    pub r_active: Option<f64>,
    pub decentralized_qp: bool,
    /// Stop sensing cargos once they are delivered.
    pub release_after_delivery: bool,
    /// Treat cargo discs as obstacles: barrier rows in the safety QP plus a
    /// projection that removes residual penetration.
    pub cargo_exclusion: bool,
    pub quadrature_depth: u32,
    pub seed: u64,
    pub max_steps: usize,
    /// Grid pitch of the default start block.
    pub start_spacing: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        let d_min = 0.4;
        WorldConfig {
            domain: Rect { min: Point2::ZERO, max: Point2::new(12.0, 10.0) },
            n_agents: 12,
            k: 1.0,
            gamma: 1.0,
            d_min,
            r_sense: 1.5,
            u_max: 1.0,
            dt: 0.01,
            phi0: 0.01,
            kappa_omega: 4.0,
            kappa_sigma: 0.4,
            peak_anchor: PeakAnchor::Contact,
            contact_band: 0.3,
            max_gap: PI,
            min_team: 3,
            v_cargo: 0.2,
            delivery_margin: 0.1,
            taper_dist: 1.0,
            discrete_barrier: true,
            r_active: None,
            decentralized_qp: false,
            release_after_delivery: false,
            cargo_exclusion: true,
            quadrature_depth: quadrature::DEFAULT_DEPTH,
            seed: 0,
            max_steps: 20_000,
            start_spacing: 0.6,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), ValidationError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ValidationError::new(name, format!("must be finite and > 0, got {value}")))
    }
}

impl WorldConfig {
    pub fn scaling_law(&self) -> ScalingLaw {
        ScalingLaw { kappa_omega: self.kappa_omega, kappa_sigma: self.kappa_sigma }
    }

    /// Barrier gain actually used in the rows.
    pub fn row_gamma(&self) -> f64 {
        if self.discrete_barrier {
            discrete_gamma(self.gamma, self.dt)
        } else {
            self.gamma
        }
    }

    /// Explicit `r_active`, or the non-binding radius for the fastest
    /// closing motion (agent speed plus cargo drag).
    pub fn activation_radius(&self) -> f64 {
        self.r_active.unwrap_or_else(|| non_binding_radius(self.d_min, self.row_gamma(), self.u_max + self.v_cargo))
    }

    pub fn safety_params(&self) -> SafetyParams {
        SafetyParams {
            d_min: self.d_min,
            gamma: self.row_gamma(),
            r_active: self.activation_radius(),
            u_max: self.u_max,
            decentralized: self.decentralized_qp,
        }
    }

    pub fn transport_params(&self) -> TransportParams {
        TransportParams { v_cargo: self.v_cargo, taper_dist: self.taper_dist, delivery_margin: self.delivery_margin }
    }

    /// Checks scalar parameters and their cross-constraints. Cargo and
    /// start-position checks happen when a world is built.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let d = &self.domain;
        if !(d.min.is_finite() && d.max.is_finite() && d.max.x > d.min.x && d.max.y > d.min.y) {
            return Err(ValidationError::new("domain_extent", "domain needs max > min on both axes"));
        }
        if self.n_agents == 0 {
            return Err(ValidationError::new("positive_n_agents", "need at least one agent"));
        }
        positive("positive_k", self.k)?;
        positive("positive_gamma", self.gamma)?;
        positive("positive_d_min", self.d_min)?;
        positive("positive_r_sense", self.r_sense)?;
        positive("positive_u_max", self.u_max)?;
        positive("positive_dt", self.dt)?;
        positive("positive_phi0", self.phi0)?;
        positive("positive_kappa_omega", self.kappa_omega)?;
        positive("positive_kappa_sigma", self.kappa_sigma)?;
        positive("positive_contact_band", self.contact_band)?;
        positive("positive_v_cargo", self.v_cargo)?;
        positive("positive_delivery_margin", self.delivery_margin)?;
        positive("positive_taper_dist", self.taper_dist)?;
        positive("positive_start_spacing", self.start_spacing)?;
        if !(self.max_gap > 0.0 && self.max_gap <= TAU) {
            return Err(ValidationError::new("max_gap_range", format!("must lie in (0, 2π], got {}", self.max_gap)));
        }
        if self.min_team == 0 {
            return Err(ValidationError::new("positive_min_team", "caging needs at least one agent"));
        }
        if self.max_steps == 0 {
            return Err(ValidationError::new("positive_max_steps", "need at least one step"));
        }
        if self.quadrature_depth > 8 {
            return Err(ValidationError::new("quadrature_depth_range", "depth must be at most 8"));
        }
        if self.r_active.is_some_and(|r| !(r.is_finite() && r >= self.d_min)) {
            return Err(ValidationError::new("r_active_covers_d_min", "r_active must be at least d_min"));
        }
        if self.dt * self.u_max >= self.d_min / 4.0 {
            return Err(ValidationError::new(
                "discretization_margin",
                format!("dt·u_max = {} must stay below d_min/4 = {}", self.dt * self.u_max, self.d_min / 4.0),
            ));
        }
        if self.v_cargo * self.dt >= self.d_min / 4.0 {
            return Err(ValidationError::new(
                "cargo_speed_margin",
                format!("v_cargo·dt = {} must stay below d_min/4 = {}", self.v_cargo * self.dt, self.d_min / 4.0),
            ));
        }
        if self.r_sense <= self.contact_band {
            return Err(ValidationError::new("sense_exceeds_contact", "r_sense must exceed contact_band"));
        }
        // Jitter is ±10% of the pitch on each axis, so neighbours stay at
        // least 0.8·pitch apart.
        if 0.8 * self.start_spacing < self.d_min {
            return Err(ValidationError::new("start_spacing_separation", "0.8·start_spacing must be at least d_min"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        WorldConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_by_name() {
        type Mutation = fn(&mut WorldConfig);
        let cases: [(&str, Mutation); 7] = [
            ("positive_d_min", |c| c.d_min = 0.0),
            ("positive_dt", |c| c.dt = -1.0),
            ("discretization_margin", |c| c.dt = 0.2),
            ("cargo_speed_margin", |c| c.v_cargo = 20.0),
            ("sense_exceeds_contact", |c| c.contact_band = 2.0),
            ("max_gap_range", |c| c.max_gap = 7.0),
            ("positive_n_agents", |c| c.n_agents = 0),
        ];
        for (name, mutate) in cases {
            let mut cfg = WorldConfig::default();
            mutate(&mut cfg);
            assert_eq!(cfg.validate().unwrap_err().name, name);
        }
    }
}
