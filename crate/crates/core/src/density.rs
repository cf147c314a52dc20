//! Detection-triggered Gaussian mixture density.
//!
//! The field is a strictly positive baseline plus one anisotropic Gaussian
//! slot per agent. A slot is switched on only while its agent senses a
//! cargo; its weight and spread scale with the sensed cargo's radius so that
//! bigger cargos pull harder.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::world::{AgentState, Cargo};

/// Gaussian terms whose exponent exceeds this over a whole region are
/// dropped by [`DensityField::localized`]; `exp(-60)` is below one ulp of any
/// admissible baseline.
const CULL_EXPONENT: f64 = 60.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("baseline density must be positive and finite, got {0}")]
    NonPositiveBaseline(f64),
    #[error("component {owner}: {what} must be positive and finite")]
    InvalidComponent { owner: usize, what: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub owner: usize,
    pub mu: Point2,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub weight: f64,
    /// The switching variable: the term contributes only while `true`.
    pub active: bool,
}

impl GaussianComponent {
    pub fn isotropic(owner: usize, mu: Point2, sigma: f64, weight: f64, active: bool) -> Self {
        GaussianComponent { owner, mu, sigma_x: sigma, sigma_y: sigma, weight, active }
    }

    /// Inactive placeholder for agent `owner`.
    pub fn dormant(owner: usize) -> Self {
        GaussianComponent::isotropic(owner, Point2::ZERO, 1.0, 1.0, false)
    }

    /// Peak height `ω / (2π σx σy)`.
    pub fn amplitude(&self) -> f64 {
        self.weight / (TAU * self.sigma_x * self.sigma_y)
    }

    /// Value of the Gaussian term at `q`, ignoring the switch.
    pub fn value(&self, q: Point2) -> f64 {
        let dx = (q.x - self.mu.x) / self.sigma_x;
        let dy = (q.y - self.mu.y) / self.sigma_y;
        self.amplitude() * (-0.5 * (dx * dx + dy * dy)).exp()
    }

    fn validate(&self) -> Result<(), DensityError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let owner = self.owner;
        if !positive(self.sigma_x) || !positive(self.sigma_y) {
            return Err(DensityError::InvalidComponent { owner, what: "sigma" });
        }
        if !positive(self.weight) {
            return Err(DensityError::InvalidComponent { owner, what: "weight" });
        }
        if !self.mu.is_finite() {
            return Err(DensityError::InvalidComponent { owner, what: "mean" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub phi0: f64,
    /// One slot per agent, indexed by agent id.
    pub components: Vec<GaussianComponent>,
}

impl DensityField {
    /// Baseline-only field with `n_agents` dormant slots.
    pub fn new(phi0: f64, n_agents: usize) -> Result<Self, DensityError> {
        if !(phi0.is_finite() && phi0 > 0.0) {
            return Err(DensityError::NonPositiveBaseline(phi0));
        }
        Ok(DensityField { phi0, components: (0..n_agents).map(GaussianComponent::dormant).collect() })
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if !(self.phi0.is_finite() && self.phi0 > 0.0) {
            return Err(DensityError::NonPositiveBaseline(self.phi0));
        }
        self.components.iter().try_for_each(GaussianComponent::validate)
    }

    /// φ(q) = φ₀ + Σ ρᵢ ωᵢ/(2π σxᵢ σyᵢ) · exp(−½((qx−μxᵢ)²/σxᵢ² + (qy−μyᵢ)²/σyᵢ²))
    pub fn evaluate(&self, q: Point2) -> f64 {
        self.phi0 + self.components.iter().filter(|c| c.active).map(|c| c.value(q)).sum::<f64>()
    }

    pub fn active_count(&self) -> usize {
        self.components.iter().filter(|c| c.active).count()
    }

    pub fn active(&self) -> impl Iterator<Item = &GaussianComponent> {
        self.components.iter().filter(|c| c.active)
    }

    /// Restriction of the field to the box `[lo, hi]`, keeping only the
    /// active terms that are numerically visible somewhere inside it.
    pub fn localized(&self, lo: Point2, hi: Point2) -> LocalDensity {
        let terms = self
            .active()
            .filter_map(|c| {
                let gx = axis_gap(c.mu.x, lo.x, hi.x) / c.sigma_x;
                let gy = axis_gap(c.mu.y, lo.y, hi.y) / c.sigma_y;
                (0.5 * (gx * gx + gy * gy) <= CULL_EXPONENT).then(|| LocalTerm {
                    mu: c.mu,
                    inv_sx: 1.0 / c.sigma_x,
                    inv_sy: 1.0 / c.sigma_y,
                    amplitude: c.amplitude(),
                })
            })
            .collect();
        LocalDensity { phi0: self.phi0, terms }
    }
}

fn axis_gap(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct LocalTerm {
    mu: Point2,
    inv_sx: f64,
    inv_sy: f64,
    amplitude: f64,
}

/// Field restricted to a region; see [`DensityField::localized`].
#[derive(Debug, Clone)]
pub struct LocalDensity {
    phi0: f64,
    terms: Vec<LocalTerm>,
}

impl LocalDensity {
    #[inline]
    pub fn evaluate(&self, q: Point2) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let dx = (q.x - t.mu.x) * t.inv_sx;
            let dy = (q.y - t.mu.y) * t.inv_sy;
            acc += t.amplitude * (-0.5 * (dx * dx + dy * dy)).exp();
        }
        self.phi0 + acc
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

/// Linear size law: ω = κ_ω·R and σx = σy = κ_σ·R for a cargo of radius R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub kappa_omega: f64,
    pub kappa_sigma: f64,
}

impl Default for ScalingLaw {
    fn default() -> Self {
        ScalingLaw { kappa_omega: 4.0, kappa_sigma: 0.4 }
    }
}

impl ScalingLaw {
    pub fn weight(&self, radius: f64) -> f64 {
        self.kappa_omega * radius
    }

    pub fn sigma(&self, radius: f64) -> f64 {
        self.kappa_sigma * radius
    }
}

/// Where an active peak is centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakAnchor {
    /// On the detecting agent itself.
    Agent,
    /// On the point of the sensed cargo's rim nearest the detecting agent.
    /// Coincides with the agent's position once it is in contact.
    #[default]
    Contact,
}

impl PeakAnchor {
    pub fn locate(self, agent: Point2, cargo: &Cargo) -> Point2 {
        match self {
            PeakAnchor::Agent => agent,
            PeakAnchor::Contact => match (agent - cargo.center).normalized() {
                Some(dir) => cargo.center + dir * cargo.radius,
                None => agent,
            },
        }
    }
}

/// Result of one sensing pass for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub agent: usize,
    pub cargo: Option<usize>,
}

/// Agent `i` senses cargo `c` iff `‖pᵢ − c.center‖ − c.radius <= r_sense`.
/// Among several candidates the nearest rim wins, ties going to the lower
/// cargo id. Nothing is remembered between calls.
pub fn update_detection(agents: &[AgentState], cargos: &[Cargo], r_sense: f64) -> Vec<Detection> {
    agents
        .iter()
        .map(|agent| {
            let cargo = cargos
                .iter()
                .map(|c| (c.rim_distance(agent.position), c.id))
                .filter(|&(d, _)| d <= r_sense)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, id)| id);
            Detection { agent: agent.id, cargo }
        })
        .collect()
}

/// New field for the current step: detecting agents get an active peak sized
/// by their cargo; all other slots are switched off and left untouched.
pub fn refresh_components(
    field: &DensityField,
    detections: &[Detection],
    agents: &[AgentState],
    cargos: &[Cargo],
    law: ScalingLaw,
    anchor: PeakAnchor,
) -> DensityField {
    let mut next = field.clone();
    for det in detections {
        let slot = &mut next.components[det.agent];
        match det.cargo.and_then(|id| cargos.iter().find(|c| c.id == id)) {
            Some(cargo) => {
                let sigma = law.sigma(cargo.radius);
                *slot = GaussianComponent {
                    owner: det.agent,
                    mu: anchor.locate(agents[det.agent].position, cargo),
                    sigma_x: sigma,
                    sigma_y: sigma,
                    weight: law.weight(cargo.radius),
                    active: true,
                };
            }
            None => slot.active = false,
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(id: usize, x: f64, y: f64) -> AgentState {
        AgentState::new(id, Point2::new(x, y))
    }

    fn cargo(id: usize, x: f64, y: f64, r: f64) -> Cargo {
        Cargo::new(id, Point2::new(x, y), r, None)
    }

    #[test]
    fn inactive_field_is_flat() {
        let field = DensityField::new(0.25, 3).unwrap();
        for q in [Point2::ZERO, Point2::new(3.0, -7.0), Point2::new(1e3, 1e3)] {
            assert_eq!(field.evaluate(q), 0.25);
        }
    }

    #[test]
    fn peak_value_at_mean() {
        let mut field = DensityField::new(0.01, 1).unwrap();
        field.components[0] = GaussianComponent {
            owner: 0,
            mu: Point2::new(1.0, 2.0),
            sigma_x: 0.5,
            sigma_y: 0.25,
            weight: 3.0,
            active: true,
        };
        let expected = 0.01 + 3.0 / (TAU * 0.5 * 0.25);
        assert!((field.evaluate(Point2::new(1.0, 2.0)) - expected).abs() < 1e-14);
    }

    #[test]
    fn superposition_of_two_components() {
        let phi0 = 0.05;
        let a = GaussianComponent::isotropic(0, Point2::new(-1.0, 0.0), 0.7, 2.0, true);
        let b = GaussianComponent::isotropic(1, Point2::new(1.0, 0.0), 0.7, 2.0, true);
        let both = DensityField { phi0, components: vec![a, b] };
        let only_a = DensityField { phi0, components: vec![a, GaussianComponent { active: false, ..b }] };
        let only_b = DensityField { phi0, components: vec![GaussianComponent { active: false, ..a }, b] };
        let q = Point2::ZERO;
        let superposed = only_a.evaluate(q) + only_b.evaluate(q) - phi0;
        assert!((both.evaluate(q) - superposed).abs() < 1e-15);
        let term = 2.0 / (TAU * 0.49) * (-0.5f64 / 0.49).exp();
        assert!((both.evaluate(q) - (phi0 + 2.0 * term)).abs() < 1e-14);
    }

    #[test]
    fn localized_matches_full_evaluation() {
        let mut field = DensityField::new(0.01, 3).unwrap();
        field.components[0] = GaussianComponent::isotropic(0, Point2::new(0.0, 0.0), 0.5, 1.0, true);
        field.components[1] = GaussianComponent::isotropic(1, Point2::new(50.0, 0.0), 0.5, 1.0, true);
        let local = field.localized(Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0));
        assert_eq!(local.term_count(), 1);
        for q in [Point2::ZERO, Point2::new(0.7, -0.3), Point2::new(-1.0, 1.0)] {
            assert!((local.evaluate(q) - field.evaluate(q)).abs() <= 1e-16 * field.evaluate(q));
        }
    }

    #[test]
    fn detection_boundary_counts() {
        let agents = [agent(0, 0.0, 0.0)];
        let cargos = [cargo(0, 5.0, 0.0, 1.0)];
        assert_eq!(update_detection(&agents, &cargos, 2.0)[0].cargo, None);
        assert_eq!(update_detection(&agents, &cargos, 4.0)[0].cargo, Some(0));
    }

    #[test]
    fn detection_prefers_nearest_rim_then_lower_id() {
        let agents = [agent(0, 0.0, 0.0)];
        let cargos = [cargo(0, 3.0, 0.0, 1.0), cargo(1, -2.5, 0.0, 1.0)];
        assert_eq!(update_detection(&agents, &cargos, 5.0)[0].cargo, Some(1));
        let tied = [cargo(4, 0.0, 3.0, 1.0), cargo(2, 0.0, -3.0, 1.0)];
        assert_eq!(update_detection(&agents, &tied, 5.0)[0].cargo, Some(2));
    }

    #[test]
    fn detection_is_memoryless() {
        let cargos = [cargo(0, 5.0, 0.0, 1.0)];
        let near = [agent(0, 3.5, 0.0)];
        let far = [agent(0, -3.0, 0.0)];
        assert_eq!(update_detection(&near, &cargos, 1.0)[0].cargo, Some(0));
        assert_eq!(update_detection(&far, &cargos, 1.0)[0].cargo, None);
    }

    #[test]
    fn refresh_without_detections_is_flat() {
        let agents = [agent(0, 1.0, 1.0), agent(1, 2.0, 2.0)];
        let mut field = DensityField::new(0.1, 2).unwrap();
        field.components[1].active = true;
        let dets = update_detection(&agents, &[], 1.0);
        let next = refresh_components(&field, &dets, &agents, &[], ScalingLaw::default(), PeakAnchor::Agent);
        assert_eq!(next.active_count(), 0);
        assert_eq!(next.evaluate(Point2::new(2.0, 2.0)), 0.1);
    }

    #[test]
    fn refresh_scales_with_radius() {
        let agents = [agent(0, 0.0, 0.0), agent(1, 10.0, 0.0)];
        let cargos = [cargo(0, 0.0, 1.5, 1.0)];
        let dets = update_detection(&agents, &cargos, 1.0);
        let field = DensityField::new(0.01, 2).unwrap();
        let law = ScalingLaw { kappa_omega: 4.0, kappa_sigma: 0.6 };
        let next = refresh_components(&field, &dets, &agents, &cargos, law, PeakAnchor::Agent);
        let c = next.components[0];
        assert!(c.active && !next.components[1].active);
        assert_eq!(c.mu, Point2::ZERO);
        assert!((c.sigma_x - 0.6).abs() < 1e-15 && (c.sigma_y - 0.6).abs() < 1e-15);
        assert!((c.weight - 4.0).abs() < 1e-15);

        let anchored = refresh_components(&field, &dets, &agents, &cargos, law, PeakAnchor::Contact);
        assert!(anchored.components[0].mu.distance(Point2::new(0.0, 0.5)) < 1e-15);
    }

    #[test]
    fn weight_ratio_follows_radius_ratio() {
        let agents = [agent(0, 0.0, 0.0), agent(1, 10.0, 0.0)];
        let cargos = [cargo(0, 0.0, 1.3, 0.8), cargo(1, 10.0, 1.7, 1.2)];
        let dets = update_detection(&agents, &cargos, 1.0);
        assert_eq!(dets[0].cargo, Some(0));
        assert_eq!(dets[1].cargo, Some(1));
        let field = DensityField::new(0.01, 2).unwrap();
        let next = refresh_components(&field, &dets, &agents, &cargos, ScalingLaw::default(), PeakAnchor::Agent);
        let ratio = next.components[1].weight / next.components[0].weight;
        assert!((ratio - 1.5).abs() < 1e-12);
    }

    #[test]
    fn lost_detection_keeps_other_fields() {
        let cargos = [cargo(0, 0.0, 1.5, 1.0)];
        let field = DensityField::new(0.01, 1).unwrap();
        let near = [agent(0, 0.0, 0.0)];
        let on = refresh_components(
            &field,
            &update_detection(&near, &cargos, 1.0),
            &near,
            &cargos,
            ScalingLaw::default(),
            PeakAnchor::Agent,
        );
        let far = [agent(0, 0.0, -5.0)];
        let off = refresh_components(
            &on,
            &update_detection(&far, &cargos, 1.0),
            &far,
            &cargos,
            ScalingLaw::default(),
            PeakAnchor::Agent,
        );
        assert!(!off.components[0].active);
        assert_eq!(off.components[0].mu, on.components[0].mu);
        assert_eq!(off.components[0].weight, on.components[0].weight);
    }
}
