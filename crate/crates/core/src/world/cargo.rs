use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Rect, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CargoPhase {
    Idle,
    Engaged,
    Transporting,
    Delivered,
}

impl CargoPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            CargoPhase::Idle => "idle",
            CargoPhase::Engaged => "engaged",
            CargoPhase::Transporting => "transporting",
            CargoPhase::Delivered => "delivered",
        }
    }

    /// Edges of the phase machine (self-loops included).
    pub fn can_become(self, next: CargoPhase) -> bool {
        use CargoPhase::*;
        self == next
            || matches!(
                (self, next),
                (Idle, Engaged) | (Engaged, Transporting) | (Transporting, Engaged) | (Transporting, Delivered)
            )
    }
}

impl std::str::FromStr for CargoPhase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "idle" => Ok(CargoPhase::Idle),
            "engaged" => Ok(CargoPhase::Engaged),
            "transporting" => Ok(CargoPhase::Transporting),
            "delivered" => Ok(CargoPhase::Delivered),
            other => Err(format!("unknown cargo phase `{other}`")),
        }
    }
}

/// Scenario-level description of a cargo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CargoSpec {
    pub center: Point2,
    pub radius: f64,
    /// Overrides the nearest-wall transport direction.
    pub goal: Option<Vec2>,
}

/// A circular cargo and its transport state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cargo {
    pub id: usize,
    pub center: Point2,
    pub radius: f64,
    pub phase: CargoPhase,
    pub transport_dir: Option<Vec2>,
    pub goal: Option<Vec2>,
    /// Caging team from the most recent evaluation.
    pub team: Vec<usize>,
}

impl Cargo {
    pub fn new(id: usize, center: Point2, radius: f64, goal: Option<Vec2>) -> Self {
        Cargo {
            id,
            center,
            radius,
            phase: CargoPhase::Idle,
            transport_dir: None,
            goal: goal.and_then(Vec2::normalized),
            team: Vec::new(),
        }
    }

    /// Signed distance from `p` to the rim; negative inside the disc.
    pub fn rim_distance(&self, p: Point2) -> f64 {
        p.distance(self.center) - self.radius
    }

    /// Gap between the rim and the workspace boundary, measured along the
    /// transport direction or, without one, toward the nearest wall.
    pub fn wall_clearance(&self, domain: &Rect) -> f64 {
        match self.transport_dir {
            Some(dir) => domain.ray_exit_distance(self.center, dir) - self.radius,
            None => domain.distance_to_boundary(self.center) - self.radius,
        }
    }

    /// Commanded speed: full `v_cargo`, tapering linearly to zero over the
    /// last `taper_dist` of clearance.
    pub fn transport_speed(&self, domain: &Rect, v_cargo: f64, taper_dist: f64) -> f64 {
        let clearance = self.wall_clearance(domain).max(0.0);
        v_cargo * (clearance / taper_dist).min(1.0)
    }

    /// Velocity imposed on the cargo (and its team) while transporting.
    pub fn transport_velocity(&self, domain: &Rect, v_cargo: f64, taper_dist: f64) -> Vec2 {
        match (self.phase, self.transport_dir) {
            (CargoPhase::Transporting, Some(dir)) => dir * self.transport_speed(domain, v_cargo, taper_dist),
            _ => Vec2::ZERO,
        }
    }
}

/// Unit vector from `center` toward the nearest point of the domain boundary.
/// Ties resolve in the order −x, +x, −y, +y.
pub fn nearest_wall_direction(center: Point2, domain: &Rect) -> Vec2 {
    let candidates = [
        (center.x - domain.min.x, Point2::new(-1.0, 0.0)),
        (domain.max.x - center.x, Point2::new(1.0, 0.0)),
        (center.y - domain.min.y, Point2::new(0.0, -1.0)),
        (domain.max.y - center.y, Point2::new(0.0, 1.0)),
    ];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.0 < best.0 {
            best = *c;
        }
    }
    best.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CagingStatus {
    pub caged: bool,
    pub team: Vec<usize>,
    /// Largest empty arc between consecutive team members (radians);
    /// 2π when the team has fewer than two members.
    pub largest_gap: f64,
}

/// The team is every agent within `contact_band` of the rim (or inside
/// it). The cargo is caged when the team has at least `min_team` members
/// and no empty arc between neighbours, seen from the center, exceeds
/// `max_gap`.
pub fn caging_status(
    cargo: &Cargo,
    positions: &[Point2],
    contact_band: f64,
    max_gap: f64,
    min_team: usize,
) -> CagingStatus {
    let team: Vec<usize> =
        positions.iter().enumerate().filter(|(_, &p)| cargo.rim_distance(p) <= contact_band).map(|(i, _)| i).collect();
    let largest_gap = largest_angular_gap(team.iter().map(|&i| positions[i] - cargo.center));
    let caged = team.len() >= min_team.max(1) && largest_gap <= max_gap;
    CagingStatus { caged, team, largest_gap }
}

/// Largest circular gap between the bearings of `offsets`.
pub fn largest_angular_gap(offsets: impl Iterator<Item = Vec2>) -> f64 {
    let mut bearings: Vec<f64> = offsets.map(|v| v.angle()).collect();
    if bearings.len() < 2 {
        return TAU;
    }
    bearings.sort_by(f64::total_cmp);
    let wrap = bearings[0] + TAU - bearings[bearings.len() - 1];
    bearings.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportParams {
    pub v_cargo: f64,
    pub taper_dist: f64,
    pub delivery_margin: f64,
}

/// One step of the cargo phase machine. Returns the updated cargo and the
/// displacement its team must follow.
///
/// * Idle → Engaged once anyone is in the contact band.
/// * Engaged → Transporting when caged; the direction is frozen then, and
///   motion starts on the following step.
/// * Transporting moves at the tapered speed while caged, falls back to
///   Engaged when caging is lost, and becomes Delivered once the wall
///   clearance drops to `delivery_margin`.
/// * Delivered is absorbing.
pub fn cargo_update(
    cargo: &Cargo,
    status: &CagingStatus,
    domain: &Rect,
    params: &TransportParams,
    dt: f64,
) -> (Cargo, Vec2) {
    let mut next = cargo.clone();
    let mut displacement = Vec2::ZERO;
    match cargo.phase {
        CargoPhase::Delivered => return (next, displacement),
        CargoPhase::Idle => {
            if !status.team.is_empty() {
                next.phase = CargoPhase::Engaged;
            }
        }
        CargoPhase::Engaged => {
            if status.caged {
                next.phase = CargoPhase::Transporting;
                next.transport_dir = Some(cargo.goal.unwrap_or_else(|| nearest_wall_direction(cargo.center, domain)));
            }
        }
        CargoPhase::Transporting => {
            if !status.caged {
                next.phase = CargoPhase::Engaged;
                next.transport_dir = None;
            } else if cargo.wall_clearance(domain) <= params.delivery_margin {
                next.phase = CargoPhase::Delivered;
                next.transport_dir = None;
            } else {
                displacement = cargo.transport_velocity(domain, params.v_cargo, params.taper_dist) * dt;
                next.center += displacement;
                if next.wall_clearance(domain) <= params.delivery_margin {
                    next.phase = CargoPhase::Delivered;
                    next.transport_dir = None;
                }
            }
        }
    }
    next.team = status.team.clone();
    (next, displacement)
}
