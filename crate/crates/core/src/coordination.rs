//! CVT nominal controller and the locational cost it descends.

use crate::density::DensityField;
use crate::geometry::{weighted_centroid, GeometryError, Point2, Quadrature, Vec2, VoronoiCell};

/// `−k (p − c)`, rescaled to norm `u_max` when it would exceed it.
pub fn nominal_control(p: Point2, centroid: Point2, k: f64, u_max: f64) -> Vec2 {
    ((p - centroid) * -k).clamp_norm(u_max)
}

/// Weighted centroid of every cell, in agent order.
pub fn centroids(
    cells: &[VoronoiCell],
    field: &DensityField,
    quadrature: Quadrature,
) -> Result<Vec<Point2>, GeometryError> {
    cells.iter().map(|cell| weighted_centroid(cell, field, quadrature).map(|(c, _)| c)).collect()
}

/// H = Σᵢ ∫_{Vᵢ} ‖q − pᵢ‖² φ(q) dq, with the same quadrature as the centroids.
pub fn locational_cost(
    cells: &[VoronoiCell],
    positions: &[Point2],
    field: &DensityField,
    quadrature: Quadrature,
) -> f64 {
    cells.iter().map(|cell| quadrature.moments(&cell.region, field).polar_moment_about(positions[cell.owner])).sum()
}

/// Largest distance between an agent and its cell centroid.
pub fn max_centroid_offset(positions: &[Point2], centroids: &[Point2]) -> f64 {
    positions.iter().zip(centroids).map(|(p, c)| p.distance(*c)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_voronoi, Rect};

    #[test]
    fn nominal_control_cases() {
        let c = Point2::new(0.3, -0.2);
        assert_eq!(nominal_control(c, c, 2.0, 1.0), Point2::ZERO);
        assert_eq!(nominal_control(Point2::new(1.0, 0.0), Point2::ZERO, 1.0, 10.0), Point2::new(-1.0, 0.0));
        let u = nominal_control(Point2::new(3.0, 4.0), Point2::ZERO, 5.0, 2.0);
        assert!((u.x + 1.2).abs() < 1e-15 && (u.y + 1.6).abs() < 1e-15);
    }

    #[test]
    fn cost_of_centered_agent_in_unit_square() {
        let domain = Rect::new(Point2::ZERO, Point2::new(1.0, 1.0)).unwrap();
        let field = DensityField::new(1.0, 1).unwrap();
        let center = [Point2::new(0.5, 0.5)];
        let cells = compute_voronoi(&center, &domain).unwrap();
        let h = locational_cost(&cells, &center, &field, Quadrature::default());
        assert!((h - 1.0 / 6.0).abs() < 1e-4);

        let corner = [Point2::new(0.0, 0.0)];
        let cells = compute_voronoi(&corner, &domain).unwrap();
        let h_corner = locational_cost(&cells, &corner, &field, Quadrature::default());
        assert!(h_corner > h);
        assert!((h_corner - 2.0 / 3.0).abs() < 1e-12);
    }
}
