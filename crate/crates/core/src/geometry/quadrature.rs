//! Density-weighted integrals over convex cells.
//!
//! A cell is fan-triangulated from its uniform centroid; every fan triangle
//! is split `depth` times into four congruent children and each leaf gets the
//! 3-point interior Gauss rule (exact for quadratics). Summation order is
//! fixed, so results are reproducible bit for bit.

use super::{ConvexPolygon, GeometryError, Point2, VoronoiCell, MIN_AREA};
use crate::density::{DensityField, LocalDensity};

/// Default recursion depth: 4³ = 64 leaves per fan triangle.
pub const DEFAULT_DEPTH: u32 = 3;

/// Slack allowed when checking that a weighted centroid lies in its cell.
pub const CENTROID_SLACK: f64 = 1e-6;

const ONE_SIXTH: f64 = 1.0 / 6.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quadrature {
    pub depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { depth: DEFAULT_DEPTH }
    }
}

/// Raw integrals of a density over a cell.
///
/// `first` and `second` are taken about `origin` (the cell's uniform
/// centroid) to keep cancellation small far from the coordinate origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMoments {
    pub origin: Point2,
    pub mass: f64,
    pub first: Point2,
    /// ∫ ‖q − origin‖² φ dq
    pub second: f64,
}

impl CellMoments {
    pub fn centroid(&self) -> Point2 {
        self.origin + self.first / self.mass
    }

    /// ∫ ‖q − p‖² φ dq via the parallel-axis identity.
    pub fn polar_moment_about(&self, p: Point2) -> f64 {
        let d = self.origin - p;
        self.second + 2.0 * d.dot(self.first) + d.norm_squared() * self.mass
    }
}

impl Quadrature {
    pub fn new(depth: u32) -> Self {
        Quadrature { depth }
    }

    pub fn leaves_per_triangle(&self) -> usize {
        4usize.pow(self.depth)
    }

    /// Calls `f(q, w)` on every quadrature node of the triangle.
    pub fn for_each_node<F: FnMut(Point2, f64)>(&self, tri: [Point2; 3], f: &mut F) {
        subdivide(tri, self.depth, f);
    }

    /// Moments of `density` over `poly`, fanned from its uniform centroid.
    pub fn moments(&self, poly: &ConvexPolygon, density: &DensityField) -> CellMoments {
        let (_, origin) = poly.area_centroid();
        let mut mass = 0.0;
        let mut first = Point2::ZERO;
        let mut second = 0.0;
        for (a, b) in poly.edges() {
            let tri = [origin, a, b];
            let (lo, hi) = super::Rect::bounding(&tri);
            let local: LocalDensity = density.localized(lo, hi);
            subdivide(tri, self.depth, &mut |q, w| {
                let wphi = w * local.evaluate(q);
                let r = q - origin;
                mass += wphi;
                first += r * wphi;
                second += r.norm_squared() * wphi;
            });
        }
        CellMoments { origin, mass, first, second }
    }
}

fn subdivide<F: FnMut(Point2, f64)>(tri: [Point2; 3], depth: u32, f: &mut F) {
    let [a, b, c] = tri;
    if depth == 0 {
        let w = 0.5 * (b - a).cross(c - a) / 3.0;
        f(a * TWO_THIRDS + b * ONE_SIXTH + c * ONE_SIXTH, w);
        f(a * ONE_SIXTH + b * TWO_THIRDS + c * ONE_SIXTH, w);
        f(a * ONE_SIXTH + b * ONE_SIXTH + c * TWO_THIRDS, w);
        return;
    }
    let ab = a.midpoint(b);
    let bc = b.midpoint(c);
    let ca = c.midpoint(a);
    subdivide([a, ab, ca], depth - 1, f);
    subdivide([ab, b, bc], depth - 1, f);
    subdivide([ca, bc, c], depth - 1, f);
    subdivide([ab, bc, ca], depth - 1, f);
}

/// Density-weighted centroid and mass of a cell.
pub fn weighted_centroid(
    cell: &VoronoiCell,
    density: &DensityField,
    quadrature: Quadrature,
) -> Result<(Point2, f64), GeometryError> {
    if cell.region.area() < MIN_AREA {
        return Err(GeometryError::DegenerateCell { owner: cell.owner });
    }
    let m = quadrature.moments(&cell.region, density);
    Ok((m.centroid(), m.mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GaussianComponent;
    use crate::geometry::Rect;

    fn square_cell(side: f64) -> VoronoiCell {
        VoronoiCell {
            owner: 0,
            region: ConvexPolygon::from_rect(&Rect::new(Point2::ZERO, Point2::new(side, side)).unwrap()),
        }
    }

    #[test]
    fn node_weights_sum_to_area() {
        let tri = [Point2::ZERO, Point2::new(2.0, 0.0), Point2::new(0.5, 1.5)];
        for depth in 0..4 {
            let mut total = 0.0;
            let mut count = 0;
            Quadrature::new(depth).for_each_node(tri, &mut |_, w| {
                total += w;
                count += 1;
            });
            assert_eq!(count, 3 * 4usize.pow(depth));
            assert!((total - 1.5).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_for_quadratics() {
        // ∫ x² over the unit right triangle is 1/12.
        let tri = [Point2::ZERO, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let mut acc = 0.0;
        Quadrature::new(0).for_each_node(tri, &mut |q, w| acc += w * q.x * q.x);
        assert!((acc - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_density_matches_polygon_centroid() {
        let field = DensityField::new(0.3, 4).unwrap();
        let cell = VoronoiCell {
            owner: 2,
            region: ConvexPolygon::new(vec![
                Point2::new(1.0, 1.0),
                Point2::new(4.0, 1.5),
                Point2::new(4.5, 3.0),
                Point2::new(2.0, 4.0),
            ])
            .unwrap(),
        };
        let (c, mass) = weighted_centroid(&cell, &field, Quadrature::default()).unwrap();
        let (area, uc) = cell.region.area_centroid();
        assert!(c.distance(uc) < 1e-9);
        assert!((mass - 0.3 * area).abs() < 1e-9);
    }

    #[test]
    fn symmetric_gaussian_keeps_square_center() {
        let mut field = DensityField::new(0.01, 1).unwrap();
        field.components[0] = GaussianComponent::isotropic(0, Point2::new(1.0, 1.0), 0.3, 2.0, true);
        let (c, _) = weighted_centroid(&square_cell(2.0), &field, Quadrature::default()).unwrap();
        assert!(c.distance(Point2::new(1.0, 1.0)) < 1e-9, "{c:?}");
    }

    #[test]
    fn polar_moment_about_center_of_unit_square() {
        let field = DensityField::new(1.0, 0).unwrap();
        let m = Quadrature::default().moments(&square_cell(1.0).region, &field);
        let h = m.polar_moment_about(Point2::new(0.5, 0.5));
        assert!((h - 1.0 / 6.0).abs() < 1e-12);
        let corner = m.polar_moment_about(Point2::ZERO);
        // 1/6 + ‖(0.5,0.5)‖²·area
        assert!((corner - (1.0 / 6.0 + 0.5)).abs() < 1e-12);
    }
}
