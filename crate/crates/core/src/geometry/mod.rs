//! Planar geometry: points, convex polygons, bounded Voronoi partitions and
//! density-weighted cell integrals.

mod point;
mod polygon;
pub mod quadrature;
mod voronoi;

pub use point::{Point2, Rect, Vec2};
pub use polygon::{bisector_halfplane, ConvexPolygon, HalfPlane, MIN_AREA};
pub use quadrature::{weighted_centroid, CellMoments, Quadrature};
pub use voronoi::{compute_voronoi, VoronoiCell};

use thiserror::Error;

/// Absolute tolerance for point-in-polygon and clipping predicates (meters).
pub const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    /// `pair` names the offending site indices when known.
    #[error("sites {pair:?} are coincident (distance {distance:e} m)")]
    CoincidentSites { pair: Option<(usize, usize)>, distance: f64 },
    #[error("site {index} lies outside the domain")]
    SiteOutsideDomain { index: usize },
    #[error("cell of agent {owner} is degenerate")]
    DegenerateCell { owner: usize },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(&'static str),
}

/// Uniform-density polygon area and centroid.
pub fn polygon_area_centroid(poly: &ConvexPolygon) -> (f64, Point2) {
    poly.area_centroid()
}
