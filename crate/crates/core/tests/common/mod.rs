#![allow(dead_code)]

use rand::Rng;
use swarmcage_core::density::DensityField;
use swarmcage_core::{ConvexPolygon, Point2, Rect};

/// Sites at least `min_gap` apart, uniform in `domain`.
pub fn random_sites(rng: &mut impl Rng, n: usize, domain: &Rect, min_gap: f64) -> Vec<Point2> {
    let mut sites: Vec<Point2> = Vec::with_capacity(n);
    while sites.len() < n {
        let p = Point2::new(rng.gen_range(domain.min.x..domain.max.x), rng.gen_range(domain.min.y..domain.max.y));
        if sites.iter().all(|q| q.distance(p) >= min_gap) {
            sites.push(p);
        }
    }
    sites
}

/// Index of the nearest site, lowest index on ties.
pub fn nearest_site(sites: &[Point2], q: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in sites.iter().enumerate() {
        let d = s.distance_squared(q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// x-extent of a convex polygon along the horizontal line at `y`.
pub fn horizontal_span(poly: &ConvexPolygon, y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in poly.edges() {
        if (a.y - y) * (b.y - y) > 0.0 || a.y == b.y {
            continue;
        }
        let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo < hi).then_some((lo, hi))
}

/// Mass and density-weighted centroid on an `n × n` midpoint grid: `n`
/// rows across the polygon's height, `n` samples across each row's exact
/// chord.
pub fn grid_centroid(poly: &ConvexPolygon, field: &DensityField, n: usize) -> (Point2, f64) {
    let (lo, hi) = poly.bounding_box();
    let dy = (hi.y - lo.y) / n as f64;
    let (mut m, mut mx, mut my) = (0.0, 0.0, 0.0);
    for r in 0..n {
        let y = lo.y + (r as f64 + 0.5) * dy;
        let Some((x0, x1)) = horizontal_span(poly, y) else { continue };
        let dx = (x1 - x0) / n as f64;
        for c in 0..n {
            let x = x0 + (c as f64 + 0.5) * dx;
            let w = field.evaluate(Point2::new(x, y)) * dx * dy;
            m += w;
            mx += w * x;
            my += w * y;
        }
    }
    (Point2::new(mx / m, my / m), m)
}
