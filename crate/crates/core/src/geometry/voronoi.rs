use super::{bisector_halfplane, ConvexPolygon, GeometryError, Point2, Rect, EPS};

/// Voronoi region of one agent, clipped to the workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub owner: usize,
    pub region: ConvexPolygon,
}

/// Bounded Voronoi partition of `domain` induced by `positions`.
///
/// Each cell starts as the domain rectangle and is clipped by the bisector
/// half-plane against every other site, nearest first. Once the next site is
/// farther than twice the cell's circumradius about its owner, no remaining
/// bisector can cut the cell and clipping stops.
pub fn compute_voronoi(positions: &[Point2], domain: &Rect) -> Result<Vec<VoronoiCell>, GeometryError> {
    for (index, p) in positions.iter().enumerate() {
        if !p.is_finite() || !domain.contains(*p, EPS) {
            return Err(GeometryError::SiteOutsideDomain { index });
        }
    }
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let distance = positions[i].distance(positions[j]);
            if distance <= EPS {
                return Err(GeometryError::CoincidentSites { pair: Some((i, j)), distance });
            }
        }
    }

    let base = ConvexPolygon::from_rect(domain);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(positions.len());
    let mut cells = Vec::with_capacity(positions.len());
    for (i, &site) in positions.iter().enumerate() {
        order.clear();
        order
            .extend(positions.iter().enumerate().filter(|&(j, _)| j != i).map(|(j, &p)| (site.distance_squared(p), j)));
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut region = base.clone();
        for &(d2, j) in &order {
            let reach = region.vertices().iter().map(|v| v.distance_squared(site)).fold(0.0, f64::max);
            if d2 > 4.0 * reach {
                break;
            }
            let hp = bisector_halfplane(site, positions[j])?;
            region = region.clip(&hp).ok_or(GeometryError::DegenerateCell { owner: i })?;
        }
        cells.push(VoronoiCell { owner: i, region });
    }
    Ok(cells)
}
