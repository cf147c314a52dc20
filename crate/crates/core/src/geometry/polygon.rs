use super::{GeometryError, Point2, Rect, Vec2, EPS};

/// Areas below this are treated as empty.
pub const MIN_AREA: f64 = 1e-12;

/// Closed half-plane `{q : normal·q <= offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    normal: Vec2,
    offset: f64,
}

impl HalfPlane {
    /// Normalizes `(normal, offset)` so that the normal is a unit vector.
    pub fn new(normal: Vec2, offset: f64) -> Option<HalfPlane> {
        let n = normal.norm();
        if !(n.is_finite() && n > 0.0) || !offset.is_finite() {
            return None;
        }
        Some(HalfPlane { normal: normal / n, offset: offset / n })
    }

    pub fn normal(&self) -> Vec2 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Positive outside, negative inside, zero on the boundary line.
    #[inline]
    pub fn signed_distance(&self, q: Point2) -> f64 {
        self.normal.dot(q) - self.offset
    }

    #[inline]
    pub fn contains(&self, q: Point2) -> bool {
        self.signed_distance(q) <= EPS
    }
}

/// Half-plane of points at least as close to `p_i` as to `p_j`.
pub fn bisector_halfplane(p_i: Point2, p_j: Point2) -> Result<HalfPlane, GeometryError> {
    let d = p_j - p_i;
    let dist = d.norm();
    if dist <= EPS {
        return Err(GeometryError::CoincidentSites { pair: None, distance: dist });
    }
    let normal = d / dist;
    Ok(HalfPlane { normal, offset: normal.dot(p_i.midpoint(p_j)) })
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates orientation, convexity, distinct vertices and positive area.
    pub fn new(vertices: Vec<Point2>) -> Result<ConvexPolygon, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidPolygon("fewer than 3 vertices"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidPolygon("non-finite vertex"));
        }
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= EPS {
                return Err(GeometryError::InvalidPolygon("repeated vertex"));
            }
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -EPS {
                return Err(GeometryError::InvalidPolygon("not convex or not counter-clockwise"));
            }
        }
        let poly = ConvexPolygon { vertices };
        if poly.area() <= MIN_AREA {
            return Err(GeometryError::InvalidPolygon("non-positive area"));
        }
        Ok(poly)
    }

    pub fn from_rect(rect: &Rect) -> ConvexPolygon {
        ConvexPolygon {
            vertices: vec![
                rect.min,
                Point2::new(rect.max.x, rect.min.y),
                rect.max,
                Point2::new(rect.min.x, rect.max.y),
            ],
        }
    }

    /// Regular `n`-gon of circumradius `radius`, first vertex on the +x axis.
    pub fn regular(center: Point2, radius: f64, n: usize) -> Result<ConvexPolygon, GeometryError> {
        let vertices = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                center + Point2::new(a.cos(), a.sin()) * radius
            })
            .collect();
        ConvexPolygon::new(vertices)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges `(v_k, v_{k+1})`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// Shoelace area and first-moment centroid.
    pub fn area_centroid(&self) -> (f64, Point2) {
        // Shift to the first vertex to limit cancellation far from the origin.
        let origin = self.vertices[0];
        let mut twice_area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let (a, b) = (a - origin, b - origin);
            let w = a.cross(b);
            twice_area += w;
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let area = 0.5 * twice_area;
        let centroid = origin + Point2::new(cx, cy) / (3.0 * twice_area);
        (area, centroid)
    }

    /// Closed containment; points within `tol` of an edge count as inside.
    pub fn contains(&self, q: Point2, tol: f64) -> bool {
        self.edges().all(|(a, b)| {
            let e = b - a;
            // Left of (or on) every edge, measured as a distance.
            e.cross(q - a) >= -tol * e.norm()
        })
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        Rect::bounding(&self.vertices)
    }

    /// Intersection with a half-plane. Returns `None` when the result has
    /// area below [`MIN_AREA`].
    pub fn clip(&self, hp: &HalfPlane) -> Option<ConvexPolygon> {
        let n = self.vertices.len();
        let dist: Vec<f64> = self.vertices.iter().map(|&v| hp.signed_distance(v)).collect();
        if dist.iter().all(|&d| d <= EPS) {
            return Some(self.clone());
        }
        if dist.iter().all(|&d| d >= -EPS) {
            return None;
        }

        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (da, db) = (dist[i], dist[j]);
            if da <= EPS {
                out.push(a);
            }
            if (da < -EPS && db > EPS) || (da > EPS && db < -EPS) {
                let t = da / (da - db);
                out.push(a + (b - a) * t);
            }
        }
        dedup_ring(&mut out);
        if out.len() < 3 {
            return None;
        }
        let poly = ConvexPolygon { vertices: out };
        if poly.area() < MIN_AREA {
            None
        } else {
            Some(poly)
        }
    }
}

fn dedup_ring(points: &mut Vec<Point2>) {
    points.dedup_by(|b, a| a.distance(*b) <= EPS);
    while points.len() > 1 && points[0].distance(points[points.len() - 1]) <= EPS {
        points.pop();
    }
}
