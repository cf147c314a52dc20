mod common;

use common::{grid_centroid, nearest_site, random_sites};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmcage_core::density::DensityField;
use swarmcage_core::geometry::{compute_voronoi, weighted_centroid};
use swarmcage_core::{GaussianComponent, Point2, Quadrature, Rect};

fn domain() -> Rect {
    Rect::new(Point2::ZERO, Point2::new(10.0, 10.0)).unwrap()
}

#[test]
fn cells_match_nearest_site_classification() {
    let d = domain();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let res = 200;
    for _ in 0..10 {
        let n = rng.gen_range(2..=20);
        let sites = random_sites(&mut rng, n, &d, 1e-3);
        let cells = compute_voronoi(&sites, &d).unwrap();
        let mut agree = 0;
        for r in 0..res {
            for c in 0..res {
                let q = Point2::new((c as f64 + 0.5) * 10.0 / res as f64, (r as f64 + 0.5) * 10.0 / res as f64);
                let truth = nearest_site(&sites, q);
                if cells[truth].region.contains(q, 1e-9) {
                    agree += 1;
                }
            }
        }
        assert!(agree as f64 / (res * res) as f64 >= 0.999, "{agree} of {}", res * res);
    }
}

#[test]
fn weighted_centroid_matches_grid() {
    let d = domain();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let sites = random_sites(&mut rng, 8, &d, 0.5);
        let cells = compute_voronoi(&sites, &d).unwrap();
        let cell = &cells[rng.gen_range(0..cells.len())];
        let mut field = DensityField::new(0.05, 2).unwrap();
        let (lo, hi) = cell.region.bounding_box();
        for slot in 0..2 {
            let mu = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            field.components[slot] = GaussianComponent::isotropic(slot, mu, rng.gen_range(0.3..1.2), 4.0, true);
        }
        let (c, m) = weighted_centroid(cell, &field, Quadrature::default()).unwrap();
        let (c_ref, m_ref) = grid_centroid(&cell.region, &field, 800);
        let scale = lo.distance(hi);
        assert!(c.distance(c_ref) / scale < 1e-4, "centroid off by {}", c.distance(c_ref) / scale);
        assert!((m - m_ref).abs() / m_ref < 1e-4);
    }
}

#[test]
fn deeper_quadrature_converges() {
    let d = domain();
    let sites = [Point2::new(3.0, 3.0), Point2::new(7.0, 4.0), Point2::new(5.0, 8.0)];
    let cells = compute_voronoi(&sites, &d).unwrap();
    let mut field = DensityField::new(0.01, 1).unwrap();
    field.components[0] = GaussianComponent::isotropic(0, Point2::new(2.0, 2.5), 0.3, 3.0, true);
    let (c_ref, _) = grid_centroid(&cells[0].region, &field, 3000);
    let errors: Vec<f64> = (0..=4)
        .map(|depth| weighted_centroid(&cells[0], &field, Quadrature::new(depth)).unwrap().0.distance(c_ref))
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cells_tile_the_domain(raw in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..25)) {
        let mut sites: Vec<Point2> = Vec::new();
        for (x, y) in raw {
            let p = Point2::new(x, y);
            if sites.iter().all(|q| q.distance(p) > 1e-3) {
                sites.push(p);
            }
        }
        let d = domain();
        let cells = compute_voronoi(&sites, &d).unwrap();
        prop_assert_eq!(cells.len(), sites.len());
        let total: f64 = cells.iter().map(|c| c.region.area()).sum();
        prop_assert!((total - d.area()).abs() / d.area() < 1e-9);
        for cell in &cells {
            let owner = sites[cell.owner];
            prop_assert!(cell.region.contains(owner, 1e-9));
            for &v in cell.region.vertices() {
                prop_assert!(d.contains(v, 1e-9));
                let own = v.distance(owner);
                for s in &sites {
                    prop_assert!(own <= v.distance(*s) + 1e-7);
                }
            }
        }
    }
}
