//! Fixtures shared by the benchmarks in `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmcage_core::{CargoSpec, Point2, Rect, World, WorldConfig};

/// `n` seeded sites in `domain`, at least `min_gap` apart.
pub fn random_sites(seed: u64, n: usize, domain: &Rect, min_gap: f64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<Point2> = Vec::with_capacity(n);
    while sites.len() < n {
        let p = Point2::new(rng.gen_range(domain.min.x..domain.max.x), rng.gen_range(domain.min.y..domain.max.y));
        if sites.iter().all(|q| q.distance(p) >= min_gap) {
            sites.push(p);
        }
    }
    sites
}

/// Default world with the two-cargo layout, advanced by `warmup` steps so
/// that detections and caging rows are live.
pub fn two_cargo_world(warmup: usize) -> World {
    let cargos = [
        CargoSpec { center: Point2::new(3.5, 6.8), radius: 0.8, goal: None },
        CargoSpec { center: Point2::new(8.5, 3.0), radius: 1.2, goal: None },
    ];
    let mut world = World::new(WorldConfig::default(), &cargos, None).expect("valid layout");
    for _ in 0..warmup {
        world.step().expect("step");
    }
    world
}
