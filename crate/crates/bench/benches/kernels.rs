use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use swarmcage_bench::{random_sites, two_cargo_world};
use swarmcage_core::coordination::centroids;
use swarmcage_core::density::DensityField;
use swarmcage_core::geometry::compute_voronoi;
use swarmcage_core::qp::QpOptions;
use swarmcage_core::safety::{build_constraints, solve_qp, QpProblem};
use swarmcage_core::{GaussianComponent, Point2, Quadrature, Rect, Vec2};

fn domain() -> Rect {
    Rect::new(Point2::ZERO, Point2::new(12.0, 10.0)).unwrap()
}

fn voronoi(c: &mut Criterion) {
    let mut group = c.benchmark_group("voronoi");
    for n in [12, 50, 200] {
        let sites = random_sites(1, n, &domain(), 0.05);
        group.bench_with_input(BenchmarkId::from_parameter(n), &sites, |b, s| {
            b.iter(|| compute_voronoi(black_box(s), &domain()).unwrap())
        });
    }
    group.finish();
}

fn centroid(c: &mut Criterion) {
    let sites = random_sites(2, 12, &domain(), 0.3);
    let cells = compute_voronoi(&sites, &domain()).unwrap();
    let mut field = DensityField::new(0.01, 12).unwrap();
    for (i, s) in sites.iter().take(4).enumerate() {
        field.components[i] = GaussianComponent::isotropic(i, *s + Point2::new(0.3, 0.0), 0.4, 4.0, true);
    }
    let mut group = c.benchmark_group("centroids");
    for depth in [2, 3, 4] {
        group.bench_with_input(BenchmarkId::new("depth", depth), &depth, |b, &d| {
            b.iter(|| centroids(black_box(&cells), &field, Quadrature::new(d)).unwrap())
        });
    }
    group.finish();
}

fn qp(c: &mut Criterion) {
    // A tight cluster heading inward, so many rows bind.
    let p = random_sites(3, 12, &Rect::new(Point2::ZERO, Point2::new(2.5, 2.5)).unwrap(), 0.45);
    let centre = p.iter().fold(Point2::ZERO, |a, b| a + *b) / p.len() as f64;
    let nominal: Vec<Vec2> = p.iter().map(|&pi| (centre - pi).clamp_norm(1.0)).collect();
    let problem = QpProblem::new(&nominal, build_constraints(&p, 0.4, 1.0, 4.8));
    c.bench_function("qp_12_agents", |b| b.iter(|| solve_qp(black_box(&problem), QpOptions::default()).unwrap()));
}

fn world_step(c: &mut Criterion) {
    let world = two_cargo_world(800);
    c.bench_function("world_step", |b| {
        b.iter_batched(|| world.clone(), |mut w| w.step().unwrap(), criterion::BatchSize::SmallInput)
    });
}

criterion_group!(benches, voronoi, centroid, qp, world_step);
criterion_main!(benches);
