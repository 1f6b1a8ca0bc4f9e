use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gmis_core::geometry::DEFAULT_EPS;
use gmis_core::{
    build_geometric, build_independent_set_lp, derandomized_round, generate, local_search, randomized_round,
    rectangle_mwis, solve_packing_lp, GenSpec, Geom, Instance, LocalSearchConfig, LpMode, RoundingConfig, ShapeKind,
};

fn instance(kind: ShapeKind, n: usize, unit_weights: bool) -> Instance {
    generate(&GenSpec { kind, n, density: 3.0, seed: 7, unit_weights }).unwrap()
}

fn conflict_graph(c: &mut Criterion) {
    let geom = Geom::new(DEFAULT_EPS);
    let mut g = c.benchmark_group("conflict_graph");
    for n in [50, 200] {
        let inst = instance(ShapeKind::Disks, n, false);
        g.bench_with_input(BenchmarkId::new("disks", n), &inst, |b, inst| {
            b.iter(|| build_geometric(black_box(inst), &geom))
        });
    }
    g.finish();
}

fn packing_lp(c: &mut Criterion) {
    let geom = Geom::new(DEFAULT_EPS);
    let mut g = c.benchmark_group("packing_lp");
    g.sample_size(20);
    for n in [50, 100] {
        let inst = instance(ShapeKind::Squares, n, false);
        g.bench_with_input(BenchmarkId::new("build", n), &inst, |b, inst| {
            b.iter(|| build_independent_set_lp(black_box(inst), LpMode::Geometric, &geom).unwrap())
        });
        let lp = build_independent_set_lp(&inst, LpMode::Geometric, &geom).unwrap();
        g.bench_with_input(BenchmarkId::new("solve", n), &lp, |b, lp| {
            b.iter(|| solve_packing_lp(black_box(lp), 1e-4).unwrap())
        });
    }
    g.finish();
}

fn local_search_unit(c: &mut Criterion) {
    let geom = Geom::new(DEFAULT_EPS);
    let mut g = c.benchmark_group("local_search");
    g.sample_size(10);
    let inst = instance(ShapeKind::Disks, 60, true);
    let graph = build_geometric(&inst, &geom);
    for b in [1, 2, 3] {
        let cfg = LocalSearchConfig::new(b).unwrap();
        g.bench_with_input(BenchmarkId::new("b", b), &cfg, |bch, cfg| bch.iter(|| local_search(&graph, cfg)));
    }
    g.finish();
}

fn rounding(c: &mut Criterion) {
    let geom = Geom::new(DEFAULT_EPS);
    let mut g = c.benchmark_group("rounding");
    for n in [50, 200] {
        let inst = instance(ShapeKind::Disks, n, false);
        let graph = build_geometric(&inst, &geom);
        let lp = build_independent_set_lp(&inst, LpMode::Geometric, &geom).unwrap();
        let x = solve_packing_lp(&lp, 1e-4).unwrap().x;
        let w = inst.weights();
        g.bench_function(BenchmarkId::new("randomized", n), |b| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                randomized_round(&graph, &x, &w, 6.0, seed)
            })
        });
        g.bench_function(BenchmarkId::new("derandomized", n), |b| {
            b.iter(|| derandomized_round(&graph, &x, &w, 6.0))
        });
    }
    g.finish();
}

fn rectangles(c: &mut Criterion) {
    let geom = Geom::new(DEFAULT_EPS);
    let mut g = c.benchmark_group("rectangles");
    g.sample_size(10);
    for n in [50, 200] {
        let inst = instance(ShapeKind::Rects, n, false);
        g.bench_with_input(BenchmarkId::new("pipeline", n), &inst, |b, inst| {
            b.iter(|| rectangle_mwis(black_box(inst), &RoundingConfig::default(), 1e-4, &geom).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, conflict_graph, packing_lp, local_search_unit, rounding, rectangles);
criterion_main!(benches);
