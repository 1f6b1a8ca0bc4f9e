//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gmis_core::geometry::Geom;
use gmis_core::harness::{run_spec, strip_timing, BenchSpec};
use gmis_core::lp::{build_piercing_lp, solve_covering_lp, vertex_pair_mass, FractionalSolution};
use gmis_core::model::WeightMode;
use gmis_core::oracle::{exact_lp, exact_mwis, exhaustive_rounding_expectation, max_clique};
use gmis_core::rectangles::{chain_color, depth_threshold, max_depth, rectangle_mwis, split_edges};
use gmis_core::rounding::{auto_tau, expectation_floor, RoundingPlan, Sample, DEFAULT_C_TAU};
use gmis_core::{
    build_geometric, build_independent_set_lp, derandomized_round, local_search, solve_packing_lp,
    verify_locally_optimal, Algorithm, ConflictGraph, Family, GenSpec, Instance, LocalSearchConfig, LpMode,
    RoundingConfig, RunParams, SelectionResult, ShapeKind, Trace,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const EPS: f64 = 1e-4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Solved {
    inst: Instance,
    graph: ConflictGraph,
    sol: FractionalSolution,
}

fn solve(inst: &Instance) -> Solved {
    let geom = Geom::default();
    let lp = build_independent_set_lp(inst, LpMode::Geometric, &geom).unwrap();
    Solved {
        graph: build_geometric(inst, &geom),
        sol: solve_packing_lp(&lp, EPS).unwrap(),
        inst: inst.clone(),
    }
}

/// Mean and standard error of `trials` rounding runs with seeds `0..trials`.
fn monte_carlo(plan: &RoundingPlan, weights: &[f64], trials: u64) -> (f64, f64) {
    let (sum, sq) = (0..trials)
        .into_par_iter()
        .map_init(Sample::default, |s, seed| {
            plan.sample(seed, s);
            let w: f64 = (0..weights.len()).filter(|&i| s.in_i[i]).map(|i| weights[i]).sum();
            (w, w * w)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn local_search_ratios(corpus: &[Instance], b: usize) -> (Vec<f64>, usize) {
    let geom = Geom::default();
    let results: Vec<(f64, bool)> = corpus
        .par_iter()
        .map(|inst| {
            let unit = inst.normalize_weights(WeightMode::Unit);
            let full = build_geometric(&unit, &geom);
            let (_, opt) = exact_mwis(&full, &vec![1.0; unit.len()]).unwrap();
            let stripped = unit.strip_contained(&geom).unwrap();
            let g = build_geometric(&stripped.instance, &geom);
            let r = local_search(&g, &LocalSearchConfig::new(b).unwrap());
            let ids: Vec<usize> = r.chosen.iter().map(|&i| stripped.kept[i]).collect();
            let ok = full.is_independent(&ids) && verify_locally_optimal(&g, &r.chosen, b) == Ok(None);
            (ids.len() as f64 / opt, ok)
        })
        .collect();
    let bad = results.iter().filter(|r| !r.1).count();
    (results.into_iter().map(|r| r.0).collect(), bad)
}

fn c1(corpus: &[Instance]) -> Outcome {
    let start = Instant::now();
    let (ratios, bad) = local_search_ratios(corpus, 4);
    let elapsed = start.elapsed();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        mean >= 0.9 && min >= 0.6 && bad == 0 && elapsed <= Duration::from_secs(60),
        format!("mean {mean:.4} (>= 0.9), min {min:.4} (>= 0.6), failed checks {bad}, {:.2}s (<= 60s)", elapsed.as_secs_f64()),
    )
}

fn c2(corpus: &[Instance]) -> Outcome {
    let means: Vec<f64> = (1..=4)
        .map(|b| {
            let (r, _) = local_search_ratios(corpus, b);
            r.iter().sum::<f64>() / r.len() as f64
        })
        .collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    outcome(monotone, format!("mean ratio for b = 1..4: {means:.4?}"))
}

fn c3(corpus: &[Instance]) -> Outcome {
    let violations: Vec<String> = corpus
        .par_iter()
        .enumerate()
        .filter_map(|(k, inst)| {
            let geom = Geom::default();
            let lp = build_independent_set_lp(inst, LpMode::Geometric, &geom).unwrap();
            let v = solve_packing_lp(&lp, EPS).unwrap().value;
            let (_, opt) = exact_mwis(&build_geometric(inst, &geom), &inst.weights()).unwrap();
            let exact = exact_lp(&lp).unwrap().value_f64();
            let ok = opt <= v / (1.0 - EPS) && v >= (1.0 - 2.0 * EPS) * exact;
            (!ok).then(|| format!("#{k}: mwis {opt} lp {v} exact {exact}"))
        })
        .collect();
    outcome(violations.is_empty(), format!("{} of {} instances violate the sandwich {:?}", violations.len(), corpus.len(), violations))
}

fn c4() -> Outcome {
    let start = Instant::now();
    let tau = auto_tau(&Family::pseudo_disks(), DEFAULT_C_TAU).unwrap();
    let mut worst_gap = f64::INFINITY;
    let mut survival_fail = 0usize;
    let mut mean_fail = 0usize;
    let mut min_ratio = f64::INFINITY;
    for k in 0..50 {
        let s = solve(&common::large_pseudo_disk(k));
        let plan = RoundingPlan::new(&s.graph, &s.sol.x, tau);
        let n = s.inst.len();
        let (c_count, i_count) = (0..100_000u64)
            .into_par_iter()
            .map_init(Sample::default, |smp, seed| {
                plan.sample(seed, smp);
                let c: Vec<u32> = smp.in_c.iter().map(|&b| b as u32).collect();
                let i: Vec<u32> = smp.in_i.iter().map(|&b| b as u32).collect();
                (c, i)
            })
            .reduce(
                || (vec![0u32; n], vec![0u32; n]),
                |mut a, b| {
                    for j in 0..n {
                        a.0[j] += b.0[j];
                        a.1[j] += b.1[j];
                    }
                    a
                },
            );
        for j in 0..n {
            if c_count[j] == 0 {
                continue;
            }
            let p = i_count[j] as f64 / c_count[j] as f64;
            let sigma = (0.25 / c_count[j] as f64).sqrt();
            let gap = p - (0.5 - 3.0 * sigma);
            worst_gap = worst_gap.min(gap);
            if gap < 0.0 {
                survival_fail += 1;
            }
        }
        let w = s.inst.weights();
        let (mean, _) = monte_carlo(&plan, &w, 1000);
        let floor = expectation_floor(&s.sol.x, &w, tau);
        min_ratio = min_ratio.min(mean / floor);
        if mean < 0.95 * floor {
            mean_fail += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        survival_fail == 0 && mean_fail == 0 && elapsed <= Duration::from_secs(600),
        format!(
            "tau {tau}; objects below 1/2 - 3 sigma: {survival_fail} (worst margin {worst_gap:.4}); \
             instances with mean < 0.95 floor: {mean_fail} (min mean/floor {min_ratio:.3}); {:.1}s (<= 600s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn rounding_trace(r: &SelectionResult) -> &gmis_core::rounding::RoundingTrace {
    match &r.trace {
        Trace::Rounding(t) => t,
        _ => unreachable!(),
    }
}

fn c5(solved: &[Solved]) -> Outcome {
    let tau = auto_tau(&Family::pseudo_disks(), DEFAULT_C_TAU).unwrap();
    let results: Vec<(bool, bool, Option<bool>)> = solved
        .par_iter()
        .map(|s| {
            let w = s.inst.weights();
            let r = derandomized_round(&s.graph, &s.sol.x, &w, tau);
            let floor_ok = r.total_weight >= expectation_floor(&s.sol.x, &w, tau);
            let t = rounding_trace(&r);
            let monotone = t
                .estimator
                .iter()
                .all(|st| st.phi_heads.max(st.phi_tails) >= st.phi_before - 1e-9 * st.phi_before.abs().max(1.0));
            let mc = (s.inst.len() <= 12).then(|| {
                let plan = RoundingPlan::new(&s.graph, &s.sol.x, tau);
                let (mean, se) = monte_carlo(&plan, &w, 100_000);
                r.total_weight >= mean - 3.0 * se
            });
            (floor_ok, monotone, mc)
        })
        .collect();
    let floor_fail = results.iter().filter(|r| !r.0).count();
    let mono_fail = results.iter().filter(|r| !r.1).count();
    let mc_checked = results.iter().filter(|r| r.2.is_some()).count();
    let mc_fail = results.iter().filter(|r| r.2 == Some(false)).count();
    outcome(
        floor_fail + mono_fail + mc_fail == 0,
        format!(
            "below floor: {floor_fail}/{}; below MC mean - 3 sigma: {mc_fail}/{mc_checked}; non-monotone runs: {mono_fail}",
            results.len()
        ),
    )
}

fn c6(solved: &[Solved]) -> Outcome {
    let tau = auto_tau(&Family::pseudo_disks(), DEFAULT_C_TAU).unwrap();
    let small: Vec<&Solved> = solved.iter().filter(|s| s.inst.len() <= 12).collect();
    let mut worst = 0.0f64;
    let mut fails = 0;
    for s in &small {
        let w = s.inst.weights();
        let plan = RoundingPlan::new(&s.graph, &s.sol.x, tau);
        let exact = exhaustive_rounding_expectation(&s.graph, &s.sol.x, &w, tau, &plan.permutation.order).unwrap();
        let (mean, se) = monte_carlo(&plan, &w, 100_000);
        let z = if se > 0.0 { (mean - exact).abs() / se } else if (mean - exact).abs() < 1e-9 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
        if z > 3.0 {
            fails += 1;
        }
    }
    outcome(fails == 0, format!("{fails} of {} instances outside 3 sigma (largest |z| {worst:.2})", small.len()))
}

fn c7() -> Outcome {
    let geom = Geom::default();
    let gaps: Vec<f64> = (0..50)
        .into_par_iter()
        .map(|k| {
            let inst = common::unit_pseudo_disk(k);
            let p = solve_packing_lp(&build_independent_set_lp(&inst, LpMode::Geometric, &geom).unwrap(), EPS)
                .unwrap()
                .value;
            let c = solve_covering_lp(&build_piercing_lp(&inst, &geom), EPS).unwrap().value;
            (p - c).abs() / p
        })
        .collect();
    let worst = gaps.iter().copied().fold(0.0, f64::max);
    outcome(worst <= 3.0 * EPS, format!("largest relative gap {worst:.2e} (<= {:.1e})", 3.0 * EPS))
}

fn c8(solved: &[Solved]) -> Outcome {
    let geom = Geom::default();
    let worst = solved
        .par_iter()
        .map(|s| {
            let arr = geom.arrangement_vertices(&s.inst);
            let energy: f64 = s.sol.x.iter().sum();
            if energy == 0.0 { 0.0 } else { vertex_pair_mass(&arr, &s.sol.x) / energy }
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 8.0 * 6.0, format!("max sum x_i x_j / E = {worst:.3} (<= 48)"))
}

fn c9() -> Outcome {
    let geom = Geom::default();
    let n = 200;
    let thr = depth_threshold(n);
    let ln = (n as f64).ln();
    let factor = 0.05 * ln.ln() / ln;
    let rows: Vec<(bool, bool, bool, bool, f64)> = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let inst = common::rect_instance(k, n);
            let cfg = RoundingConfig { seed: k, ..Default::default() };
            let r = rectangle_mwis(&inst, &cfg, EPS, &geom).unwrap();
            let Trace::Rectangles(t) = &r.trace else { unreachable!() };
            let independent = build_geometric(&inst, &geom).is_independent(&r.chosen);
            let depth_ok = (max_depth(&inst, &t.rounded, &geom) as f64) <= thr;
            let weight_ok = r.total_weight >= factor * t.lp_value;

            let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
            let (cx, cy) = (rng.random::<f64>(), rng.random::<f64>());
            let mut by_dist: Vec<usize> = (0..n).collect();
            let d = |i: usize| inst.shape(i).centroid().dist(gmis_core::Point::new(cx, cy));
            by_dist.sort_by(|&a, &b| d(a).total_cmp(&d(b)));
            let sub = Instance::new(
                Family::Rectangles,
                by_dist[..15].iter().map(|&i| (inst.shape(i).clone(), 1.0)).collect(),
            );
            let split = split_edges(&sub, &geom).unwrap();
            let g2 = split.g2(15);
            let all: Vec<usize> = (0..15).collect();
            let colors = chain_color(&sub, &all, &g2, &geom).unwrap().num_colors;
            let coloring_ok = colors == max_clique(&g2).unwrap();
            (independent, depth_ok, weight_ok, coloring_ok, r.total_weight / t.lp_value)
        })
        .collect();
    let dep = rows.iter().filter(|r| !r.0).count();
    let depth_ok = rows.iter().filter(|r| r.1).count();
    let weight_fail = rows.iter().filter(|r| !r.2).count();
    let color_fail = rows.iter().filter(|r| !r.3).count();
    let min_ratio = rows.iter().map(|r| r.4).fold(f64::INFINITY, f64::min);
    outcome(
        dep == 0 && depth_ok >= 99 && weight_fail == 0 && color_fail == 0,
        format!(
            "dependent outputs {dep}; depth <= {thr:.2} in {depth_ok}/100 seeds; coloring != max clique in {color_fail}/100 sub-samples; \
             weight below {factor:.4} LP in {weight_fail}/100 (min weight/LP {min_ratio:.4})"
        ),
    )
}

fn c10() -> Outcome {
    let spec = BenchSpec {
        corpus: vec![
            GenSpec { kind: ShapeKind::Disks, n: 20, density: 3.0, seed: 11, unit_weights: false },
            GenSpec { kind: ShapeKind::Squares, n: 25, density: 2.5, seed: 12, unit_weights: true },
            GenSpec { kind: ShapeKind::Rects, n: 60, density: 3.0, seed: 13, unit_weights: false },
        ],
        algorithms: vec![
            Algorithm::LocalSearch,
            Algorithm::LpRound,
            Algorithm::LpRoundDerand,
            Algorithm::Rectangles,
            Algorithm::Exact,
        ],
        seeds: vec![1, 2, 3],
        params: Some(RunParams { oracle: true, ..Default::default() }),
    };
    let in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| strip_timing(&run_spec(&spec).unwrap()))
    };
    let a = in_pool(1);
    let b = in_pool(1);
    let c = in_pool(8);
    let d = in_pool(8);
    outcome(a == b && a == c && c == d, format!("{} CSV lines; repeat identical {}, 1 vs 8 threads identical {}", a.lines().count(), a == b, a == c && c == d))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let corpus = common::pseudo_disk_corpus();
    let solved: Vec<Solved> = corpus.par_iter().map(solve).collect();
    let criteria: Vec<Criterion<'_>> = vec![
        ("1 local search vs exact optimum", Box::new(|| c1(&corpus))),
        ("2 local search ratio non-decreasing in b", Box::new(|| c2(&corpus))),
        ("3 LP sandwich", Box::new(|| c3(&corpus))),
        ("4 survival and expectation bound", Box::new(c4)),
        ("5 derandomization dominance", Box::new(|| c5(&solved))),
        ("6 exact expectation match", Box::new(|| c6(&solved))),
        ("7 packing/covering duality", Box::new(c7)),
        ("8 vertex pair mass bound", Box::new(|| c8(&solved))),
        ("9 rectangle pipeline", Box::new(c9)),
        ("10 bench determinism", Box::new(c10)),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "acceptance {name}: {} ({}) [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
