//! Weighted independent set of axis-parallel rectangles.
//!
//! Conflicting pairs are split by how their boundaries meet. Pairs whose
//! boundaries cross 0 (nested) or 2 times form `G1`; pairs crossing 4 times
//! (a "plus" shape) form `G2`. The LP is rounded against `G1` only, and the
//! surviving rectangles are properly colored along the crossing order;
//! the heaviest color class is independent in the full conflict graph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{as_rect, Arrangement, Geom};
use crate::graph::{build_geometric, ConflictGraph};
use crate::lp::{geometric_lp, solve_packing_lp};
use crate::model::{Family, Instance, SelectionResult, Trace};
use crate::rounding::{
    derandomized_round, randomized_round, scan_positions, Estimator, EstimatorStep, RoundingConfig, RoundingPlan,
    RoundingTrace,
};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeSplit {
    pub g1_edges: Vec<(usize, usize)>,
    pub g2_edges: Vec<(usize, usize)>,
}

impl EdgeSplit {
    pub fn g1(&self, n: usize) -> ConflictGraph {
        ConflictGraph::from_edges(n, self.g1_edges.iter().copied()).expect("edges come from a valid graph")
    }

    pub fn g2(&self, n: usize) -> ConflictGraph {
        ConflictGraph::from_edges(n, self.g2_edges.iter().copied()).expect("edges come from a valid graph")
    }
}

fn require_rects(inst: &Instance, algorithm: &str) -> Result<Vec<[f64; 4]>> {
    if inst.family != Family::Rectangles {
        return Err(Error::IncompatibleAlgorithm {
            algorithm: algorithm.into(),
            reason: format!("needs a rectangles instance, got {}", inst.family.name()),
        });
    }
    inst.objects
        .iter()
        .map(|o| as_rect(&o.shape).ok_or_else(|| Error::InvalidInstance(format!("object {} is not a rectangle", o.id))))
        .collect()
}

/// Splits the conflict edges by boundary crossing count.
pub fn split_edges(inst: &Instance, geom: &Geom) -> Result<EdgeSplit> {
    require_rects(inst, "split_edges")?;
    let graph = build_geometric(inst, geom);
    split_graph_edges(inst, &graph, geom)
}

fn split_graph_edges(inst: &Instance, graph: &ConflictGraph, geom: &Geom) -> Result<EdgeSplit> {
    let mut split = EdgeSplit::default();
    for &(i, j) in graph.edges() {
        match geom.rect_boundary_count(inst.shape(i), inst.shape(j))? {
            4 => split.g2_edges.push((i, j)),
            _ => split.g1_edges.push((i, j)),
        }
    }
    Ok(split)
}

/// Crossing test from interval containment alone: one rectangle is
/// strictly wider and the other strictly taller.
pub fn crosses_by_intervals(a: [f64; 4], b: [f64; 4]) -> bool {
    let inside = |lo: f64, hi: f64, olo: f64, ohi: f64| olo < lo && hi < ohi;
    (inside(a[0], a[2], b[0], b[2]) && inside(b[1], b[3], a[1], a[3]))
        || (inside(b[0], b[2], a[0], a[2]) && inside(a[1], a[3], b[1], b[3]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainColoring {
    /// Colored ids, sorted.
    pub ids: Vec<usize>,
    /// `color[k]` belongs to `ids[k]`; colors start at 1.
    pub color: Vec<usize>,
    pub num_colors: usize,
}

/// Longest-chain coloring of the crossing order restricted to `rects`.
/// `a` precedes `b` when `a`'s x-interval lies strictly inside `b`'s.
pub fn chain_color(inst: &Instance, rects: &[usize], g2: &ConflictGraph, geom: &Geom) -> Result<ChainColoring> {
    let mut ids = rects.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let boxes: Vec<[f64; 4]> = ids
        .iter()
        .map(|&i| as_rect(inst.shape(i)).ok_or_else(|| Error::InvalidInstance(format!("object {i} is not a rectangle"))))
        .collect::<Result<_>>()?;
    let mut local = vec![usize::MAX; inst.len()];
    for (k, &i) in ids.iter().enumerate() {
        local[i] = k;
    }
    let width = |k: usize| boxes[k][2] - boxes[k][0];
    let mut by_width: Vec<usize> = (0..ids.len()).collect();
    by_width.sort_by(|&a, &b| width(a).total_cmp(&width(b)).then(a.cmp(&b)));

    let mut color = vec![0usize; ids.len()];
    for &k in &by_width {
        let mut c = 1;
        for &j in g2.neighbors(ids[k]) {
            let m = local[j];
            if m == usize::MAX {
                continue;
            }
            let (a, b) = (boxes[m], boxes[k]);
            if (a[0] - b[0]).abs() <= geom.eps && (a[2] - b[2]).abs() <= geom.eps {
                return Err(Error::Degenerate(format!("rectangles {j} and {} share an x-interval", ids[k])));
            }
            let below = a[0] > b[0] && a[2] < b[2];
            let above = b[0] > a[0] && b[2] < a[2];
            if !below && !above {
                return Err(Error::CycleDetected(format!(
                    "crossing pair ({j}, {}) has no x-interval containment",
                    ids[k]
                )));
            }
            if below {
                if color[m] == 0 {
                    return Err(Error::CycleDetected(format!("predecessor {j} of {} not yet colored", ids[k])));
                }
                c = c.max(color[m] + 1);
            }
        }
        color[k] = c;
    }
    let num_colors = color.iter().copied().max().unwrap_or(0);
    Ok(ChainColoring { ids, color, num_colors })
}

/// Maximum depth of `rects` over their pairwise boundary crossings and
/// corners; 0 for the empty set.
pub fn max_depth(inst: &Instance, rects: &[usize], geom: &Geom) -> usize {
    geom.arrangement_of(inst, rects, true)
        .vertices
        .iter()
        .map(|v| v.covering.len())
        .max()
        .unwrap_or(0)
}

/// `2 ln n / ln ln n + 3`, the depth threshold checked on rounded samples.
pub fn depth_threshold(n: usize) -> f64 {
    let ln = (n as f64).ln();
    2.0 * ln / ln.ln() + 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangleTrace {
    pub g1_edges: usize,
    pub g2_edges: usize,
    pub lp_value: f64,
    pub rounding: RoundingTrace,
    /// Ids kept by the rounding step.
    pub rounded: Vec<usize>,
    pub num_colors: usize,
    /// Weight of each color class, color 1 first.
    pub class_weights: Vec<f64>,
    pub chosen_color: usize,
    /// Derandomized runs only.
    pub t: Option<usize>,
    pub final_z: Option<f64>,
}

struct Prepared {
    weights: Vec<f64>,
    arrangement: Arrangement,
    split: EdgeSplit,
    g1: ConflictGraph,
    x: Vec<f64>,
    lp_value: f64,
}

fn prepare(inst: &Instance, lp_eps: f64, geom: &Geom, algorithm: &str) -> Result<Prepared> {
    require_rects(inst, algorithm)?;
    let graph = build_geometric(inst, geom);
    let split = split_graph_edges(inst, &graph, geom)?;
    let arrangement = geom.arrangement_vertices(inst);
    let lp = geometric_lp(inst, &arrangement, geom);
    let sol = solve_packing_lp(&lp, lp_eps)?;
    Ok(Prepared {
        weights: inst.weights(),
        g1: split.g1(inst.len()),
        arrangement,
        split,
        x: sol.x,
        lp_value: sol.value,
    })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    geom: &Geom,
    algorithm: &str,
    prep: &Prepared,
    rounded: Vec<usize>,
    rounding: RoundingTrace,
    t: Option<usize>,
    final_z: Option<f64>,
) -> Result<SelectionResult> {
    let coloring = chain_color(inst, &rounded, &prep.split.g2(inst.len()), geom)?;
    let mut class_weights = vec![0.0; coloring.num_colors];
    for (k, &i) in coloring.ids.iter().enumerate() {
        class_weights[coloring.color[k] - 1] += prep.weights[i];
    }
    let mut chosen_color = 0;
    for c in 0..class_weights.len() {
        if class_weights[c] > class_weights[chosen_color] {
            chosen_color = c;
        }
    }
    let chosen: Vec<usize> = coloring
        .ids
        .iter()
        .zip(&coloring.color)
        .filter(|(_, &c)| c == chosen_color + 1)
        .map(|(&i, _)| i)
        .collect();
    let trace = RectangleTrace {
        g1_edges: prep.split.g1_edges.len(),
        g2_edges: prep.split.g2_edges.len(),
        lp_value: prep.lp_value,
        rounding,
        rounded,
        num_colors: coloring.num_colors,
        class_weights,
        chosen_color: if coloring.num_colors == 0 { 0 } else { chosen_color + 1 },
        t,
        final_z,
    };
    Ok(SelectionResult::new(algorithm, chosen, &prep.weights, Trace::Rectangles(trace)))
}

fn rounded_ids(r: &SelectionResult) -> (Vec<usize>, RoundingTrace) {
    let Trace::Rounding(t) = &r.trace else { unreachable!("rounding returns a rounding trace") };
    (r.chosen.clone(), t.clone())
}

/// Rounds against `G1`, colors the survivors, returns the heaviest class.
/// `cfg.derandomize` selects [`derandomized_rectangle_mwis`].
pub fn rectangle_mwis(inst: &Instance, cfg: &RoundingConfig, lp_eps: f64, geom: &Geom) -> Result<SelectionResult> {
    if cfg.derandomize {
        return derandomized_rectangle_mwis(inst, cfg, lp_eps, geom);
    }
    let tau = cfg.resolve_tau(&Family::Rectangles)?;
    let prep = prepare(inst, lp_eps, geom, "rectangles")?;
    let r = randomized_round(&prep.g1, &prep.x, &prep.weights, tau, cfg.seed);
    let (rounded, trace) = rounded_ids(&r);
    finish(inst, geom, "rectangles", &prep, rounded, trace, None, None)
}

/// Smallest `t >= 1` with `(e / t)^t * points <= 1 / n`.
pub fn chernoff_t(points: usize, n: usize) -> usize {
    let target = -((points.max(1) as f64).ln() + (n.max(1) as f64).ln());
    (1..)
        .find(|&t| {
            let t = t as f64;
            t * (1.0 - t.ln()) <= target
        })
        .unwrap()
}

/// Exact conditional expectation of the depth penalty
/// `sum_p prod_{i contains p} (1 + q_i d_p) (1 + d_p)^(-t)`, where `q_i` is
/// the current probability that `i` is sampled.
struct DepthPenalty {
    /// Per point: covering ids and `d_p`; points with zero LP mass dropped.
    points: Vec<(Vec<usize>, f64)>,
    by_object: Vec<Vec<usize>>,
    factor: Vec<f64>,
    prod: Vec<f64>,
    total: f64,
}

impl DepthPenalty {
    fn new(arr: &Arrangement, x: &[f64], q: &[f64], t: usize) -> Self {
        let tf = t as f64;
        let points: Vec<(Vec<usize>, f64)> = arr
            .vertices
            .iter()
            .filter_map(|v| {
                let mu: f64 = v.covering.iter().map(|&i| x[i]).sum();
                (mu > 0.0).then(|| (v.covering.clone(), tf / mu - 1.0))
            })
            .collect();
        let mut by_object = vec![Vec::new(); x.len()];
        for (k, (cov, _)) in points.iter().enumerate() {
            for &i in cov {
                by_object[i].push(k);
            }
        }
        let factor: Vec<f64> = points.iter().map(|&(_, d)| (1.0 + d).powf(-tf)).collect();
        let mut pen = DepthPenalty {
            prod: vec![0.0; points.len()],
            points,
            by_object,
            factor,
            total: 0.0,
        };
        for k in 0..pen.points.len() {
            pen.prod[k] = pen.product(k, q);
            pen.total += pen.prod[k] * pen.factor[k];
        }
        pen
    }

    fn product(&self, k: usize, q: &[f64]) -> f64 {
        let (cov, d) = &self.points[k];
        cov.iter().map(|&i| 1.0 + q[i] * d).product()
    }

    /// Penalty after setting `q[j] = v`, without committing.
    fn with(&self, q: &mut [f64], j: usize, v: f64) -> f64 {
        let old = q[j];
        q[j] = v;
        let mut total = self.total;
        for &k in &self.by_object[j] {
            total += (self.product(k, q) - self.prod[k]) * self.factor[k];
        }
        q[j] = old;
        total
    }

    fn commit(&mut self, q: &mut [f64], j: usize, v: f64) {
        q[j] = v;
        for &k in &self.by_object[j] {
            let p = self.product(k, q);
            self.total += (p - self.prod[k]) * self.factor[k];
            self.prod[k] = p;
        }
    }
}

/// Derandomized rectangle algorithm. Coins are fixed in scan order by
/// maximizing `phi_G1 / t - opt * penalty`, where the penalty is the exact
/// conditional expectation of `sum_p (1 + d_p)^(depth_C(p) - t)` over the
/// sampled set `C` and `opt` is the LP value.
pub fn derandomized_rectangle_mwis(inst: &Instance, cfg: &RoundingConfig, lp_eps: f64, geom: &Geom) -> Result<SelectionResult> {
    let tau = cfg.resolve_tau(&Family::Rectangles)?;
    let prep = prepare(inst, lp_eps, geom, "rectangles-derand")?;
    let n = inst.len();
    if n == 0 {
        let r = derandomized_round(&prep.g1, &prep.x, &prep.weights, tau);
        let (rounded, trace) = rounded_ids(&r);
        return finish(inst, geom, "rectangles-derand", &prep, rounded, trace, Some(1), Some(0.0));
    }
    let t = chernoff_t(prep.arrangement.vertices.len(), n);
    let tf = t as f64;
    let opt = prep.lp_value;

    let plan = RoundingPlan::new(&prep.g1, &prep.x, tau);
    let mut est = Estimator::new(&prep.g1, &prep.weights, &plan.prob, scan_positions(&plan));
    let mut q = plan.prob.clone();
    let mut pen = DepthPenalty::new(&prep.arrangement, &prep.x, &q, t);
    let combined = |phi: f64, penalty: f64| phi / tf - opt * penalty;

    let mut in_c = vec![false; n];
    let mut in_i = vec![false; n];
    let mut steps = Vec::with_capacity(n);
    for j in plan.scan().collect::<Vec<_>>() {
        let before = combined(est.phi, pen.total);
        let (gh, gt) = est.branches(j);
        let h = combined(gh, pen.with(&mut q, j, 1.0));
        let tl = combined(gt, pen.with(&mut q, j, 0.0));
        let p = plan.prob[j];
        let heads = if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            h >= tl
        };
        steps.push(EstimatorStep {
            id: j,
            phi_before: before,
            phi_heads: h,
            phi_tails: tl,
        });
        in_c[j] = heads;
        in_i[j] = est.decide(j, heads);
        pen.commit(&mut q, j, if heads { 1.0 } else { 0.0 });
    }
    let final_z = combined(est.phi, pen.total);
    let rounded: Vec<usize> = (0..n).filter(|&i| in_i[i]).collect();
    let trace = RoundingTrace {
        tau,
        seed: None,
        energy: prep.x.iter().sum(),
        clamped: plan.clamped.clone(),
        decisions: plan
            .scan()
            .map(|i| crate::rounding::Decision {
                id: i,
                prob: plan.prob[i],
                in_c: in_c[i],
                in_i: in_i[i],
            })
            .collect(),
        permutation: plan.permutation.clone(),
        estimator: steps,
    };
    finish(inst, geom, "rectangles-derand", &prep, rounded, trace, Some(t), Some(final_z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Shape;
    use crate::lp::DEFAULT_LP_EPS as EPS;
    use crate::oracle::max_clique;

    fn g() -> Geom {
        Geom::default()
    }

    fn rects(v: Vec<(Shape, f64)>) -> Instance {
        Instance::new(Family::Rectangles, v)
    }

    /// `k` mutually crossing rectangles around the origin, widths growing
    /// while heights shrink.
    fn telescope(k: usize) -> Instance {
        rects(
            (0..k)
                .map(|i| {
                    let a = 1.0 + i as f64;
                    let b = 1.0 + (k - i) as f64;
                    (Shape::rect(-a, -b, a, b), 1.0)
                })
                .collect(),
        )
    }

    #[test]
    fn split_examples() {
        let disjoint = rects(vec![(Shape::rect(0.0, 0.0, 1.0, 1.0), 1.0), (Shape::rect(2.0, 2.0, 3.0, 3.0), 1.0)]);
        assert_eq!(split_edges(&disjoint, &g()).unwrap(), EdgeSplit::default());
        let corner = rects(vec![(Shape::rect(0.0, 0.0, 2.0, 2.0), 1.0), (Shape::rect(1.0, 1.0, 3.0, 3.0), 1.0)]);
        assert_eq!(split_edges(&corner, &g()).unwrap().g1_edges, vec![(0, 1)]);
        let plus = rects(vec![(Shape::rect(-2.0, -1.0, 2.0, 1.0), 1.0), (Shape::rect(-1.0, -2.0, 1.0, 2.0), 1.0)]);
        assert_eq!(split_edges(&plus, &g()).unwrap().g2_edges, vec![(0, 1)]);
        let nested = rects(vec![(Shape::rect(0.0, 0.0, 4.0, 4.0), 1.0), (Shape::rect(1.0, 1.0, 2.0, 2.0), 1.0)]);
        assert_eq!(split_edges(&nested, &g()).unwrap().g1_edges, vec![(0, 1)]);
        let disks = Instance::unit(Family::pseudo_disks(), vec![Shape::disk(0.0, 0.0, 1.0)]);
        assert!(matches!(split_edges(&disks, &g()), Err(Error::IncompatibleAlgorithm { .. })));
    }

    #[test]
    fn coloring_examples() {
        let inst = telescope(3);
        let split = split_edges(&inst, &g()).unwrap();
        let g2 = split.g2(3);
        let none = chain_color(&inst, &[0], &g2, &g()).unwrap();
        assert_eq!((none.color, none.num_colors), (vec![1], 1));
        let two = chain_color(&inst, &[0, 1], &g2, &g()).unwrap();
        assert_eq!(two.color, vec![1, 2]);
        let three = chain_color(&inst, &[0, 1, 2], &g2, &g()).unwrap();
        assert_eq!((three.color, three.num_colors), (vec![1, 2, 3], 3));
        assert_eq!(g().depth_at(&inst, &[0, 1, 2], crate::model::Point::new(0.0, 0.0)), 3);
        assert_eq!(max_clique(&g2).unwrap(), 3);
    }

    #[test]
    fn depth_examples() {
        let disjoint = rects(vec![(Shape::rect(0.0, 0.0, 1.0, 1.0), 1.0), (Shape::rect(2.0, 2.0, 3.0, 3.0), 1.0)]);
        assert_eq!(max_depth(&disjoint, &[0, 1], &g()), 1);
        assert_eq!(max_depth(&telescope(4), &[0, 1, 2, 3], &g()), 4);
        assert_eq!(max_depth(&disjoint, &[], &g()), 0);
    }

    #[test]
    fn interval_predicate_agrees() {
        let inst = telescope(4);
        let split = split_edges(&inst, &g()).unwrap();
        for &(i, j) in &split.g2_edges {
            assert!(crosses_by_intervals(as_rect(inst.shape(i)).unwrap(), as_rect(inst.shape(j)).unwrap()));
        }
        assert!(split.g1_edges.is_empty());
    }

    #[test]
    fn mwis_examples() {
        let cfg = RoundingConfig {
            tau: crate::rounding::Tau::Explicit(1.0),
            ..Default::default()
        };
        let disjoint = rects((0..4).map(|i| (Shape::rect(3.0 * i as f64, 0.0, 3.0 * i as f64 + 1.0, 1.0), 1.0)).collect());
        assert_eq!(rectangle_mwis(&disjoint, &cfg, EPS, &g()).unwrap().chosen, vec![0, 1, 2, 3]);

        let corner = rects(vec![(Shape::rect(0.0, 0.0, 2.0, 2.0), 1.0), (Shape::rect(1.0, 1.0, 3.0, 3.0), 1.0)]);
        for seed in 0..20 {
            let r = rectangle_mwis(&corner, &RoundingConfig { seed, ..cfg }, EPS, &g()).unwrap();
            assert!(r.chosen.len() <= 1);
        }

        let plus = rects(vec![(Shape::rect(-2.0, -1.0, 2.0, 1.0), 5.0), (Shape::rect(-1.0, -2.0, 1.0, 2.0), 1.0)]);
        let r = rectangle_mwis(&plus, &cfg, EPS, &g()).unwrap();
        assert_eq!(r.chosen, vec![0]);
        // With both rectangles kept by the rounding, the classes are {1} and {5}.
        let split = split_edges(&plus, &g()).unwrap();
        let c = chain_color(&plus, &[0, 1], &split.g2(2), &g()).unwrap();
        assert_eq!((c.color, c.num_colors), (vec![2, 1], 2));
    }

    #[test]
    fn derandomized_examples() {
        let cfg = RoundingConfig {
            tau: crate::rounding::Tau::Explicit(1.0),
            derandomize: true,
            ..Default::default()
        };
        let single = rects(vec![(Shape::rect(0.0, 0.0, 1.0, 1.0), 2.0)]);
        let r = rectangle_mwis(&single, &cfg, EPS, &g()).unwrap();
        assert_eq!(r.chosen, vec![0]);
        let Trace::Rectangles(t) = &r.trace else { panic!() };
        assert!(r.total_weight >= t.final_z.unwrap());

        let two = rects(vec![(Shape::rect(0.0, 0.0, 1.0, 1.0), 1.0), (Shape::rect(2.0, 2.0, 3.0, 3.0), 1.0)]);
        assert_eq!(rectangle_mwis(&two, &cfg, EPS, &g()).unwrap().chosen, vec![0, 1]);
    }

    #[test]
    fn chernoff_examples() {
        // (e/3)^3 * 4 > 1 >= (e/4)^4 * 4.
        assert_eq!(chernoff_t(4, 1), 4);
        let t = chernoff_t(1000, 200);
        let ok = |t: usize| (std::f64::consts::E / t as f64).powi(t as i32) * 1000.0 <= 1.0 / 200.0;
        assert!(ok(t) && !ok(t - 1));
    }
}
