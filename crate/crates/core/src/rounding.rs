//! Contention-resolution rounding of a fractional independent set.
//!
//! Objects are ordered by repeatedly extracting the one of least resistance
//! (LP mass of its still-remaining neighbors). The order is then scanned
//! backwards: each object flips a coin with probability `x / tau` and is
//! kept if it conflicts with nothing kept so far.
//!
//! Coins: trial seed `s` seeds a `ChaCha8Rng`; object `i` owns the `i`-th
//! `f64` drawn from that stream, and its coin is heads iff that draw is
//! below its probability. The stream is portable, so a seed fixes a trace
//! on every platform.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::model::{Family, SelectionResult, Trace};

/// Union constant used for the crossing-free part of a rectangle instance.
pub const RECTANGLE_G1_CONSTANT: f64 = 8.0;

/// Default `c` in `tau = c * rho`.
pub const DEFAULT_C_TAU: f64 = 1.0;

/// Sum of `x_j` over neighbors `j` of `i` with `active[j]`.
pub fn resistance(i: usize, active: &[bool], x: &[f64], graph: &ConflictGraph) -> f64 {
    graph
        .neighbors(i)
        .iter()
        .filter(|&&j| active[j])
        .map(|&j| x[j])
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistancePermutation {
    /// `order[0]` is extracted first.
    pub order: Vec<usize>,
    /// Resistance of `order[k]` at the time it was extracted.
    pub etas: Vec<f64>,
}

impl ResistancePermutation {
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (k, &i) in self.order.iter().enumerate() {
            pos[i] = k;
        }
        pos
    }

    pub fn max_eta(&self) -> f64 {
        self.etas.iter().copied().fold(0.0, f64::max)
    }
}

/// Repeated extract-min of resistance over the remaining objects, ties to
/// the smaller id.
pub fn resistance_permutation(graph: &ConflictGraph, x: &[f64]) -> ResistancePermutation {
    let n = graph.n();
    let mut active = vec![true; n];
    let mut eta: Vec<f64> = (0..n).map(|i| resistance(i, &active, x, graph)).collect();
    let mut order = Vec::with_capacity(n);
    let mut etas = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        for i in 0..n {
            if active[i] && (best == usize::MAX || eta[i] < eta[best]) {
                best = i;
            }
        }
        active[best] = false;
        order.push(best);
        etas.push(eta[best]);
        // Recomputed rather than decremented so values match a fresh sum.
        for &j in graph.neighbors(best) {
            if active[j] {
                eta[j] = resistance(j, &active, x, graph);
            }
        }
    }
    ResistancePermutation { order, etas }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tau {
    Explicit(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingConfig {
    pub tau: Tau,
    pub seed: u64,
    pub derandomize: bool,
    pub c_tau: f64,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            tau: Tau::Auto,
            seed: 0,
            derandomize: false,
            c_tau: DEFAULT_C_TAU,
        }
    }
}

impl RoundingConfig {
    pub fn resolve_tau(&self, family: &Family) -> Result<f64> {
        match self.tau {
            Tau::Explicit(t) if t > 0.0 && t.is_finite() => Ok(t),
            Tau::Explicit(t) => Err(Error::InvalidParameter(format!("tau must be positive, got {t}"))),
            Tau::Auto => auto_tau(family, self.c_tau),
        }
    }
}

/// `tau = c_tau * rho` for families with linear union complexity `rho * m`.
pub fn auto_tau(family: &Family, c_tau: f64) -> Result<f64> {
    if !(c_tau > 0.0 && c_tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("c_tau must be positive, got {c_tau}")));
    }
    family.union_constant().map(|rho| c_tau * rho).ok_or(Error::NoUnionBound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub id: usize,
    pub prob: f64,
    /// Coin outcome, or the chosen branch when derandomized.
    pub in_c: bool,
    pub in_i: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStep {
    pub id: usize,
    pub phi_before: f64,
    pub phi_heads: f64,
    pub phi_tails: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub tau: f64,
    pub seed: Option<u64>,
    pub permutation: ResistancePermutation,
    /// Total LP mass `sum x`.
    pub energy: f64,
    /// Objects with `x / tau > 1`, whose probability was clamped to 1.
    pub clamped: Vec<usize>,
    /// One record per object, in scan order.
    pub decisions: Vec<Decision>,
    /// Derandomization only: estimator values per step, in scan order.
    pub estimator: Vec<EstimatorStep>,
}

fn probabilities(x: &[f64], tau: f64) -> (Vec<f64>, Vec<usize>) {
    let mut clamped = Vec::new();
    let p = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let q = v / tau;
            if q > 1.0 {
                clamped.push(i);
            }
            q.clamp(0.0, 1.0)
        })
        .collect();
    (p, clamped)
}

/// Uniform draws `u_0..u_{n-1}` for one trial.
pub fn coin_draws(seed: u64, n: usize, out: &mut Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.clear();
    out.extend((0..n).map(|_| rng.random::<f64>()));
}

/// Precomputed scan for repeated sampling on a fixed graph and `x`.
#[derive(Debug, Clone)]
pub struct RoundingPlan<'g> {
    graph: &'g ConflictGraph,
    pub permutation: ResistancePermutation,
    pub prob: Vec<f64>,
    pub clamped: Vec<usize>,
    pub tau: f64,
}

/// Per-trial scratch buffers.
#[derive(Debug, Clone, Default)]
pub struct Sample {
    pub draws: Vec<f64>,
    pub in_c: Vec<bool>,
    pub in_i: Vec<bool>,
}

impl<'g> RoundingPlan<'g> {
    pub fn new(graph: &'g ConflictGraph, x: &[f64], tau: f64) -> Self {
        assert_eq!(x.len(), graph.n());
        let (prob, clamped) = probabilities(x, tau);
        RoundingPlan {
            graph,
            permutation: resistance_permutation(graph, x),
            prob,
            clamped,
            tau,
        }
    }

    /// Objects in scan order (the reverse permutation).
    pub fn scan(&self) -> impl Iterator<Item = usize> + '_ {
        self.permutation.order.iter().rev().copied()
    }

    /// Runs one trial into `s`.
    pub fn sample(&self, seed: u64, s: &mut Sample) {
        let n = self.graph.n();
        coin_draws(seed, n, &mut s.draws);
        s.in_c.clear();
        s.in_c.extend((0..n).map(|i| s.draws[i] < self.prob[i]));
        s.in_i.clear();
        s.in_i.resize(n, false);
        for i in self.scan() {
            if s.in_c[i] && !self.graph.neighbors(i).iter().any(|&j| s.in_i[j]) {
                s.in_i[i] = true;
            }
        }
    }

    fn trace(&self, x: &[f64], seed: Option<u64>, in_c: &[bool], in_i: &[bool], estimator: Vec<EstimatorStep>) -> RoundingTrace {
        RoundingTrace {
            tau: self.tau,
            seed,
            permutation: self.permutation.clone(),
            energy: x.iter().sum(),
            clamped: self.clamped.clone(),
            decisions: self
                .scan()
                .map(|i| Decision {
                    id: i,
                    prob: self.prob[i],
                    in_c: in_c[i],
                    in_i: in_i[i],
                })
                .collect(),
            estimator,
        }
    }
}

pub fn randomized_round(graph: &ConflictGraph, x: &[f64], weights: &[f64], tau: f64, seed: u64) -> SelectionResult {
    let plan = RoundingPlan::new(graph, x, tau);
    let mut s = Sample::default();
    plan.sample(seed, &mut s);
    let chosen = (0..graph.n()).filter(|&i| s.in_i[i]).collect();
    let trace = plan.trace(x, Some(seed), &s.in_c, &s.in_i, Vec::new());
    SelectionResult::new("lp-round", chosen, weights, Trace::Rounding(trace))
}

/// Incremental pessimistic estimator for the scan.
///
/// `phi = sum_{decided} w_j [j in I] + sum_{undecided} w_j p_j max(0, 1 - S_j)`
/// where `S_j` sums `s_k` over neighbors scanned before `j`, and `s_k` is
/// `p_k` while undecided, 1 once in `I`, 0 otherwise.
pub(crate) struct Estimator<'a> {
    graph: &'a ConflictGraph,
    weights: &'a [f64],
    prob: &'a [f64],
    pos: Vec<usize>,
    s: Vec<f64>,
    big_s: Vec<f64>,
    in_i: Vec<bool>,
    pub phi: f64,
}

impl<'a> Estimator<'a> {
    /// `pos[i]` is the scan position of `i`.
    pub(crate) fn new(graph: &'a ConflictGraph, weights: &'a [f64], prob: &'a [f64], pos: Vec<usize>) -> Self {
        let n = graph.n();
        let mut e = Estimator {
            graph,
            weights,
            prob,
            pos,
            s: prob.to_vec(),
            big_s: vec![0.0; n],
            in_i: vec![false; n],
            phi: 0.0,
        };
        for j in 0..n {
            e.big_s[j] = e.earlier_sum(j);
            e.phi += e.term(j);
        }
        e
    }

    fn earlier_sum(&self, j: usize) -> f64 {
        self.graph
            .neighbors(j)
            .iter()
            .filter(|&&k| self.pos[k] < self.pos[j])
            .map(|&k| self.s[k])
            .sum()
    }

    fn term(&self, j: usize) -> f64 {
        self.weights[j] * self.prob[j] * (1.0 - self.big_s[j]).max(0.0)
    }

    pub(crate) fn blocked(&self, j: usize) -> bool {
        self.graph.neighbors(j).iter().any(|&k| self.in_i[k])
    }

    /// Change in `phi` if `j` (the next object in scan order) is decided
    /// with `s_j = new_s` and joins `I` when `joins`.
    fn delta(&self, j: usize, new_s: f64, joins: bool) -> f64 {
        let mut d = if joins { self.weights[j] } else { 0.0 } - self.term(j);
        for &l in self.graph.neighbors(j) {
            if self.pos[l] > self.pos[j] {
                let after = self.big_s[l] - self.s[j] + new_s;
                d += self.weights[l] * self.prob[l] * ((1.0 - after).max(0.0) - (1.0 - self.big_s[l]).max(0.0));
            }
        }
        d
    }

    /// `(phi_heads, phi_tails)` for the next object `j`.
    pub(crate) fn branches(&self, j: usize) -> (f64, f64) {
        let joins = !self.blocked(j);
        let heads = self.phi + self.delta(j, if joins { 1.0 } else { 0.0 }, joins);
        let tails = self.phi + self.delta(j, 0.0, false);
        (heads, tails)
    }

    /// Fixes the coin of `j`; returns whether `j` joined `I`.
    pub(crate) fn decide(&mut self, j: usize, heads: bool) -> bool {
        let joins = heads && !self.blocked(j);
        let new_s = if joins { 1.0 } else { 0.0 };
        self.phi += self.delta(j, new_s, joins);
        self.s[j] = new_s;
        self.in_i[j] = joins;
        for &l in self.graph.neighbors(j) {
            if self.pos[l] > self.pos[j] {
                self.big_s[l] = self.earlier_sum(l);
            }
        }
        joins
    }
}

/// Scan positions for a plan: `pos[i]` is where `i` appears in the scan.
pub(crate) fn scan_positions(plan: &RoundingPlan) -> Vec<usize> {
    let mut pos = vec![0; plan.prob.len()];
    for (k, i) in plan.scan().enumerate() {
        pos[i] = k;
    }
    pos
}

/// Derandomized rounding: each coin is fixed to the branch with the larger
/// pessimistic estimator, ties to heads. Branches of probability zero are
/// never taken.
pub fn derandomized_round(graph: &ConflictGraph, x: &[f64], weights: &[f64], tau: f64) -> SelectionResult {
    let plan = RoundingPlan::new(graph, x, tau);
    let n = graph.n();
    let mut est = Estimator::new(graph, weights, &plan.prob, scan_positions(&plan));
    let mut in_c = vec![false; n];
    let mut in_i = vec![false; n];
    let mut steps = Vec::with_capacity(n);
    for j in plan.scan().collect::<Vec<_>>() {
        let (h, t) = est.branches(j);
        let p = plan.prob[j];
        let heads = if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            h >= t
        };
        steps.push(EstimatorStep {
            id: j,
            phi_before: est.phi,
            phi_heads: h,
            phi_tails: t,
        });
        in_c[j] = heads;
        in_i[j] = est.decide(j, heads);
    }
    let chosen = (0..n).filter(|&i| in_i[i]).collect();
    let trace = plan.trace(x, None, &in_c, &in_i, steps);
    SelectionResult::new("lp-round-derand", chosen, weights, Trace::Rounding(trace))
}

/// `sum_j w_j x_j / (2 tau)`.
pub fn expectation_floor(x: &[f64], weights: &[f64], tau: f64) -> f64 {
    x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() / (2.0 * tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exhaustive_rounding_expectation;

    fn path() -> ConflictGraph {
        ConflictGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn star() -> ConflictGraph {
        ConflictGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn resistance_examples() {
        let g = ConflictGraph::from_edges(1, []).unwrap();
        assert_eq!(resistance(0, &[true], &[0.7], &g), 0.0);
        let x = [0.3, 0.5, 0.2];
        assert_eq!(resistance(1, &[true; 3], &x, &path()), 0.5);
        assert_eq!(resistance(1, &[false, true, true], &x, &path()), 0.2);
    }

    #[test]
    fn permutation_examples() {
        let g = ConflictGraph::from_edges(4, []).unwrap();
        assert_eq!(resistance_permutation(&g, &[0.5; 4]).order, vec![0, 1, 2, 3]);
        let p = resistance_permutation(&star(), &[1.0; 4]);
        assert_eq!(p.order[0], 1);
        assert_eq!(p.etas[0], 1.0);
        let p = resistance_permutation(&path(), &[1.0; 3]);
        assert_eq!(p.order, vec![0, 1, 2]);
        assert_eq!(p.etas, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn tau_selection() {
        assert_eq!(auto_tau(&Family::pseudo_disks(), 13.0), Ok(78.0));
        assert_eq!(auto_tau(&Family::Admissible { k: 4 }, 13.0), Ok(156.0));
        assert_eq!(auto_tau(&Family::Rectangles, 13.0), Ok(104.0));
        assert_eq!(auto_tau(&Family::Generic, 13.0), Err(Error::NoUnionBound));
        let cfg = RoundingConfig {
            tau: Tau::Explicit(-1.0),
            ..Default::default()
        };
        assert!(cfg.resolve_tau(&Family::pseudo_disks()).is_err());
    }

    #[test]
    fn randomized_examples() {
        let g = ConflictGraph::from_edges(3, []).unwrap();
        assert_eq!(randomized_round(&g, &[1.0; 3], &[1.0; 3], 1.0, 7).chosen, vec![0, 1, 2]);
        assert!(randomized_round(&path(), &[0.0; 3], &[1.0; 3], 1.0, 7).chosen.is_empty());
    }

    #[test]
    fn single_edge_mean() {
        let g = ConflictGraph::from_edges(2, [(0, 1)]).unwrap();
        let plan = RoundingPlan::new(&g, &[1.0, 1.0], 2.0);
        let mut s = Sample::default();
        let trials = 100_000;
        let mut total = 0usize;
        let mut nonempty = 0usize;
        for seed in 0..trials {
            plan.sample(seed, &mut s);
            let k = s.in_i.iter().filter(|&&b| b).count();
            total += k;
            nonempty += (k >= 1) as usize;
        }
        let mean = total as f64 / trials as f64;
        assert!((0.745..=0.755).contains(&mean), "{mean}");
        assert!((nonempty as f64 / trials as f64 - 0.75).abs() < 0.01);
        let exact = exhaustive_rounding_expectation(&g, &[1.0, 1.0], &[1.0, 1.0], 2.0, &plan.permutation.order).unwrap();
        assert_eq!(exact, 0.75);
    }

    #[test]
    fn clamping_recorded() {
        let g = ConflictGraph::from_edges(2, []).unwrap();
        let r = randomized_round(&g, &[1.0, 0.2], &[1.0, 1.0], 0.5, 1);
        let Trace::Rounding(t) = r.trace else { panic!() };
        assert_eq!(t.clamped, vec![0]);
        assert_eq!(t.decisions.iter().find(|d| d.id == 0).unwrap().prob, 1.0);
    }

    #[test]
    fn derandomized_examples() {
        let g = ConflictGraph::from_edges(3, []).unwrap();
        assert_eq!(derandomized_round(&g, &[1.0, 0.0, 0.4], &[1.0; 3], 2.0).chosen, vec![0, 2]);

        let e = ConflictGraph::from_edges(2, [(0, 1)]).unwrap();
        let r = derandomized_round(&e, &[1.0, 1.0], &[1.0, 1.0], 2.0);
        assert_eq!(r.chosen.len(), 1);
        assert!(r.total_weight >= 0.5);

        let w = [10.0, 1.0, 1.0, 1.0];
        let x = [0.0, 1.0, 1.0, 1.0];
        let r = derandomized_round(&star(), &x, &w, 2.0);
        assert!(r.total_weight >= expectation_floor(&x, &w, 2.0));
    }

    #[test]
    fn estimator_is_monotone_and_exact_at_end() {
        let g = ConflictGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap();
        let x = [0.5, 0.4, 0.6, 0.3, 0.7, 0.5];
        let w = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let r = derandomized_round(&g, &x, &w, 2.5);
        let Trace::Rounding(t) = &r.trace else { panic!() };
        for s in &t.estimator {
            assert!(s.phi_heads.max(s.phi_tails) >= s.phi_before - 1e-12);
        }
        let last = t.estimator.last().unwrap();
        let fin = if t.decisions.last().unwrap().in_c { last.phi_heads } else { last.phi_tails };
        assert!((fin - r.total_weight).abs() < 1e-9);
    }
}
