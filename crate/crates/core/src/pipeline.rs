//! Algorithm dispatch and result verification.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geom;
use crate::graph::{build_discrete, build_geometric, ConflictGraph};
use crate::local_search::{local_search, verify_locally_optimal, LocalSearchConfig};
use crate::lp::{build_independent_set_lp, solve_packing_lp, LpMode, DEFAULT_LP_EPS};
use crate::model::{Instance, SelectionResult, Trace};
use crate::oracle::{exact_mwis, MAX_EXACT_MWIS};
use crate::rectangles::rectangle_mwis;
use crate::rounding::{derandomized_round, randomized_round, RoundingConfig, Tau, DEFAULT_C_TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    LocalSearch,
    LpRound,
    LpRoundDerand,
    Rectangles,
    DiscreteLpRound,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::LocalSearch,
        Algorithm::LpRound,
        Algorithm::LpRoundDerand,
        Algorithm::Rectangles,
        Algorithm::DiscreteLpRound,
        Algorithm::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LocalSearch => "local-search",
            Algorithm::LpRound => "lp-round",
            Algorithm::LpRoundDerand => "lp-round-derand",
            Algorithm::Rectangles => "rectangles",
            Algorithm::DiscreteLpRound => "discrete-lp-round",
            Algorithm::Exact => "exact",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunParams {
    /// Local-search radius; defaults from the family's union constant.
    pub b: Option<usize>,
    pub tau: Tau,
    pub c_tau: f64,
    pub eps: f64,
    pub seed: u64,
    pub derandomize: bool,
    /// Also compute the exact optimum when `n <= 30`.
    pub oracle: bool,
    pub geom_eps: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            b: None,
            tau: Tau::Auto,
            c_tau: DEFAULT_C_TAU,
            eps: DEFAULT_LP_EPS,
            seed: 0,
            derandomize: false,
            oracle: false,
            geom_eps: crate::geometry::DEFAULT_EPS,
        }
    }
}

impl RunParams {
    pub fn rounding(&self) -> RoundingConfig {
        RoundingConfig {
            tau: self.tau,
            seed: self.seed,
            derandomize: self.derandomize,
            c_tau: self.c_tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub algorithm: String,
    pub n: usize,
    pub weight: f64,
    pub lp_value: Option<f64>,
    pub oracle_value: Option<f64>,
    pub ratio_to_lp: Option<f64>,
    pub ratio_to_oracle: Option<f64>,
    pub time_ms: f64,
}

fn incompatible(alg: Algorithm, reason: impl Into<String>) -> Error {
    Error::IncompatibleAlgorithm {
        algorithm: alg.name().into(),
        reason: reason.into(),
    }
}

/// Default local-search radius for an instance.
pub fn default_b(inst: &Instance) -> usize {
    inst.family
        .union_constant()
        .map(|rho| LocalSearchConfig::for_union_complexity(rho).b)
        .unwrap_or(2)
}

/// Conflict graph the algorithm's output must be independent in.
pub fn conflict_graph(inst: &Instance, alg: Algorithm, geom: &Geom) -> Result<ConflictGraph> {
    match alg {
        Algorithm::DiscreteLpRound => build_discrete(inst, geom),
        _ => Ok(build_geometric(inst, geom)),
    }
}

pub fn check_compatible(inst: &Instance, alg: Algorithm) -> Result<()> {
    match alg {
        Algorithm::LocalSearch if !inst.has_uniform_weights() => {
            Err(incompatible(alg, "local search needs unit weights"))
        }
        Algorithm::Rectangles if inst.family != crate::model::Family::Rectangles => {
            Err(incompatible(alg, format!("needs a rectangles instance, got {}", inst.family.name())))
        }
        Algorithm::DiscreteLpRound if inst.points.is_none() => {
            Err(incompatible(alg, "discrete rounding needs a point set"))
        }
        Algorithm::Exact if inst.len() > MAX_EXACT_MWIS => Err(Error::TooLarge(format!(
            "exact solver limited to n <= {MAX_EXACT_MWIS}, got {}",
            inst.len()
        ))),
        _ => Ok(()),
    }
}

fn run_lp_round(inst: &Instance, graph: &ConflictGraph, mode: LpMode, derand: bool, p: &RunParams, geom: &Geom) -> Result<(SelectionResult, f64)> {
    let tau = p.rounding().resolve_tau(&inst.family)?;
    let lp = build_independent_set_lp(inst, mode, geom)?;
    let sol = solve_packing_lp(&lp, p.eps)?;
    let w = inst.weights();
    let mut r = if derand {
        derandomized_round(graph, &sol.x, &w, tau)
    } else {
        randomized_round(graph, &sol.x, &w, tau, p.seed)
    };
    if mode == LpMode::Discrete {
        r.algorithm = Algorithm::DiscreteLpRound.name().into();
    }
    Ok((r, sol.value))
}

/// Runs `alg` on `inst`. Instances are canonicalized (ids `0..n`) first.
/// The output is re-checked for independence before returning.
pub fn run(inst: &Instance, alg: Algorithm, p: &RunParams) -> Result<(SelectionResult, Report)> {
    check_compatible(inst, alg)?;
    let mut inst = inst.clone();
    if !inst.has_canonical_ids() {
        inst.canonicalize();
    }
    let geom = Geom::new(p.geom_eps);
    let start = Instant::now();
    let graph = conflict_graph(&inst, alg, &geom)?;
    let (result, lp_value) = match alg {
        Algorithm::LocalSearch => {
            let stripped = inst.strip_contained(&geom)?;
            let cfg = LocalSearchConfig::new(p.b.unwrap_or_else(|| default_b(&inst)))?;
            let g = build_geometric(&stripped.instance, &geom);
            let r = local_search(&g, &cfg);
            let chosen = r.chosen.iter().map(|&i| stripped.kept[i]).collect();
            (SelectionResult::new(alg.name(), chosen, &inst.weights(), r.trace), None)
        }
        Algorithm::LpRound | Algorithm::LpRoundDerand => {
            let derand = alg == Algorithm::LpRoundDerand || p.derandomize;
            let (r, v) = run_lp_round(&inst, &graph, LpMode::Geometric, derand, p, &geom)?;
            (r, Some(v))
        }
        Algorithm::DiscreteLpRound => {
            let (r, v) = run_lp_round(&inst, &graph, LpMode::Discrete, p.derandomize, p, &geom)?;
            (r, Some(v))
        }
        Algorithm::Rectangles => {
            let r = rectangle_mwis(&inst, &p.rounding(), p.eps, &geom)?;
            let Trace::Rectangles(t) = &r.trace else { unreachable!() };
            let v = t.lp_value;
            (r, Some(v))
        }
        Algorithm::Exact => {
            let (ids, value) = exact_mwis(&graph, &inst.weights())?;
            (SelectionResult::new(alg.name(), ids, &inst.weights(), Trace::Exact { value }), None)
        }
    };
    let time_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some((a, b)) = graph.first_conflict(&result.chosen) {
        return Err(Error::NotIndependent(a, b));
    }
    let oracle_value = if p.oracle && inst.len() <= MAX_EXACT_MWIS {
        Some(exact_mwis(&graph, &inst.weights())?.1)
    } else {
        None
    };
    let ratio = |d: Option<f64>| d.map(|d| if d > 0.0 { result.total_weight / d } else { 1.0 });
    let report = Report {
        algorithm: result.algorithm.clone(),
        n: inst.len(),
        weight: result.total_weight,
        lp_value,
        oracle_value,
        ratio_to_lp: ratio(lp_value),
        ratio_to_oracle: ratio(oracle_value),
        time_ms,
    };
    Ok((result, report))
}

/// Problems found when re-checking a result against an instance; empty
/// when the result is consistent.
pub fn verify(inst: &Instance, result: &SelectionResult, geom: &Geom) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    let n = inst.len();
    if let Some(&bad) = result.chosen.iter().find(|&&i| i >= n) {
        problems.push(format!("id {bad} out of range for n = {n}"));
        return Ok(problems);
    }
    if result.chosen.windows(2).any(|w| w[0] >= w[1]) {
        problems.push("chosen ids are not sorted and unique".into());
    }
    let discrete = result.algorithm == Algorithm::DiscreteLpRound.name();
    let graph = if discrete { build_discrete(inst, geom)? } else { build_geometric(inst, geom) };
    if let Some((a, b)) = graph.first_conflict(&result.chosen) {
        problems.push(format!("objects {a} and {b} conflict"));
    }
    let w = inst.weights();
    let total: f64 = result.chosen.iter().map(|&i| w[i]).sum();
    if (total - result.total_weight).abs() > 1e-9 * total.abs().max(1.0) {
        problems.push(format!("total weight {} does not match recomputed {total}", result.total_weight));
    }
    match &result.trace {
        Trace::LocalSearch(t) if problems.is_empty() => {
            let stripped = inst.strip_contained(geom)?;
            let mut new_id = vec![usize::MAX; n];
            for (k, &orig) in stripped.kept.iter().enumerate() {
                new_id[orig] = k;
            }
            if result.chosen.iter().any(|&i| new_id[i] == usize::MAX) {
                problems.push("local-search result uses a stripped object".into());
            } else {
                let ids: Vec<usize> = result.chosen.iter().map(|&i| new_id[i]).collect();
                let g = build_geometric(&stripped.instance, geom);
                if let Some(ex) = verify_locally_optimal(&g, &ids, t.b)? {
                    problems.push(format!("not {}-locally optimal: {:?}", t.b, ex));
                }
            }
        }
        Trace::Rounding(t) => {
            for d in &t.decisions {
                if d.in_i && !d.in_c {
                    problems.push(format!("object {} kept without being sampled", d.id));
                }
                if d.in_i != result.chosen.binary_search(&d.id).is_ok() {
                    problems.push(format!("trace and selection disagree on object {}", d.id));
                }
            }
        }
        Trace::Rectangles(t) => {
            if result.chosen.iter().any(|i| t.rounded.binary_search(i).is_err()) {
                problems.push("selection is not a subset of the rounded set".into());
            }
        }
        Trace::Exact { value } if (value - total).abs() > 1e-9 * total.abs().max(1.0) => {
            problems.push(format!("exact value {value} does not match selection weight {total}"));
        }
        _ => {}
    }
    Ok(problems)
}
