//! The packing LP relaxation of independent set and its dual piercing LP.
//!
//! The packing LP has one variable per object and one `sum <= 1` row per
//! point whose covering set has at least two objects (arrangement vertices,
//! or discrete input points), plus containment rows. Both LPs are solved
//! with a sparse simplex backend; the packing solution is scaled down
//! afterwards so every row holds exactly.

use std::collections::HashSet;
use std::fmt::Write as _;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Arrangement, Geom, Partner};
use crate::graph::points_per_object;
use crate::model::{Instance, Point};

pub const DEFAULT_LP_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpMode {
    Geometric,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowSource {
    Vertex { p: Point, i: usize, j: Partner },
    /// `{i} ∪ {j : f_i ⊆ f_j}`.
    Containment(usize),
    /// Index into the instance point set.
    DiscretePoint(usize),
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingLp {
    weights: Vec<f64>,
    rows: Vec<Vec<usize>>,
    sources: Vec<RowSource>,
}

impl PackingLp {
    /// LP with explicit rows. Rows are sorted, deduplicated, and rows with
    /// fewer than two ids dropped.
    pub fn new(weights: Vec<f64>, rows: Vec<Vec<usize>>) -> Self {
        Self::from_sourced(weights, rows.into_iter().map(|r| (r, RowSource::Explicit)))
    }

    fn from_sourced(weights: Vec<f64>, rows: impl IntoIterator<Item = (Vec<usize>, RowSource)>) -> Self {
        let mut seen = HashSet::new();
        let mut kept: Vec<(Vec<usize>, RowSource)> = Vec::new();
        for (mut r, src) in rows {
            r.sort_unstable();
            r.dedup();
            if r.len() < 2 {
                continue;
            }
            if seen.insert(r.clone()) {
                kept.push((r, src));
            }
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        let (rows, sources) = kept.into_iter().unzip();
        PackingLp { weights, rows, sources }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn sources(&self) -> &[RowSource] {
        &self.sources
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), self.n());
        PackingLp {
            weights,
            rows: self.rows.clone(),
            sources: self.sources.clone(),
        }
    }

    pub fn max_row_load(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&i| x[i]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }

    /// Plain-text export: an objective line `max: w0 w1 ...` followed by one
    /// `≤ 1 : i j k` line per row.
    pub fn to_text(&self) -> String {
        let mut s = String::from("max:");
        for w in &self.weights {
            write!(s, " {w}").unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str("≤ 1 :");
            for i in r {
                write!(s, " {i}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

pub fn build_independent_set_lp(inst: &Instance, mode: LpMode, geom: &Geom) -> Result<PackingLp> {
    match mode {
        LpMode::Geometric => {
            let arr = geom.arrangement_vertices(inst);
            Ok(geometric_lp(inst, &arr, geom))
        }
        LpMode::Discrete => {
            let points = inst.points.as_ref().ok_or(Error::MissingPoints)?;
            let per_object = points_per_object(inst, points, geom);
            let mut covering = vec![Vec::new(); points.len()];
            for (i, pts) in per_object.iter().enumerate() {
                for &p in pts {
                    covering[p].push(i);
                }
            }
            Ok(PackingLp::from_sourced(
                inst.weights(),
                covering
                    .into_iter()
                    .enumerate()
                    .map(|(p, ids)| (ids, RowSource::DiscretePoint(p))),
            ))
        }
    }
}

/// Geometric packing LP from a precomputed arrangement.
pub fn geometric_lp(inst: &Instance, arr: &Arrangement, geom: &Geom) -> PackingLp {
    let vertex_rows = arr.vertices.iter().map(|v| {
        (
            v.covering.clone(),
            RowSource::Vertex {
                p: v.p,
                i: v.i,
                j: v.j,
            },
        )
    });
    PackingLp::from_sourced(
        inst.weights(),
        vertex_rows.chain(containment_rows(inst, geom)),
    )
}

fn containment_rows(inst: &Instance, geom: &Geom) -> Vec<(Vec<usize>, RowSource)> {
    let n = inst.len();
    (0..n)
        .map(|i| {
            let mut row = vec![i];
            for j in 0..n {
                if j != i
                    && inst.shape(j).bbox().overlaps(&inst.shape(i).bbox(), geom.eps)
                    && geom.contains_shape(inst.shape(j), inst.shape(i))
                {
                    row.push(j);
                }
            }
            (row, RowSource::Containment(i))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Largest `sum - 1` over rows after the final scaling (0 when feasible).
    pub max_row_violation: f64,
    /// Factor the raw solver output was divided by.
    pub scale: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")))
    }
}

fn solver_err(e: microlp::Error) -> Error {
    Error::Solver(e.to_string())
}

/// Solves the packing LP. The returned `x` satisfies every row exactly;
/// the scale-down needed to get there may cost at most an `eps` fraction
/// of the objective, otherwise the solve is reported as failed.
pub fn solve_packing_lp(lp: &PackingLp, eps: f64) -> Result<FractionalSolution> {
    check_eps(eps)?;
    let n = lp.n();
    let raw = if lp.rows.is_empty() {
        vec![1.0; n]
    } else {
        let mut prob = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = lp.weights.iter().map(|&w| prob.add_var(w, (0.0, 1.0))).collect();
        for row in &lp.rows {
            prob.add_constraint(row.iter().map(|&i| (vars[i], 1.0)).collect::<Vec<_>>(), ComparisonOp::Le, 1.0);
        }
        let sol = prob
            .solve()
            .map_err(solver_err)?
            .into_solution()
            .map_err(|_| Error::Solver("solve interrupted".into()))?;
        vars.iter().map(|&v| sol.var_value(v).clamp(0.0, 1.0)).collect()
    };
    let raw_value = lp.objective(&raw);
    let load = lp.max_row_load(&raw);
    let scale = load.max(1.0);
    let x: Vec<f64> = raw.iter().map(|v| v / scale).collect();
    let value = lp.objective(&x);
    if value < (1.0 - eps) * raw_value {
        return Err(Error::Solver(format!(
            "row violation {load} too large to repair within eps = {eps}"
        )));
    }
    let max_row_violation = (lp.max_row_load(&x) - 1.0).max(0.0);
    Ok(FractionalSolution {
        x,
        value,
        max_row_violation,
        scale,
    })
}

/// Fractional piercing LP: one variable per candidate point, one covering
/// row per object.
#[derive(Debug, Clone, PartialEq)]
pub struct PiercingLp {
    pub candidates: Vec<Point>,
    /// Candidate is an interior point added for an object containing no
    /// arrangement vertex.
    pub synthetic: Vec<bool>,
    /// Per object, the sorted candidates it contains.
    pub pierced_by: Vec<Vec<usize>>,
}

pub fn build_piercing_lp(inst: &Instance, geom: &Geom) -> PiercingLp {
    let arr = geom.arrangement_vertices(inst);
    let n = inst.len();
    let mut candidates = Vec::new();
    let mut synthetic = Vec::new();
    let mut pierced_by = vec![Vec::new(); n];
    for v in &arr.vertices {
        let c = candidates.len();
        candidates.push(v.p);
        synthetic.push(false);
        for &k in &v.covering {
            pierced_by[k].push(c);
        }
    }
    for i in 0..n {
        if !pierced_by[i].is_empty() {
            continue;
        }
        let p = inst.shape(i).centroid();
        let c = candidates.len();
        candidates.push(p);
        synthetic.push(true);
        for (k, list) in pierced_by.iter_mut().enumerate() {
            if geom.contains_point(inst.shape(k), p) {
                list.push(c);
            }
        }
    }
    for l in &mut pierced_by {
        l.sort_unstable();
        l.dedup();
    }
    PiercingLp {
        candidates,
        synthetic,
        pierced_by,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSolution {
    pub y: Vec<f64>,
    pub value: f64,
    /// Smallest row coverage after the final scaling (>= 1 when feasible).
    pub min_coverage: f64,
}

/// Solves `min sum y` subject to every object being covered at least once.
pub fn solve_covering_lp(lp: &PiercingLp, eps: f64) -> Result<CoveringSolution> {
    check_eps(eps)?;
    let m = lp.candidates.len();
    if lp.pierced_by.iter().any(|r| r.is_empty()) {
        return Err(Error::Solver("an object contains no candidate point".into()));
    }
    let raw: Vec<f64> = if lp.pierced_by.is_empty() {
        vec![0.0; m]
    } else {
        let mut prob = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..m).map(|_| prob.add_var(1.0, (0.0, 1.0))).collect();
        for row in &lp.pierced_by {
            prob.add_constraint(row.iter().map(|&c| (vars[c], 1.0)).collect::<Vec<_>>(), ComparisonOp::Ge, 1.0);
        }
        let sol = prob
            .solve()
            .map_err(solver_err)?
            .into_solution()
            .map_err(|_| Error::Solver("solve interrupted".into()))?;
        vars.iter().map(|&v| sol.var_value(v).clamp(0.0, 1.0)).collect()
    };
    let coverage = |y: &[f64]| {
        lp.pierced_by
            .iter()
            .map(|r| r.iter().map(|&c| y[c]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let raw_value: f64 = raw.iter().sum();
    let low = coverage(&raw);
    let y: Vec<f64> = if low < 1.0 && low > 0.0 {
        raw.iter().map(|v| (v / low).min(1.0)).collect()
    } else {
        raw
    };
    let value: f64 = y.iter().sum();
    if value > (1.0 + eps) * raw_value + 1e-12 {
        return Err(Error::Solver("covering repair exceeded eps".into()));
    }
    let min_coverage = if lp.pierced_by.is_empty() { f64::INFINITY } else { coverage(&y) };
    Ok(CoveringSolution { y, value, min_coverage })
}

/// `sum over arrangement vertices (p, i, j) of x_i * x_j`, corners excluded.
pub fn vertex_pair_mass(arr: &Arrangement, x: &[f64]) -> f64 {
    arr.vertices
        .iter()
        .filter_map(|v| match v.j {
            Partner::Object(j) => Some(x[v.i] * x[j]),
            Partner::Corner => None,
        })
        .sum()
}
