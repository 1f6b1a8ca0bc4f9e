//! Exact reference solvers used to check the approximation algorithms at
//! small scale: maximum-weight independent set, exact packing-LP optimum in
//! rational arithmetic, and the exact expectation of the randomized
//! rounding scan.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::lp::PackingLp;

pub const MAX_EXACT_MWIS: usize = 30;
pub const MAX_EXHAUSTIVE_ROUNDING: usize = 20;
/// Size caps for the rational simplex.
pub const MAX_EXACT_LP_VARS: usize = 64;
pub const MAX_EXACT_LP_ROWS: usize = 5000;
/// Cap on the number of candidate bases in vertex enumeration.
pub const MAX_ENUMERATED_BASES: u64 = 2_000_000;

/// Maximum-weight independent set by branch and bound. Among optimal sets
/// the lexicographically smallest sorted id sequence is returned.
pub fn exact_mwis(graph: &ConflictGraph, weights: &[f64]) -> Result<(Vec<usize>, f64)> {
    let n = graph.n();
    if n > MAX_EXACT_MWIS {
        return Err(Error::TooLarge(format!("exact MWIS limited to n <= {MAX_EXACT_MWIS}, got {n}")));
    }
    let adj: Vec<u64> = (0..n)
        .map(|i| graph.neighbors(i).iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect();
    let mut bb = BranchAndBound {
        adj,
        w: weights,
        best: 0,
        best_w: 0.0,
        found: false,
    };
    let all = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    bb.search(all, 0, 0.0);
    let ids: Vec<usize> = (0..n).filter(|&i| bb.best >> i & 1 == 1).collect();
    let value = ids.iter().fold(0.0, |acc, &i| acc + weights[i]);
    Ok((ids, value))
}

struct BranchAndBound<'a> {
    adj: Vec<u64>,
    w: &'a [f64],
    best: u64,
    best_w: f64,
    found: bool,
}

impl BranchAndBound<'_> {
    fn better(&self, v: f64) -> bool {
        !self.found || v > self.best_w + 1e-12 * self.best_w.abs().max(1.0)
    }

    /// Greedy clique cover of `cand`; the sum of the heaviest member of each
    /// clique bounds any independent subset.
    fn bound(&self, mut cand: u64) -> f64 {
        let mut total = 0.0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let mut clique = 1u64 << v;
            let mut heaviest = self.w[v];
            let mut rest = cand & self.adj[v];
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if clique & !self.adj[u] == 0 {
                    clique |= 1 << u;
                    heaviest = heaviest.max(self.w[u]);
                }
            }
            cand &= !clique;
            total += heaviest;
        }
        total
    }

    fn search(&mut self, cand: u64, cur: u64, cur_w: f64) {
        if cand == 0 {
            if self.better(cur_w) {
                self.best = cur;
                self.best_w = cur_w;
                self.found = true;
            }
            return;
        }
        if self.found && !self.better(cur_w + self.bound(cand)) {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let rest = cand & !(1u64 << v);
        self.search(rest & !self.adj[v], cur | 1 << v, cur_w + self.w[v]);
        self.search(rest, cur, cur_w);
    }
}

/// Exact optimum of a packing LP.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLp {
    pub value: BigRational,
    pub x: Vec<BigRational>,
}

impl ExactLp {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite weight")
}

/// Exact optimum of `max w.x, rows <= 1, 0 <= x <= 1` by the simplex method
/// in rational arithmetic with Bland's rule.
pub fn exact_lp(lp: &PackingLp) -> Result<ExactLp> {
    let n = lp.n();
    let m = lp.rows().len();
    if n > MAX_EXACT_LP_VARS || m > MAX_EXACT_LP_ROWS {
        return Err(Error::TooLarge(format!(
            "exact LP limited to {MAX_EXACT_LP_VARS} variables and {MAX_EXACT_LP_ROWS} rows, got {n} and {m}"
        )));
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(m + n);
    for row in lp.rows() {
        let mut r = vec![BigRational::zero(); n];
        for &i in row {
            r[i] = BigRational::one();
        }
        rows.push(r);
    }
    for i in 0..n {
        let mut r = vec![BigRational::zero(); n];
        r[i] = BigRational::one();
        rows.push(r);
    }
    let rhs = vec![BigRational::one(); m + n];
    let obj: Vec<BigRational> = lp.weights().iter().map(|&w| rational(w)).collect();
    let (value, x) = simplex_max(rows, rhs, obj);
    Ok(ExactLp { value, x })
}

/// Dictionary simplex for `max c.x, A x <= b, x >= 0` with `b >= 0`.
/// Returns the optimum and an optimal `x`. Bounded problems only.
fn simplex_max(a: Vec<Vec<BigRational>>, b: Vec<BigRational>, c: Vec<BigRational>) -> (BigRational, Vec<BigRational>) {
    let n = c.len();
    let m = a.len();
    // basic_r = b_r - sum_j t[r][j] * nonbasic_j ; z = z0 + sum_j d_j * nonbasic_j
    let mut t = a;
    let mut rhs = b;
    let mut d = c;
    let mut z0 = BigRational::zero();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut basic: Vec<usize> = (n..n + m).collect();
    loop {
        let entering = (0..n)
            .filter(|&j| d[j].is_positive())
            .min_by_key(|&j| nonbasic[j]);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..m {
            if !t[r][e].is_positive() {
                continue;
            }
            let ratio = &rhs[r] / &t[r][e];
            let take = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basic[r] < basic[*l]),
            };
            if take {
                leave = Some((r, ratio));
            }
        }
        let (l, _) = leave.expect("packing LP is bounded");
        let piv = t[l][e].clone();
        let inv = piv.recip();
        // Row l now expresses the entering variable.
        for j in 0..n {
            if j != e {
                t[l][j] = &t[l][j] * &inv;
            }
        }
        t[l][e] = inv.clone();
        rhs[l] = &rhs[l] * &inv;
        let row_l = t[l].clone();
        let rhs_l = rhs[l].clone();
        for r in 0..m {
            if r == l || t[r][e].is_zero() {
                continue;
            }
            let f = t[r][e].clone();
            for j in 0..n {
                if j != e {
                    let delta = &f * &row_l[j];
                    t[r][j] -= delta;
                }
            }
            t[r][e] = -(&f * &inv);
            rhs[r] = &rhs[r] - &f * &rhs_l;
        }
        let f = d[e].clone();
        for j in 0..n {
            if j != e {
                let delta = &f * &row_l[j];
                d[j] -= delta;
            }
        }
        d[e] = -(&f * &inv);
        z0 += &f * &rhs_l;
        std::mem::swap(&mut nonbasic[e], &mut basic[l]);
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &label) in basic.iter().enumerate() {
        if label < n {
            x[label] = rhs[r].clone();
        }
    }
    (z0, x)
}

/// Optimum of `max c.x subject to G x <= h` by enumerating every vertex of
/// the feasible polytope (all nonsingular n-subsets of tight constraints).
/// Returns `None` if no vertex is feasible. Only for tiny bounded problems.
pub fn vertex_enumeration(c: &[BigRational], g: &[Vec<BigRational>], h: &[BigRational]) -> Result<Option<(BigRational, Vec<BigRational>)>> {
    let n = c.len();
    let m = g.len();
    let count = binomial(m as u64, n as u64);
    if count > MAX_ENUMERATED_BASES {
        return Err(Error::TooLarge(format!("{count} candidate bases exceed {MAX_ENUMERATED_BASES}")));
    }
    let mut best: Option<(BigRational, Vec<BigRational>)> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    if n > m {
        return Ok(None);
    }
    loop {
        if let Some(x) = solve_square(&pick.iter().map(|&r| g[r].clone()).collect::<Vec<_>>(), &pick.iter().map(|&r| h[r].clone()).collect::<Vec<_>>()) {
            let feasible = g.iter().zip(h).all(|(row, hv)| dot(row, &x) <= *hv);
            if feasible {
                let v = dot(c, &x);
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
        }
        // Next combination.
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            if pick[k] < m - n + k {
                pick[k] += 1;
                for t in k + 1..n {
                    pick[t] = pick[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Constraint matrix `G x <= h` of a packing LP including box bounds.
pub fn packing_constraints(lp: &PackingLp) -> (Vec<BigRational>, Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = lp.n();
    let mut g = Vec::new();
    let mut h = Vec::new();
    for row in lp.rows() {
        let mut r = vec![BigRational::zero(); n];
        for &i in row {
            r[i] = BigRational::one();
        }
        g.push(r);
        h.push(BigRational::one());
    }
    for i in 0..n {
        let mut up = vec![BigRational::zero(); n];
        up[i] = BigRational::one();
        g.push(up);
        h.push(BigRational::one());
        let mut lo = vec![BigRational::zero(); n];
        lo[i] = -BigRational::one();
        g.push(lo);
        h.push(BigRational::zero());
    }
    let c = lp.weights().iter().map(|&w| rational(w)).collect();
    (c, g, h)
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |s, (x, y)| s + x * y)
}

fn binomial(m: u64, k: u64) -> u64 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Gaussian elimination; `None` when singular.
fn solve_square(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = b.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].recip();
        for j in col..=n {
            m[col][j] = &m[col][j] * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..=n {
                    let delta = &f * &m[col][j];
                    m[r][j] -= delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Exact `E[weight of I]` of the reverse-order coin-flip scan, by
/// enumerating every coin outcome. `order[0]` is the first element of the
/// permutation (scanned last). Coin probabilities are `min(1, x / tau)`.
pub fn exhaustive_rounding_expectation(
    graph: &ConflictGraph,
    x: &[f64],
    weights: &[f64],
    tau: f64,
    order: &[usize],
) -> Result<f64> {
    Ok(exhaustive_survival(graph, x, tau, order)?
        .iter()
        .zip(weights)
        .map(|(p, w)| p * w)
        .sum())
}

/// Exact `P[object ∈ I]` for every object under the same scan.
pub fn exhaustive_survival(graph: &ConflictGraph, x: &[f64], tau: f64, order: &[usize]) -> Result<Vec<f64>> {
    let n = graph.n();
    if n > MAX_EXHAUSTIVE_ROUNDING {
        return Err(Error::TooLarge(format!(
            "exhaustive rounding limited to n <= {MAX_EXHAUSTIVE_ROUNDING}, got {n}"
        )));
    }
    let prob: Vec<f64> = x.iter().map(|&v| (v / tau).clamp(0.0, 1.0)).collect();
    // Only objects with a genuinely random coin need enumerating.
    let random: Vec<usize> = (0..n).filter(|&i| prob[i] > 0.0 && prob[i] < 1.0).collect();
    let mut survive = vec![0.0; n];
    let mut heads = vec![false; n];
    let mut in_set = vec![false; n];
    for pattern in 0u64..(1u64 << random.len()) {
        let mut p = 1.0;
        for i in 0..n {
            heads[i] = prob[i] >= 1.0;
        }
        for (bit, &i) in random.iter().enumerate() {
            let h = pattern >> bit & 1 == 1;
            heads[i] = h;
            p *= if h { prob[i] } else { 1.0 - prob[i] };
        }
        in_set.iter_mut().for_each(|v| *v = false);
        for &i in order.iter().rev() {
            if heads[i] && !graph.neighbors(i).iter().any(|&j| in_set[j]) {
                in_set[i] = true;
                survive[i] += p;
            }
        }
    }
    Ok(survive)
}

/// Brute-force maximum clique size (n <= 30).
pub fn max_clique(graph: &ConflictGraph) -> Result<usize> {
    let n = graph.n();
    if n > MAX_EXACT_MWIS {
        return Err(Error::TooLarge(format!("max clique limited to n <= {MAX_EXACT_MWIS}")));
    }
    // A clique is an independent set of the complement.
    let comp = ConflictGraph::from_edges(
        n,
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| !graph.has_edge(i, j)),
    )?;
    Ok(exact_mwis(&comp, &vec![1.0; n])?.0.len())
}
