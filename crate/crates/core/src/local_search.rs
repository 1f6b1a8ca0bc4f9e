//! Unweighted b-exchange local search.
//!
//! Starting from the empty set, repeatedly find an independent set `X`
//! outside the current solution `L` with `|X| <= b + 1` whose neighborhood
//! `Y` in `L` has at most `|X| - 1` members, and replace `Y` by `X`.
//! Candidates are scanned by size, then lexicographically; the first
//! improving exchange is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::model::{SelectionResult, Trace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSearchConfig {
    pub b: usize,
    pub max_exchanges: Option<usize>,
}

impl LocalSearchConfig {
    pub fn new(b: usize) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidParameter("exchange radius b must be >= 1".into()));
        }
        Ok(LocalSearchConfig { b, max_exchanges: None })
    }

    /// `b = ceil(rho / 2)`, the radius used with a union-complexity bound.
    pub fn for_union_complexity(rho: f64) -> Self {
        LocalSearchConfig {
            b: ((rho / 2.0).ceil() as usize).max(1),
            max_exchanges: None,
        }
    }

    /// `b = ceil(1 / eps^2)` for the approximation-scheme regime.
    pub fn for_ptas(eps: f64) -> Self {
        LocalSearchConfig {
            b: ((1.0 / (eps * eps)).ceil() as usize).max(1),
            max_exchanges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    /// Objects inserted (`X`).
    pub insert: Vec<usize>,
    /// Objects removed (`Y`).
    pub remove: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchTrace {
    pub b: usize,
    pub exchanges: usize,
    pub truncated: bool,
    pub history: Vec<Exchange>,
}

struct State<'g> {
    graph: &'g ConflictGraph,
    in_sol: Vec<bool>,
    /// Number of neighbors in the current solution.
    sol_deg: Vec<usize>,
}

impl<'g> State<'g> {
    fn new(graph: &'g ConflictGraph, ids: &[usize]) -> Self {
        let mut s = State {
            graph,
            in_sol: vec![false; graph.n()],
            sol_deg: vec![0; graph.n()],
        };
        for &i in ids {
            s.add(i);
        }
        s
    }

    fn add(&mut self, i: usize) {
        self.in_sol[i] = true;
        for &j in self.graph.neighbors(i) {
            self.sol_deg[j] += 1;
        }
    }

    fn remove(&mut self, i: usize) {
        self.in_sol[i] = false;
        for &j in self.graph.neighbors(i) {
            self.sol_deg[j] -= 1;
        }
    }

    fn apply(&mut self, ex: &Exchange) {
        for &y in &ex.remove {
            self.remove(y);
        }
        for &x in &ex.insert {
            self.add(x);
        }
    }

    fn solution(&self) -> Vec<usize> {
        (0..self.graph.n()).filter(|&i| self.in_sol[i]).collect()
    }

    /// First improving exchange in canonical order.
    fn find_improvement(&self, b: usize) -> Option<Exchange> {
        let candidates: Vec<usize> = (0..self.graph.n())
            .filter(|&v| !self.in_sol[v] && self.sol_deg[v] <= b)
            .collect();
        for size in 1..=b + 1 {
            let mut x = Vec::with_capacity(size);
            let mut y = Vec::new();
            if let Some(ex) = self.search(&candidates, 0, size, &mut x, &mut y) {
                return Some(ex);
            }
        }
        None
    }

    fn search(
        &self,
        cands: &[usize],
        from: usize,
        size: usize,
        x: &mut Vec<usize>,
        y: &mut Vec<usize>,
    ) -> Option<Exchange> {
        if x.len() == size {
            return Some(Exchange {
                insert: x.clone(),
                remove: {
                    let mut r = y.clone();
                    r.sort_unstable();
                    r
                },
            });
        }
        let budget = size - 1;
        let remaining = size - x.len();
        for k in from..cands.len() {
            if cands.len() - k < remaining {
                break;
            }
            let v = cands[k];
            if self.sol_deg[v] > budget || x.iter().any(|&u| self.graph.has_edge(u, v)) {
                continue;
            }
            let before = y.len();
            for &u in self.graph.neighbors(v) {
                if self.in_sol[u] && !y.contains(&u) {
                    y.push(u);
                }
            }
            if y.len() <= budget {
                x.push(v);
                if let Some(ex) = self.search(cands, k + 1, size, x, y) {
                    return Some(ex);
                }
                x.pop();
            }
            y.truncate(before);
        }
        None
    }
}

/// Runs local search from the empty set. Weights are ignored.
pub fn local_search(graph: &ConflictGraph, cfg: &LocalSearchConfig) -> SelectionResult {
    let mut state = State::new(graph, &[]);
    let mut history = Vec::new();
    let mut truncated = false;
    while let Some(ex) = state.find_improvement(cfg.b) {
        if cfg.max_exchanges.is_some_and(|cap| history.len() >= cap) {
            truncated = true;
            break;
        }
        debug_assert!(ex.insert.len() > ex.remove.len());
        state.apply(&ex);
        history.push(ex);
    }
    let chosen = state.solution();
    let unit = vec![1.0; graph.n()];
    SelectionResult::new(
        "local-search",
        chosen,
        &unit,
        Trace::LocalSearch(LocalSearchTrace {
            b: cfg.b,
            exchanges: history.len(),
            truncated,
            history,
        }),
    )
}

/// `None` iff `ids` is b-locally optimal; otherwise an improving exchange.
pub fn verify_locally_optimal(graph: &ConflictGraph, ids: &[usize], b: usize) -> Result<Option<Exchange>> {
    if let Some((i, j)) = graph.first_conflict(ids) {
        return Err(Error::NotIndependent(i, j));
    }
    Ok(State::new(graph, ids).find_improvement(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_mwis;

    fn cycle(n: usize) -> ConflictGraph {
        ConflictGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn star() -> ConflictGraph {
        ConflictGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn empty_graph_selects_everything() {
        let g = ConflictGraph::from_edges(4, []).unwrap();
        let r = local_search(&g, &LocalSearchConfig::new(1).unwrap());
        assert_eq!(r.chosen, vec![0, 1, 2, 3]);
        assert_eq!(r.total_weight, 4.0);
    }

    #[test]
    fn star_center_is_evicted() {
        let r = local_search(&star(), &LocalSearchConfig::new(1).unwrap());
        assert_eq!(r.chosen, vec![1, 2, 3]);
        let Trace::LocalSearch(t) = &r.trace else { panic!() };
        assert_eq!(
            t.history,
            vec![
                Exchange { insert: vec![0], remove: vec![] },
                Exchange { insert: vec![1, 2], remove: vec![0] },
                Exchange { insert: vec![3], remove: vec![] },
            ]
        );
    }

    #[test]
    fn five_cycle_reaches_optimum() {
        let g = cycle(5);
        let r = local_search(&g, &LocalSearchConfig::new(2).unwrap());
        let (_, opt) = exact_mwis(&g, &[1.0; 5]).unwrap();
        assert_eq!(r.chosen.len(), 2);
        assert_eq!(opt, 2.0);
    }

    #[test]
    fn verify_examples() {
        let g = star();
        let r = local_search(&g, &LocalSearchConfig::new(1).unwrap());
        assert_eq!(verify_locally_optimal(&g, &r.chosen, 1), Ok(None));
        assert_eq!(
            verify_locally_optimal(&g, &[0], 1),
            Ok(Some(Exchange { insert: vec![1, 2], remove: vec![0] }))
        );
        assert_eq!(verify_locally_optimal(&g, &[0, 1], 1), Err(Error::NotIndependent(0, 1)));
        let c = cycle(7);
        let (opt, _) = exact_mwis(&c, &[1.0; 7]).unwrap();
        for b in 1..4 {
            assert_eq!(verify_locally_optimal(&c, &opt, b), Ok(None));
        }
    }

    #[test]
    fn truncation_flag() {
        let g = ConflictGraph::from_edges(5, []).unwrap();
        let r = local_search(&g, &LocalSearchConfig { b: 1, max_exchanges: Some(2) });
        assert_eq!(r.chosen.len(), 2);
        let Trace::LocalSearch(t) = r.trace else { panic!() };
        assert!(t.truncated);
    }

    #[test]
    fn default_radius() {
        assert_eq!(LocalSearchConfig::for_union_complexity(6.0).b, 3);
        assert_eq!(LocalSearchConfig::for_ptas(0.5).b, 4);
        assert!(LocalSearchConfig::new(0).is_err());
    }
}
