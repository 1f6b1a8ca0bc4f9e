//! Conflict graphs: objects are vertices, conflicting pairs are edges.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geom;
use crate::model::{Bbox, Instance, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    Geometric,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    mode: GraphMode,
    /// Sorted `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    /// Index into the instance point set, aligned with `edges` (discrete mode).
    witness: Vec<Option<usize>>,
}

impl ConflictGraph {
    /// Builds a graph from an explicit edge list. Duplicates and orientation
    /// are normalized; self-loops are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b}) for n = {n}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let witness = vec![None; list.len()];
        Ok(Self::assemble(n, list, witness, GraphMode::Geometric))
    }

    fn assemble(n: usize, edges: Vec<(usize, usize)>, witness: Vec<Option<usize>>, mode: GraphMode) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        ConflictGraph {
            n,
            adj,
            mode,
            edges,
            witness,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn witness(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search(&key)
            .ok()
            .and_then(|k| self.witness[k])
    }

    /// No two of `ids` are adjacent.
    pub fn is_independent(&self, ids: &[usize]) -> bool {
        self.first_conflict(ids).is_none()
    }

    pub fn first_conflict(&self, ids: &[usize]) -> Option<(usize, usize)> {
        let mut mark = vec![false; self.n];
        for &i in ids {
            mark[i] = true;
        }
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        sorted
            .into_iter()
            .find_map(|i| self.adj[i].iter().find(|&&j| j > i && mark[j]).map(|&j| (i, j)))
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    /// Plain-text edge list: `p edge n m` header, then one `e i j` line per
    /// edge (0-based ids).
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p edge {} {}\n", self.n, self.edges.len());
        for (a, b) in &self.edges {
            writeln!(s, "e {a} {b}").unwrap();
        }
        s
    }
}

/// Edge iff the closed regions intersect.
pub fn build_geometric(inst: &Instance, geom: &Geom) -> ConflictGraph {
    let n = inst.len();
    let boxes: Vec<Bbox> = inst.objects.iter().map(|o| o.shape.bbox()).collect();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let boxes = &boxes;
            (i + 1..n)
                .filter(move |&j| boxes[i].overlaps(&boxes[j], geom.eps))
                .filter(move |&j| geom.intersects(inst.shape(i), inst.shape(j)))
                .map(move |j| (i, j))
        })
        .collect();
    let witness = vec![None; edges.len()];
    ConflictGraph::assemble(n, edges, witness, GraphMode::Geometric)
}

/// Edge iff some point of the instance's point set lies in both regions;
/// the witness is the smallest such point index.
pub fn build_discrete(inst: &Instance, geom: &Geom) -> Result<ConflictGraph> {
    let points = inst.points.as_ref().ok_or(Error::MissingPoints)?;
    let covered = points_per_object(inst, points, geom);
    let n = inst.len();
    let pairs: Vec<((usize, usize), usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let covered = &covered;
            (i + 1..n).filter_map(move |j| first_common(&covered[i], &covered[j]).map(|p| ((i, j), p)))
        })
        .collect();
    let (edges, witness): (Vec<_>, Vec<_>) = pairs.into_iter().map(|(e, p)| (e, Some(p))).unzip();
    Ok(ConflictGraph::assemble(n, edges, witness, GraphMode::Discrete))
}

/// For each object, the sorted indices of the points it contains.
pub fn points_per_object(inst: &Instance, points: &[Point], geom: &Geom) -> Vec<Vec<usize>> {
    let grid = PointGrid::new(points);
    inst.objects
        .par_iter()
        .map(|o| {
            let mut hits: Vec<usize> = grid
                .query(&o.shape.bbox(), geom.eps)
                .into_iter()
                .filter(|&k| geom.contains_point(&o.shape, points[k]))
                .collect();
            hits.sort_unstable();
            hits
        })
        .collect()
}

fn first_common(a: &[usize], b: &[usize]) -> Option<usize> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

/// Uniform bucket grid over a point set.
#[derive(Debug)]
pub struct PointGrid {
    min_x: f64,
    min_y: f64,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointGrid {
    pub fn new(points: &[Point]) -> Self {
        if points.is_empty() {
            return PointGrid {
                min_x: 0.0,
                min_y: 0.0,
                cell: 1.0,
                cols: 0,
                rows: 0,
                buckets: Vec::new(),
            };
        }
        let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        let side = (max_x - min_x).max(max_y - min_y).max(1e-12);
        let per_axis = (points.len() as f64).sqrt().ceil().max(1.0);
        let cell = side / per_axis;
        let cols = ((max_x - min_x) / cell).floor() as usize + 1;
        let rows = ((max_y - min_y) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for (k, p) in points.iter().enumerate() {
            let c = (((p.x - min_x) / cell) as usize).min(cols - 1);
            let r = (((p.y - min_y) / cell) as usize).min(rows - 1);
            buckets[r * cols + c].push(k);
        }
        PointGrid {
            min_x,
            min_y,
            cell,
            cols,
            rows,
            buckets,
        }
    }

    /// Indices of points in cells touched by the (eps-inflated) box; a
    /// superset of the points inside the box.
    pub fn query(&self, b: &Bbox, eps: f64) -> Vec<usize> {
        if self.cols == 0 {
            return Vec::new();
        }
        let span = |lo: f64, hi: f64, origin: f64, cells: usize| -> Option<(usize, usize)> {
            let a = ((lo - eps - origin) / self.cell).floor();
            let z = ((hi + eps - origin) / self.cell).floor();
            if z < 0.0 || a > (cells - 1) as f64 {
                return None;
            }
            Some((a.max(0.0) as usize, (z as usize).min(cells - 1)))
        };
        let (Some((c0, c1)), Some((r0, r1))) = (
            span(b.min_x, b.max_x, self.min_x, self.cols),
            span(b.min_y, b.max_y, self.min_y, self.rows),
        ) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for r in r0..=r1 {
            for c in c0..=c1 {
                out.extend_from_slice(&self.buckets[r * self.cols + c]);
            }
        }
        out
    }
}
