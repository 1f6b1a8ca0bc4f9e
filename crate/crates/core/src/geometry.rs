//! Geometric predicates over closed regions and arrangement-vertex
//! enumeration.
//!
//! All predicates use an absolute tolerance `eps`; touching regions count
//! as intersecting.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Family, Instance, Point, Shape};

type PairCrossings = (Vec<(Point, usize, Partner)>, Option<ArrangementWarning>);

pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geom {
    pub eps: f64,
}

impl Default for Geom {
    fn default() -> Self {
        Geom { eps: DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, Copy)]
struct Seg {
    a: Point,
    b: Point,
}

fn sub(a: Point, b: Point) -> (f64, f64) {
    (a.x - b.x, a.y - b.y)
}

fn cross2(u: (f64, f64), v: (f64, f64)) -> f64 {
    u.0 * v.1 - u.1 * v.0
}

fn dot2(u: (f64, f64), v: (f64, f64)) -> f64 {
    u.0 * v.0 + u.1 * v.1
}

fn edges(pts: &[Point]) -> Vec<Seg> {
    (0..pts.len())
        .map(|k| Seg {
            a: pts[k],
            b: pts[(k + 1) % pts.len()],
        })
        .collect()
}

fn point_seg_dist(p: Point, s: Seg) -> f64 {
    let d = sub(s.b, s.a);
    let len2 = dot2(d, d);
    let t = if len2 == 0.0 {
        0.0
    } else {
        (dot2(sub(p, s.a), d) / len2).clamp(0.0, 1.0)
    };
    p.dist(Point::new(s.a.x + t * d.0, s.a.y + t * d.1))
}

/// Signed distance of `p` from the directed line through `s`; positive on
/// the left.
fn signed_dist(p: Point, s: Seg) -> f64 {
    let d = sub(s.b, s.a);
    cross2(d, sub(p, s.a)) / dot2(d, d).sqrt()
}

fn cmp_point(a: &Point, b: &Point) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

fn dedup_points(mut pts: Vec<Point>, tol: f64) -> Vec<Point> {
    pts.sort_by(cmp_point);
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().any(|q| q.dist(p) <= tol) {
            out.push(p);
        }
    }
    out
}

impl Geom {
    pub fn new(eps: f64) -> Self {
        Geom { eps }
    }

    pub fn contains_point(&self, s: &Shape, p: Point) -> bool {
        let eps = self.eps;
        match s {
            Shape::Disk { cx, cy, r } => p.dist(Point::new(*cx, *cy)) <= r + eps,
            Shape::AxisRect { x0, y0, x1, y1 } => {
                p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps
            }
            Shape::ConvexPolygon { pts } => edges(pts).into_iter().all(|e| signed_dist(p, e) >= -eps),
        }
    }

    /// Closed regions share at least one point.
    pub fn intersects(&self, a: &Shape, b: &Shape) -> bool {
        let eps = self.eps;
        if !a.bbox().overlaps(&b.bbox(), eps) {
            return false;
        }
        match (a, b) {
            (Shape::Disk { cx, cy, r }, Shape::Disk { cx: cx2, cy: cy2, r: r2 }) => {
                Point::new(*cx, *cy).dist(Point::new(*cx2, *cy2)) <= r + r2 + eps
            }
            (Shape::AxisRect { .. }, Shape::AxisRect { .. }) => true, // bbox overlap is exact
            (Shape::Disk { cx, cy, r }, Shape::AxisRect { x0, y0, x1, y1 })
            | (Shape::AxisRect { x0, y0, x1, y1 }, Shape::Disk { cx, cy, r }) => {
                let q = Point::new(cx.clamp(*x0, *x1), cy.clamp(*y0, *y1));
                q.dist(Point::new(*cx, *cy)) <= r + eps
            }
            (Shape::Disk { cx, cy, r }, poly) | (poly, Shape::Disk { cx, cy, r }) => {
                let c = Point::new(*cx, *cy);
                let verts = poly.vertices().expect("polygonal");
                self.contains_point(poly, c) || edges(&verts).into_iter().any(|e| point_seg_dist(c, e) <= r + eps)
            }
            _ => {
                let (pa, pb) = (a.vertices().expect("polygonal"), b.vertices().expect("polygonal"));
                !separated(&pa, &pb, eps) && !separated(&pb, &pa, eps)
            }
        }
    }

    /// `b ⊆ a` as closed sets, with `eps` slack.
    pub fn contains_shape(&self, a: &Shape, b: &Shape) -> bool {
        let eps = self.eps;
        match (a, b) {
            (Shape::Disk { cx, cy, r }, Shape::Disk { cx: cx2, cy: cy2, r: r2 }) => {
                Point::new(*cx, *cy).dist(Point::new(*cx2, *cy2)) + r2 <= r + eps
            }
            (Shape::AxisRect { x0, y0, x1, y1 }, Shape::Disk { cx, cy, r }) => {
                cx - r >= x0 - eps && cx + r <= x1 + eps && cy - r >= y0 - eps && cy + r <= y1 + eps
            }
            (Shape::ConvexPolygon { pts }, Shape::Disk { cx, cy, r }) => {
                let c = Point::new(*cx, *cy);
                edges(pts).into_iter().all(|e| signed_dist(c, e) >= r - eps)
            }
            (_, polygonal) => polygonal
                .vertices()
                .expect("polygonal")
                .into_iter()
                .all(|p| self.contains_point(a, p)),
        }
    }

    /// All points where the two boundaries meet, sorted by (x, y). Tangent
    /// contacts are reported once.
    pub fn boundary_intersections(&self, a: &Shape, b: &Shape) -> Result<Vec<Point>> {
        let eps = self.eps;
        if !a.bbox().overlaps(&b.bbox(), eps) {
            return Ok(Vec::new());
        }
        let raw = match (a, b) {
            (Shape::Disk { cx, cy, r }, Shape::Disk { cx: cx2, cy: cy2, r: r2 }) => {
                self.circle_circle(Point::new(*cx, *cy), *r, Point::new(*cx2, *cy2), *r2)?
            }
            (Shape::Disk { cx, cy, r }, poly) | (poly, Shape::Disk { cx, cy, r }) => {
                let c = Point::new(*cx, *cy);
                let mut out = Vec::new();
                for e in edges(&poly.vertices().expect("polygonal")) {
                    out.extend(self.seg_circle(e, c, *r));
                }
                out
            }
            _ => {
                let (ea, eb) = (
                    edges(&a.vertices().expect("polygonal")),
                    edges(&b.vertices().expect("polygonal")),
                );
                let mut out = Vec::new();
                for s in &ea {
                    for t in &eb {
                        if let Some(p) = self.seg_seg(*s, *t)? {
                            out.push(p);
                        }
                    }
                }
                out
            }
        };
        Ok(dedup_points(raw, 10.0 * eps))
    }

    /// Number of boundary crossings of two rectangles in general position:
    /// 0 (disjoint or nested), 2 (corner overlap) or 4 (crossing).
    pub fn rect_boundary_count(&self, a: &Shape, b: &Shape) -> Result<u8> {
        let (Some(ra), Some(rb)) = (as_rect(a), as_rect(b)) else {
            return Err(Error::InvalidParameter("rect_boundary_count needs two rectangles".into()));
        };
        if !self.intersects(a, b) {
            return Ok(0);
        }
        let eps = self.eps;
        let shares = |u: [f64; 2], v: [f64; 2]| u.iter().any(|s| v.iter().any(|t| (s - t).abs() <= eps));
        if shares([ra[0], ra[2]], [rb[0], rb[2]]) || shares([ra[1], ra[3]], [rb[1], rb[3]]) {
            return Err(Error::Degenerate(format!(
                "rectangles {ra:?} and {rb:?} share an edge line"
            )));
        }
        match self.boundary_intersections(a, b)?.len() {
            0 => Ok(0),
            1 | 2 => Ok(2),
            _ => Ok(4),
        }
    }

    fn circle_circle(&self, c1: Point, r1: f64, c2: Point, r2: f64) -> Result<Vec<Point>> {
        let eps = self.eps;
        let d = c1.dist(c2);
        if d <= eps && (r1 - r2).abs() <= eps {
            return Err(Error::OverlappingBoundaries);
        }
        if d > r1 + r2 + eps || d < (r1 - r2).abs() - eps {
            return Ok(Vec::new());
        }
        let (ux, uy) = ((c2.x - c1.x) / d, (c2.y - c1.y) / d);
        if (d - (r1 + r2)).abs() <= eps {
            return Ok(vec![Point::new(c1.x + ux * r1, c1.y + uy * r1)]);
        }
        if (d - (r1 - r2).abs()).abs() <= eps {
            let s = if r1 >= r2 { r1 } else { -r1 };
            return Ok(vec![Point::new(c1.x + ux * s, c1.y + uy * s)]);
        }
        let along = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
        let h = (r1 * r1 - along * along).max(0.0).sqrt();
        let (mx, my) = (c1.x + ux * along, c1.y + uy * along);
        Ok(vec![Point::new(mx - uy * h, my + ux * h), Point::new(mx + uy * h, my - ux * h)])
    }

    fn seg_circle(&self, s: Seg, c: Point, r: f64) -> Vec<Point> {
        let eps = self.eps;
        let d = sub(s.b, s.a);
        let len = dot2(d, d).sqrt();
        let (tx, ty) = (d.0 / len, d.1 / len);
        // Foot of the perpendicular from c, as arclength along the segment.
        let foot = dot2(sub(c, s.a), (tx, ty));
        let dist = cross2((tx, ty), sub(c, s.a)).abs();
        if dist > r + eps {
            return Vec::new();
        }
        let at = |t: f64| Point::new(s.a.x + tx * t, s.a.y + ty * t);
        let within = |t: f64| t >= -eps && t <= len + eps;
        if (dist - r).abs() <= eps {
            return if within(foot) { vec![at(foot.clamp(0.0, len))] } else { Vec::new() };
        }
        let half = (r * r - dist * dist).max(0.0).sqrt();
        [foot - half, foot + half]
            .into_iter()
            .filter(|&t| within(t))
            .map(|t| at(t.clamp(0.0, len)))
            .collect()
    }

    fn seg_seg(&self, s: Seg, t: Seg) -> Result<Option<Point>> {
        let eps = self.eps;
        let r = sub(s.b, s.a);
        let q = sub(t.b, t.a);
        let (lr, lq) = (dot2(r, r).sqrt(), dot2(q, q).sqrt());
        let denom = cross2(r, q);
        let qp = sub(t.a, s.a);
        if denom.abs() <= 1e-12 * lr * lq {
            // Parallel.
            if (cross2(qp, r) / lr).abs() > eps {
                return Ok(None);
            }
            let ta = dot2(qp, r) / lr;
            let tb = dot2(sub(t.b, s.a), r) / lr;
            let (lo, hi) = (ta.min(tb).max(0.0), ta.max(tb).min(lr));
            if hi - lo > eps {
                return Err(Error::OverlappingBoundaries);
            }
            if hi - lo < -eps {
                return Ok(None);
            }
            let m = ((lo + hi) / 2.0).clamp(0.0, lr);
            return Ok(Some(Point::new(s.a.x + r.0 / lr * m, s.a.y + r.1 / lr * m)));
        }
        let u = cross2(qp, q) / denom;
        let v = cross2(qp, r) / denom;
        let (tu, tv) = (eps / lr, eps / lq);
        if u < -tu || u > 1.0 + tu || v < -tv || v > 1.0 + tv {
            return Ok(None);
        }
        let u = u.clamp(0.0, 1.0);
        Ok(Some(Point::new(s.a.x + u * r.0, s.a.y + u * r.1)))
    }

    /// Arrangement vertices of the whole instance. Rectangle instances also
    /// get every rectangle corner.
    pub fn arrangement_vertices(&self, inst: &Instance) -> Arrangement {
        let all: Vec<usize> = (0..inst.len()).collect();
        self.arrangement_of(inst, &all, inst.family == Family::Rectangles)
    }

    /// Arrangement of a subset of objects; coverings are restricted to the
    /// subset.
    pub fn arrangement_of(&self, inst: &Instance, subset: &[usize], with_corners: bool) -> Arrangement {
        let pseudo = matches!(inst.family, Family::PseudoDisks { .. });
        let per_pair: Vec<PairCrossings> = (0..subset.len())
            .into_par_iter()
            .flat_map_iter(|a| (a + 1..subset.len()).map(move |b| (subset[a], subset[b])))
            .filter_map(|(i, j)| {
                let (si, sj) = (inst.shape(i), inst.shape(j));
                if !si.bbox().overlaps(&sj.bbox(), self.eps) {
                    return None;
                }
                let (i, j) = (i.min(j), i.max(j));
                match self.boundary_intersections(si, sj) {
                    Ok(pts) if pts.is_empty() => None,
                    Ok(pts) => {
                        let warn = (pseudo && pts.len() > 2).then_some(ArrangementWarning::FamilyViolation {
                            i,
                            j,
                            crossings: pts.len(),
                        });
                        Some((pts.into_iter().map(|p| (p, i, Partner::Object(j))).collect(), warn))
                    }
                    Err(_) => Some((Vec::new(), Some(ArrangementWarning::DegeneratePair { i, j }))),
                }
            })
            .collect();
        let mut raw = Vec::new();
        let mut warnings = Vec::new();
        for (pts, w) in per_pair {
            raw.extend(pts);
            warnings.extend(w);
        }
        if with_corners {
            for &i in subset {
                if let Some(vs) = inst.shape(i).vertices() {
                    if matches!(inst.shape(i), Shape::AxisRect { .. }) {
                        raw.extend(vs.into_iter().map(|p| (p, i, Partner::Corner)));
                    }
                }
            }
        }
        let mut vertices: Vec<ArrangementVertex> = raw
            .into_par_iter()
            .map(|(p, i, j)| ArrangementVertex {
                p,
                i,
                j,
                covering: subset
                    .iter()
                    .copied()
                    .filter(|&k| self.contains_point(inst.shape(k), p))
                    .collect::<Vec<_>>(),
            })
            .collect();
        for v in &mut vertices {
            v.covering.sort_unstable();
        }
        vertices.sort_by(|a, b| {
            a.i.cmp(&b.i)
                .then(a.j.cmp(&b.j))
                .then(cmp_point(&a.p, &b.p))
        });
        warnings.sort();
        Arrangement { vertices, warnings }
    }

    /// Number of objects of `subset` whose closed region contains `p`.
    pub fn depth_at(&self, inst: &Instance, subset: &[usize], p: Point) -> usize {
        subset
            .iter()
            .filter(|&&k| self.contains_point(inst.shape(k), p))
            .count()
    }
}

/// `[x0, y0, x1, y1]` of an axis rectangle.
pub fn as_rect(s: &Shape) -> Option<[f64; 4]> {
    match s {
        Shape::AxisRect { x0, y0, x1, y1 } => Some([*x0, *y0, *x1, *y1]),
        _ => None,
    }
}

/// Separating-axis test over the edge normals of `pa`.
fn separated(pa: &[Point], pb: &[Point], eps: f64) -> bool {
    edges(pa).into_iter().any(|e| pb.iter().all(|&p| signed_dist(p, e) < -eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partner {
    Object(usize),
    /// Vertex is a corner of rectangle `i`.
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementVertex {
    pub p: Point,
    pub i: usize,
    pub j: Partner,
    /// Sorted ids of all objects containing `p`.
    pub covering: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArrangementWarning {
    DegeneratePair { i: usize, j: usize },
    FamilyViolation { i: usize, j: usize, crossings: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Arrangement {
    pub vertices: Vec<ArrangementVertex>,
    pub warnings: Vec<ArrangementWarning>,
}
