//! Domain types shared by every algorithm: shapes, weighted objects,
//! instances, and the result record returned by the selection algorithms.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geom;
use crate::local_search::LocalSearchTrace;
use crate::rectangles::RectangleTrace;
use crate::rounding::RoundingTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bbox {
    pub fn overlaps(&self, o: &Bbox, eps: f64) -> bool {
        self.min_x <= o.max_x + eps
            && o.min_x <= self.max_x + eps
            && self.min_y <= o.max_y + eps
            && o.min_y <= self.max_y + eps
    }
}

/// A closed planar region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Shape {
    #[serde(rename = "disk")]
    Disk { cx: f64, cy: f64, r: f64 },
    #[serde(rename = "rect")]
    AxisRect { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// Vertices in counter-clockwise order.
    #[serde(rename = "polygon")]
    ConvexPolygon { pts: Vec<Point> },
}

impl Shape {
    pub fn disk(cx: f64, cy: f64, r: f64) -> Self {
        Shape::Disk { cx, cy, r }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Shape::AxisRect { x0, y0, x1, y1 }
    }

    pub fn polygon(pts: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Shape::ConvexPolygon {
            pts: pts.into_iter().map(|(x, y)| Point::new(x, y)).collect(),
        }
    }

    pub fn bbox(&self) -> Bbox {
        match self {
            Shape::Disk { cx, cy, r } => Bbox {
                min_x: cx - r,
                min_y: cy - r,
                max_x: cx + r,
                max_y: cy + r,
            },
            Shape::AxisRect { x0, y0, x1, y1 } => Bbox {
                min_x: *x0,
                min_y: *y0,
                max_x: *x1,
                max_y: *y1,
            },
            Shape::ConvexPolygon { pts } => pts.iter().fold(
                Bbox {
                    min_x: f64::INFINITY,
                    min_y: f64::INFINITY,
                    max_x: f64::NEG_INFINITY,
                    max_y: f64::NEG_INFINITY,
                },
                |b, p| Bbox {
                    min_x: b.min_x.min(p.x),
                    min_y: b.min_y.min(p.y),
                    max_x: b.max_x.max(p.x),
                    max_y: b.max_y.max(p.y),
                },
            ),
        }
    }

    /// An interior point: the center of a disk or rectangle, the vertex
    /// average of a polygon.
    pub fn centroid(&self) -> Point {
        match self {
            Shape::Disk { cx, cy, .. } => Point::new(*cx, *cy),
            Shape::AxisRect { x0, y0, x1, y1 } => Point::new((x0 + x1) / 2.0, (y0 + y1) / 2.0),
            Shape::ConvexPolygon { pts } => {
                let k = pts.len() as f64;
                let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
                Point::new(sx / k, sy / k)
            }
        }
    }

    /// Boundary vertices in CCW order for polygonal shapes, `None` for disks.
    pub fn vertices(&self) -> Option<Vec<Point>> {
        match self {
            Shape::Disk { .. } => None,
            Shape::AxisRect { x0, y0, x1, y1 } => Some(vec![
                Point::new(*x0, *y0),
                Point::new(*x1, *y0),
                Point::new(*x1, *y1),
                Point::new(*x0, *y1),
            ]),
            Shape::ConvexPolygon { pts } => Some(pts.clone()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Shape::Disk { cx, cy, r } => !(cx.is_finite() && cy.is_finite() && r.is_finite() && *r > 0.0),
            Shape::AxisRect { x0, y0, x1, y1 } => {
                ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || !(x0 < x1 && y0 < y1)
            }
            Shape::ConvexPolygon { pts } => !is_strictly_convex_ccw(pts),
        }
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Every vertex strictly left of every non-incident edge, and every
/// consecutive triple a strict left turn.
fn is_strictly_convex_ccw(pts: &[Point]) -> bool {
    let k = pts.len();
    if k < 3 || pts.iter().any(|p| !p.is_finite()) {
        return false;
    }
    for e in 0..k {
        let a = pts[e];
        let b = pts[(e + 1) % k];
        for (v, p) in pts.iter().enumerate() {
            if v == e || v == (e + 1) % k {
                continue;
            }
            if cross(a, b, *p) <= 0.0 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedObject {
    pub id: usize,
    pub weight: f64,
    pub shape: Shape,
}

/// Object family; determines the union-complexity constant used by the
/// rounding step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    PseudoDisks { rho: f64 },
    /// `k`-admissible regions, `k` even.
    Admissible { k: u32 },
    Rectangles,
    Generic,
}

impl Family {
    pub const PSEUDO_DISK_RHO: f64 = 6.0;

    pub fn pseudo_disks() -> Self {
        Family::PseudoDisks { rho: Self::PSEUDO_DISK_RHO }
    }

    /// Linear union-complexity constant, when the family has one.
    pub fn union_constant(&self) -> Option<f64> {
        match *self {
            Family::PseudoDisks { rho } => Some(rho),
            Family::Admissible { k } => Some(3.0 * k as f64),
            Family::Rectangles => Some(crate::rounding::RECTANGLE_G1_CONSTANT),
            Family::Generic => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::PseudoDisks { .. } => "pseudo_disks",
            Family::Admissible { .. } => "admissible",
            Family::Rectangles => "rectangles",
            Family::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    pub family: Family,
    pub objects: Vec<WeightedObject>,
    pub points: Option<Vec<Point>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    objects: Vec<WeightedObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<Point>>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = String;

    fn try_from(r: InstanceRepr) -> std::result::Result<Self, String> {
        let family = match r.family.as_str() {
            "pseudo_disks" => Family::PseudoDisks {
                rho: r.rho.unwrap_or(Family::PSEUDO_DISK_RHO),
            },
            "admissible" => Family::Admissible {
                k: r.k.ok_or("family \"admissible\" requires \"k\"")?,
            },
            "rectangles" => Family::Rectangles,
            "generic" => Family::Generic,
            other => return Err(format!("unknown family {other:?}")),
        };
        Ok(Instance {
            family,
            objects: r.objects,
            points: r.points,
        })
    }
}

impl From<Instance> for InstanceRepr {
    fn from(inst: Instance) -> Self {
        let (k, rho) = match inst.family {
            Family::Admissible { k } => (Some(k), None),
            Family::PseudoDisks { rho } if rho != Family::PSEUDO_DISK_RHO => (None, Some(rho)),
            _ => (None, None),
        };
        InstanceRepr {
            family: inst.family.name().to_string(),
            k,
            rho,
            objects: inst.objects,
            points: inst.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DuplicateId(usize),
    NonPositiveWeight(usize),
    DegenerateShape(usize),
    /// Shape kind not allowed by the declared family.
    FamilyMismatch(usize),
    /// Boundaries of a declared pseudo-disk pair cross more than twice.
    PseudoDiskViolation { i: usize, j: usize, crossings: usize },
    InvalidFamilyParameter(String),
    NonFinitePoint(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Unit,
    AsGiven,
}

impl Instance {
    pub fn new(family: Family, shapes: Vec<(Shape, f64)>) -> Self {
        let objects = shapes
            .into_iter()
            .enumerate()
            .map(|(id, (shape, weight))| WeightedObject { id, weight, shape })
            .collect();
        Instance {
            family,
            objects,
            points: None,
        }
    }

    pub fn unit(family: Family, shapes: Vec<Shape>) -> Self {
        Self::new(family, shapes.into_iter().map(|s| (s, 1.0)).collect())
    }

    pub fn with_points(mut self, points: Vec<Point>) -> Self {
        self.points = Some(points);
        self
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.objects.iter().map(|o| o.weight).collect()
    }

    pub fn shape(&self, i: usize) -> &Shape {
        &self.objects[i].shape
    }

    /// True when all weights are equal (the unweighted case).
    pub fn has_uniform_weights(&self) -> bool {
        self.objects
            .windows(2)
            .all(|w| w[0].weight == w[1].weight)
    }

    /// Ids coincide with positions `0..n`.
    pub fn has_canonical_ids(&self) -> bool {
        self.objects.iter().enumerate().all(|(i, o)| o.id == i)
    }

    /// Sorts objects by id and relabels them `0..n`. Returns the original id
    /// of each new position.
    pub fn canonicalize(&mut self) -> Vec<usize> {
        self.objects.sort_by_key(|o| o.id);
        let original = self.objects.iter().map(|o| o.id).collect();
        for (i, o) in self.objects.iter_mut().enumerate() {
            o.id = i;
        }
        original
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    /// Every violated well-formedness invariant; empty iff valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        let mut reported = HashSet::new();
        for o in &self.objects {
            if !seen.insert(o.id) && reported.insert(o.id) {
                out.push(Violation::DuplicateId(o.id));
            }
        }
        for o in &self.objects {
            if !(o.weight.is_finite() && o.weight > 0.0) {
                out.push(Violation::NonPositiveWeight(o.id));
            }
            if o.shape.is_degenerate() {
                out.push(Violation::DegenerateShape(o.id));
            }
            if self.family == Family::Rectangles && !matches!(o.shape, Shape::AxisRect { .. }) {
                out.push(Violation::FamilyMismatch(o.id));
            }
        }
        match self.family {
            Family::Admissible { k } if k == 0 || k % 2 == 1 => out.push(
                Violation::InvalidFamilyParameter(format!("admissible k must be a positive even integer, got {k}")),
            ),
            Family::PseudoDisks { rho } if !(rho.is_finite() && rho > 0.0) => {
                out.push(Violation::InvalidFamilyParameter(format!("rho must be positive, got {rho}")))
            }
            _ => {}
        }
        if let Some(points) = &self.points {
            for (k, p) in points.iter().enumerate() {
                if !p.is_finite() {
                    out.push(Violation::NonFinitePoint(k));
                }
            }
        }
        out
    }

    /// Pairwise boundary-crossing check for the pseudo-disk contract. Only
    /// meaningful for `Family::PseudoDisks`; returns nothing for other families.
    pub fn check_family(&self, geom: &Geom) -> Vec<Violation> {
        if !matches!(self.family, Family::PseudoDisks { .. }) {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let (a, b) = (self.shape(i), self.shape(j));
                if !a.bbox().overlaps(&b.bbox(), geom.eps) {
                    continue;
                }
                if let Ok(pts) = geom.boundary_intersections(a, b) {
                    if pts.len() > 2 {
                        out.push(Violation::PseudoDiskViolation {
                            i: self.objects[i].id,
                            j: self.objects[j].id,
                            crossings: pts.len(),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn normalize_weights(&self, mode: WeightMode) -> Instance {
        let mut out = self.clone();
        if mode == WeightMode::Unit {
            for o in &mut out.objects {
                o.weight = 1.0;
            }
        }
        out
    }

    /// Drops the outer object of every nested pair (unweighted reduction).
    /// Of two identical shapes the one with the smaller id survives.
    pub fn strip_contained(&self, geom: &Geom) -> Result<Stripped> {
        if !self.has_uniform_weights() {
            return Err(Error::WeightedInstance(
                "containment stripping is only valid for equal weights".into(),
            ));
        }
        let n = self.len();
        let mut removed = vec![false; n];
        for outer in 0..n {
            for inner in 0..n {
                if inner == outer {
                    continue;
                }
                let (a, b) = (self.shape(outer), self.shape(inner));
                if !geom.contains_shape(a, b) {
                    continue;
                }
                // Mutual containment: identical shapes, keep the smaller id.
                if geom.contains_shape(b, a) && inner > outer {
                    continue;
                }
                removed[outer] = true;
                break;
            }
        }
        let mut kept = Vec::new();
        let mut removed_ids = Vec::new();
        let mut objects = Vec::new();
        for (i, o) in self.objects.iter().enumerate() {
            if removed[i] {
                removed_ids.push(o.id);
            } else {
                kept.push(o.id);
                objects.push(WeightedObject {
                    id: objects.len(),
                    weight: o.weight,
                    shape: o.shape.clone(),
                });
            }
        }
        Ok(Stripped {
            instance: Instance {
                family: self.family,
                objects,
                points: self.points.clone(),
            },
            removed: removed_ids,
            kept,
        })
    }
}

/// Output of [`Instance::strip_contained`]. The reduced instance is
/// relabeled `0..m`; `kept[new_id]` is the original id.
#[derive(Debug, Clone)]
pub struct Stripped {
    pub instance: Instance,
    pub removed: Vec<usize>,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trace {
    LocalSearch(LocalSearchTrace),
    Rounding(RoundingTrace),
    Rectangles(RectangleTrace),
    Exact { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub algorithm: String,
    /// Sorted object ids.
    pub chosen: Vec<usize>,
    pub total_weight: f64,
    pub trace: Trace,
}

impl SelectionResult {
    pub fn new(algorithm: impl Into<String>, mut chosen: Vec<usize>, weights: &[f64], trace: Trace) -> Self {
        chosen.sort_unstable();
        let total_weight = chosen.iter().fold(0.0, |acc, &i| acc + weights[i]);
        SelectionResult {
            algorithm: algorithm.into(),
            chosen,
            total_weight,
            trace,
        }
    }
}
