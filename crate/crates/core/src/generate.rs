//! Seeded random instances.
//!
//! Centers are uniform in the unit square. Sizes are log-uniform and then
//! scaled by a common factor chosen so that the expected number of other
//! objects overlapping a given one equals `density` (boundary effects of
//! the unit square ignored).

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, Instance, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Disks,
    Rects,
    Squares,
}

impl ShapeKind {
    pub fn family(self) -> Family {
        match self {
            ShapeKind::Disks | ShapeKind::Squares => Family::pseudo_disks(),
            ShapeKind::Rects => Family::Rectangles,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Disks => "disks",
            ShapeKind::Rects => "rects",
            ShapeKind::Squares => "squares",
        }
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disks" => Ok(ShapeKind::Disks),
            "rects" => Ok(ShapeKind::Rects),
            "squares" => Ok(ShapeKind::Squares),
            other => Err(Error::InvalidParameter(format!("unknown shape kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: ShapeKind,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    #[serde(default)]
    pub unit_weights: bool,
}

/// Size range of the log-uniform radius (disks, squares) or half-side
/// (rects, per axis) before scaling.
const RADIUS_RANGE: (f64, f64) = (1.0, 4.0);
const SIDE_RANGE: (f64, f64) = (1.0, 10.0);

fn log_uniform_moments((a, b): (f64, f64)) -> (f64, f64) {
    let l = (b / a).ln();
    ((b - a) / l, (b * b - a * a) / (2.0 * l))
}

/// Expected overlap probability of two unscaled objects per unit area,
/// i.e. `P[overlap] = s^2 * overlap_area()` at scale `s`.
fn overlap_area(kind: ShapeKind) -> f64 {
    match kind {
        ShapeKind::Disks => {
            let (m1, m2) = log_uniform_moments(RADIUS_RANGE);
            std::f64::consts::PI * (2.0 * m2 + 2.0 * m1 * m1)
        }
        ShapeKind::Squares => {
            let (m1, m2) = log_uniform_moments(RADIUS_RANGE);
            4.0 * (2.0 * m2 + 2.0 * m1 * m1)
        }
        ShapeKind::Rects => {
            let (m1, _) = log_uniform_moments(SIDE_RANGE);
            4.0 * (2.0 * m1) * (2.0 * m1)
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(spec.density > 0.0 && spec.density.is_finite()) {
        return Err(Error::InvalidParameter(format!("density must be positive, got {}", spec.density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairs = (spec.n.max(2) - 1) as f64;
    let scale = (spec.density / (pairs * overlap_area(spec.kind))).sqrt();
    let mut log_uniform = |(a, b): (f64, f64)| -> f64 { (a.ln() + rng.random::<f64>() * (b / a).ln()).exp() };
    let mut sizes = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        sizes.push(match spec.kind {
            ShapeKind::Rects => (log_uniform(SIDE_RANGE), log_uniform(SIDE_RANGE)),
            _ => {
                let r = log_uniform(RADIUS_RANGE);
                (r, r)
            }
        });
    }
    let shapes = sizes
        .into_iter()
        .map(|(a, b)| {
            let (cx, cy) = (rng.random::<f64>(), rng.random::<f64>());
            let w = if spec.unit_weights { 1.0 } else { rng.random_range(1.0..=10.0) };
            let (a, b) = (a * scale, b * scale);
            let shape = match spec.kind {
                ShapeKind::Disks => Shape::disk(cx, cy, a),
                _ => Shape::rect(cx - a, cy - b, cx + a, cy + b),
            };
            (shape, w)
        })
        .collect();
    Ok(Instance::new(spec.kind.family(), shapes))
}
