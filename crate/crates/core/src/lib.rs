//! Approximation algorithms for maximum (weight) independent set in
//! intersection graphs of planar objects: disks, pseudo-disks and
//! axis-parallel rectangles.
//!
//! - [`local_search`]: unweighted b-exchange local search.
//! - [`lp`] + [`rounding`]: packing LP and contention-resolution rounding,
//!   randomized or derandomized.
//! - [`rectangles`]: the weighted rectangle pipeline.
//! - [`oracle`]: exact reference solvers for small inputs.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod generate;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod local_search;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod rectangles;
pub mod rounding;

pub use error::{Error, Result};
pub use generate::{generate, GenSpec, ShapeKind};
pub use geometry::Geom;
pub use graph::{build_discrete, build_geometric, ConflictGraph, GraphMode};
pub use local_search::{local_search, verify_locally_optimal, LocalSearchConfig};
pub use lp::{build_independent_set_lp, solve_packing_lp, FractionalSolution, LpMode, PackingLp};
pub use model::{Family, Instance, Point, SelectionResult, Shape, Trace, Violation, WeightedObject};
pub use pipeline::{run, verify, Algorithm, Report, RunParams};
pub use rectangles::{rectangle_mwis, EdgeSplit};
pub use rounding::{derandomized_round, randomized_round, RoundingConfig, Tau};
