//! Program induction toolkit for three small visual languages: a 2D colored
//! layout language and 2D/3D constructive solid geometry.
//!
//! The crate executes programs to rasters and voxel grids, scores them against
//! targets, applies and enumerates local edits, computes edit scripts between
//! programs, builds training datasets from those scripts and runs
//! population-based edit search.

pub mod diff;
pub mod dsl;
pub mod edit;
pub mod exec;
pub mod harness;
pub mod hash;
pub mod metrics;
pub mod par;
pub mod sampler;
pub mod search;

pub use dsl::{Domain, Program, Quant};
pub use edit::{EditKind, EditOp, EditScript};
pub use exec::{execute, Visual};
pub use metrics::{Metric, Score};
