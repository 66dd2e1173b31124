//! Shared optimization and probability primitives: parameter projections,
//! first-order optimizers, and deterministic seeded random streams.
//!
//! Everything here is a pure function of its inputs, so all of it is safe to
//! call from any number of threads. A single [`RngStream`] must not be
//! advanced from two threads at once; clone or derive substreams instead.

mod linalg;
mod optimizer;
mod projection;
mod rng;

pub use linalg::solve_linear_system;
pub use optimizer::{Direction, OptimizerKind, OptimizerState};
pub use projection::{clip_interval, project_capped_simplex, project_sphere};
pub use rng::{standard_normal, RngStream};
