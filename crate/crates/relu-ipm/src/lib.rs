//! ReLU integral probability metric between weighted empirical
//! distributions, covariate-balancing ATT estimation built on it, and
//! group-fairness auditing of score distributions and representations.
//!
//! See the `book/` guide at the repository root for a narrative tour; the
//! CLI in `src/main.rs` wraps the library for file-based workflows.

pub mod balancing;
pub mod config;
pub mod error;
pub mod fairness;
pub mod io;
pub mod ipm;
pub mod numerics;
pub mod report;
pub mod simulation;

pub use error::{Error, Result};

// Keeps the guide honest: every fenced Rust block in the book chapters
// compiles and runs as a doctest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/ipm.md")]
    mod ipm {}
    #[doc = include_str!("../../../book/src/balancing.md")]
    mod balancing {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/fairness.md")]
    mod fairness {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
