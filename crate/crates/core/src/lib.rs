//! Simulation of the one-dimensional forest-fire process with seeds, matches
//! and finite propagation speed, together with exact samplers for its
//! scaling limits and the Monte Carlo drivers that compare the two.
//!
//! Time is macroscopic in every public API unless a name says otherwise;
//! the discrete engine runs internally in raw units (`a_λ` times faster).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete;
pub mod error;
pub mod harness;
pub mod io;
pub mod limit;
pub mod metrics;
pub mod propagation;
pub mod rng;
pub mod scales;
pub mod stats;

pub use error::{Error, Result};

/// Version string embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
