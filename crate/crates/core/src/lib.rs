//! Model-based differentially private data synthesis.
//!
//! The library sanitizes the Bayesian sufficient statistics of a synthesis
//! model under pure epsilon-differential privacy, releases multiple surrogate
//! data sets drawn from the sanitized posterior predictive, combines
//! inferences across the releases, and audits discrete mechanisms by exact
//! enumeration.
//!
//! The main entry points are [`release::modips_release`] and
//! [`release::nested_modips_release`] for generating releases,
//! [`inference::combine`] for pooling estimates across them,
//! [`verifier::max_log_ratio`] for exact privacy audits, and
//! [`sim::run_simulation`] for Monte Carlo coverage studies.

pub mod budget;
pub mod error;
pub mod inference;
pub mod io;
pub mod mechanisms;
pub mod models;
pub mod release;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod types;
pub mod verifier;

pub use error::Error;
pub use types::{Bounds, Dataset, SufficientStatVector};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
