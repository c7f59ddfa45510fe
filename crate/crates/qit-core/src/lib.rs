//! Finite-dimensional quantum information measures.
//!
//! Norms and distances on density operators, the minimal (sandwiched), Petz and
//! maximal quantum Rényi divergences, conditional Rényi entropies, min- and
//! max-entropies and their smoothed versions (evaluated with an embedded dense
//! semidefinite-program solver), and applications: hypothesis testing,
//! entropic uncertainty relations and randomness extraction.
//!
//! Logarithms are base 2 unless a [`Base`] says otherwise.

pub mod apps;
pub mod divergences;
pub mod entropies;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod sdpsolve;
pub mod smooth;
pub mod states;
pub mod units;

pub use error::{Error, Result};
pub use units::Base;
