//! Two identical coupled oscillators near a Hopf bifurcation: truncated
//! normal form, its closed-form bifurcation analysis, the Wilson-Cowan pair,
//! normal-form coefficient extraction, and numerical orbit analysis.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod extract;
pub mod nf;
pub mod poly;
pub mod wc;

pub use error::{Error, Result};
pub use nf::{
    CartesianState, NormalFormCoefficients, PolarState, ReducedState, TabulatedSet, UnfoldingParams,
};

// lets the shared property checks name the crate as the integration tests do
#[cfg(test)]
extern crate self as hopfduet_core;
#[cfg(test)]
mod properties;
