//! Mixing times, moving-target hitting times and discrete rearrangement
//! checks for finite Markov chains.
//!
//! Everything numeric is generic over [`scalar::Scalar`]: exact rationals
//! for certificates, `f64` for larger sweeps.

pub mod adversary;
pub mod chain;
pub mod cli;
pub mod error;
pub mod gnm;
pub mod hitting;
pub mod io;
pub mod linalg;
pub mod report;
pub mod sausage;
pub mod scalar;
pub mod torus;

pub use chain::{Distribution, MarkovChain};
pub use error::{Error, Result};
pub use hitting::{SetSequence, StateSet};
pub use scalar::{NumericMode, Rational, Scalar};
