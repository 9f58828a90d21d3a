//! Explicit ReLU network approximations of European option prices in
//! exponential Levy models.

pub mod barron;
pub mod chaos;
pub mod construct;
pub mod error;
pub mod experiments;
pub mod levy;
pub mod oracle;
pub mod quad;
pub mod relu;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
