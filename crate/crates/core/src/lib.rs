//! Numerics for p-variation, one- and two-parameter Young integrals,
//! semimartingale local time and extended Itô formulas on sampled data.

pub mod error;
pub mod itocheck;
pub mod numeric;
pub mod pathcore;
pub mod rng;
pub mod stochastic;
pub mod variation;
pub mod young;
pub mod young2d;

pub use error::{Error, Result};
