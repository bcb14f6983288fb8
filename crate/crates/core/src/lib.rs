//! Constant-step subgradient dynamics around spurious local minima of
//! nonsmooth objectives, and numerical certificates for the conditions that
//! make such minima unstable: Chetaev increments, metric subregularity of the
//! subdifferential, the Verdier condition, and distance monotonicity.

pub mod certifiers;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod problem;
pub mod problems;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector};
pub use problem::{ProblemOracle, ProblemPoint};
