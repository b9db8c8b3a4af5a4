//! Kalman filtering, prediction and smoothing by incremental orthogonal
//! factorization.
//!
//! Every evolution and observation equation adds a block row to a weighted
//! least-squares system; [`Kalman`] keeps the block upper-bidiagonal
//! triangular factor of that system up to date with Householder
//! transformations, and reads filtered, predicted and smoothed estimates off
//! it by back substitution. State dimensions may change between steps,
//! observations may be missing, old steps can be forgotten and the filter can
//! roll back to an earlier step.
//!
//! [`oracle`] solves the same problem densely and is used to check the engine.
//! [`scenarios`] generates the bundled examples and reads/writes scenario and
//! result files.

pub mod covariance;
pub mod error;
pub mod kalman;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scenarios;

pub use covariance::{Covariance, CovarianceKind, CovarianceRepr};
pub use error::{Error, Result};
pub use kalman::{Estimate, Kalman};
pub use linalg::Matrix;
pub use model::{Evolution, Observation, StepInput};
