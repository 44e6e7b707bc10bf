//! Numerical toolkit for information-production fluctuation identities of
//! quantum channels: dense complex linear algebra, CPTP channel models,
//! entropy functionals, the one-time-measurement (OTM) sigma distribution
//! with its Jarzynski-like identity and bounds, a variational quantum
//! autoencoder, spin-boson dephasing, and guessed-heat thermodynamics.

pub mod channels;
pub mod entropy;
mod error;
pub mod matcore;
pub mod otm;
pub mod qae;
pub mod spinboson;
pub mod thermo;

pub use error::{QxError, Result};
pub use matcore::{ComplexMatrix, DensityMatrix, EigenSystem};

/// Absolute numerical tolerance, scaled by dimension where noted.
pub const EPS_NUM: f64 = 1e-10;
/// Eigenvalues of a density matrix may dip this far below zero.
pub const EPS_PSD: f64 = 1e-10;
/// Relative threshold (w.r.t. the largest eigenvalue) below which an
/// eigenvalue is treated as an exact zero.
pub const RANK_TOL: f64 = 1e-10;
/// Mass on the null space of the second cross-entropy argument below this
/// threshold is discarded; above it the value is +infinity.
pub const SUPPORT_TOL: f64 = 1e-9;
