//! Squared condition number (SCN) of complex F-matrices.
//!
//! The crate covers the whole path from special functions to detector
//! performance:
//!
//! * [`specfun`]: log-gamma family, Pochhammer symbols, Gauss `2F1`,
//!   Appell `F1`, adaptive quadrature on finite and semi-infinite ranges.
//! * [`matrand`]: complex Gaussian and Wishart sampling, generalized
//!   eigenvalues of `(Ŝ, Σ̂)` by Cholesky whitening, reproducible streams.
//! * [`fdist`]: joint eigenvalue densities and every exact c.d.f. path for
//!   `κ² = λ_max/λ_min`, together with Monte Carlo and quadrature oracles.
//! * [`detector`]: false-alarm and detection probabilities, threshold
//!   calibration, ROC profiles, CFAR and robustness experiments.

pub mod detector;
pub mod error;
pub mod fdist;
pub mod matrand;
pub mod specfun;

pub use error::{Result, ScnError};
