//! Eigenvalue densities and c.d.f.s of the SCN `κ² = λ_max/λ_min`.
//!
//! Exact paths for the null hypothesis cover every `(m, n, p)`; under a
//! rank-one spike the exact path needs `m = n = p`. The dispatchers pick
//! the narrowest closed form that applies and fall back to Monte Carlo when
//! a closed form cannot be evaluated.

mod density;
mod h0;
mod h1;
mod oracle;

pub use density::{joint_density_h0, joint_density_h1, ln_k_mnp, ln_k_tilde};
pub use h0::{cdf_h0_corollary1, cdf_h0_corollary2, cdf_h0_theorem1, corollary1_constraint_holds};
pub use h1::cdf_h1_theorem2;
pub use oracle::{cdf_scn_bruteforce_quadrature, cdf_scn_monte_carlo};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::matrand::{Hypothesis, ProblemDims};
use crate::specfun::AccuracyBudget;
use crate::Result;

/// Which path produced a c.d.f. value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Theorem1,
    Corollary1,
    Corollary2,
    Theorem2,
    MonteCarlo,
    BruteForceQuadrature,
}

impl Method {
    pub fn is_exact(self) -> bool {
        !matches!(self, Method::MonteCarlo)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Theorem1 => "Theorem1",
            Method::Corollary1 => "Corollary1",
            Method::Corollary2 => "Corollary2",
            Method::Theorem2 => "Theorem2",
            Method::MonteCarlo => "MonteCarlo",
            Method::BruteForceQuadrature => "BruteForceQuadrature",
        };
        f.write_str(s)
    }
}

/// One c.d.f. value. `value` is stored unclamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfEvaluation {
    pub t: f64,
    pub value: f64,
    pub method: Method,
    pub err_estimate: f64,
}

impl CdfEvaluation {
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

/// Settings shared by the dispatchers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfOptions {
    pub budget: AccuracyBudget,
    /// Draws used when the dispatcher falls back to Monte Carlo.
    pub mc_draws: usize,
    pub seed: u64,
    /// An exact result whose `err_estimate` exceeds this is treated as a
    /// numerical failure and the next path is tried.
    pub max_exact_error: f64,
}

impl Default for CdfOptions {
    fn default() -> Self {
        CdfOptions {
            budget: AccuracyBudget::default(),
            mc_draws: 200_000,
            seed: 0x5c4e,
            max_exact_error: 1e-6,
        }
    }
}

/// Null c.d.f. at `t`: corollary 2, then corollary 1, then theorem 1, then
/// Monte Carlo, moving on whenever a path fails numerically.
pub fn cdf_h0(dims: ProblemDims, t: f64, opts: &CdfOptions) -> Result<CdfEvaluation> {
    let b = &opts.budget;
    if dims.alpha() == 0 && dims.beta() == 0 {
        if let Some(e) = accept(cdf_h0_corollary2(dims.m(), t, b), opts)? {
            return Ok(e);
        }
    } else {
        if dims.alpha() == 0 && corollary1_constraint_holds(dims) {
            if let Some(e) = accept(cdf_h0_corollary1(dims, t, b), opts)? {
                return Ok(e);
            }
        }
        if let Some(e) = accept(cdf_h0_theorem1(dims, t, b), opts)? {
            return Ok(e);
        }
    }
    monte_carlo_at(dims, &Hypothesis::H0, t, opts)
}

/// Spiked c.d.f. at `t`: theorem 2 when `m = n = p`, Monte Carlo otherwise
/// or when theorem 2 fails numerically.
pub fn cdf_h1(dims: ProblemDims, hypothesis: &Hypothesis, t: f64, opts: &CdfOptions) -> Result<CdfEvaluation> {
    let gamma = match hypothesis {
        Hypothesis::H0 => return cdf_h0(dims, t, opts),
        Hypothesis::H1(s) => s.gamma(),
    };
    if dims.is_square() {
        if let Some(e) = accept(cdf_h1_theorem2(dims.m(), gamma, t, &opts.budget), opts)? {
            return Ok(e);
        }
    } else if !(t > 1.0) {
        return Err(crate::ScnError::domain(format!("threshold must be > 1, got {t}")));
    }
    monte_carlo_at(dims, hypothesis, t, opts)
}

/// `Ok(None)` means "try the next path".
fn accept(r: Result<CdfEvaluation>, opts: &CdfOptions) -> Result<Option<CdfEvaluation>> {
    match r {
        Ok(e) if e.err_estimate <= opts.max_exact_error && e.value.is_finite() => Ok(Some(e)),
        Ok(_) => Ok(None),
        Err(e) if e.is_numerical() => Ok(None),
        Err(e) => Err(e),
    }
}

/// C.d.f. under either hypothesis.
pub fn cdf(dims: ProblemDims, hypothesis: &Hypothesis, t: f64, opts: &CdfOptions) -> Result<CdfEvaluation> {
    cdf_h1(dims, hypothesis, t, opts)
}

fn monte_carlo_at(dims: ProblemDims, hypothesis: &Hypothesis, t: f64, opts: &CdfOptions) -> Result<CdfEvaluation> {
    let v = cdf_scn_monte_carlo(dims, hypothesis, &[t], opts.mc_draws, opts.seed)?;
    Ok(v[0])
}
