//! Scalar special functions and quadrature primitives.
//!
//! Everything here is a pure function of its arguments. Products of
//! factorials and Pochhammer symbols are carried as [`SignedLog`] values so
//! that the large constants of the c.d.f. formulas never overflow.

mod gamma;
mod hyper;
mod quad;
mod sum;

pub use gamma::{complex_mv_ln_gamma, ln_beta, ln_factorial, ln_gamma, pochhammer_ln};
pub use hyper::{appell_f1, gauss_2f1};
pub use quad::{integrate_finite, integrate_semi_infinite, QuadResult};
pub use sum::{CompensatedSum, Sign, SignedLog, SignedLogSum};

use serde::{Deserialize, Serialize};

use crate::{Result, ScnError};

/// Tolerances and work limits shared by the series and quadrature routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyBudget {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the number of series terms.
    pub max_terms: usize,
    /// Cap on the bisection depth of adaptive quadrature.
    pub max_quad_refinements: usize,
}

impl Default for AccuracyBudget {
    fn default() -> Self {
        AccuracyBudget {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_terms: 100_000,
            max_quad_refinements: 30,
        }
    }
}

impl AccuracyBudget {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_terms: usize,
        max_quad_refinements: usize,
    ) -> Result<Self> {
        let budget = AccuracyBudget {
            rel_tol,
            abs_tol,
            max_terms,
            max_quad_refinements,
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(ScnError::domain(format!(
                "tolerances must be positive (rel_tol={}, abs_tol={})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_terms == 0 || self.max_quad_refinements == 0 {
            return Err(ScnError::domain(
                "max_terms and max_quad_refinements must be at least 1",
            ));
        }
        Ok(())
    }

    /// Same limits with tighter tolerances, used where the result feeds a
    /// cancelling sum.
    pub fn tightened(&self, factor: f64) -> Self {
        AccuracyBudget {
            rel_tol: (self.rel_tol / factor).max(4.0 * f64::EPSILON),
            abs_tol: (self.abs_tol / factor).max(f64::MIN_POSITIVE),
            ..*self
        }
    }

    /// Series stopping rule: both of the last two terms are negligible.
    #[inline]
    pub(crate) fn negligible(&self, term: f64, partial: f64) -> bool {
        term.abs() < self.abs_tol + self.rel_tol * partial.abs()
    }
}
