use std::cell::RefCell;

use super::density::ln_k_tilde;
use super::{CdfEvaluation, Method};
use crate::matrand::ProblemDims;
use crate::specfun::{
    appell_f1, integrate_finite, integrate_semi_infinite, ln_beta, ln_factorial, pochhammer_ln,
    AccuracyBudget, Sign, SignedLog, SignedLogSum,
};
use crate::{Result, ScnError};

/// Stop the spike series once terms fall this far (natural log) below the
/// largest term seen.
const SERIES_DROP: f64 = 16.0 * std::f64::consts::LN_10;
const SERIES_MAX_TERMS: usize = 10_000;

/// Spiked c.d.f. for `m = n = p`, split as `I_A + I_B`.
///
/// `I_A` is a single Appell function. `I_B` is the series of Appell
/// functions for `m = 2`; for `m >= 3` it is taken from its defining
/// integral (see [`ib_integral`]).
pub fn cdf_h1_theorem2(m: usize, gamma: f64, t: f64, budget: &AccuracyBudget) -> Result<CdfEvaluation> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(ScnError::domain(format!("threshold must be finite and > 1, got {t}")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ScnError::domain(format!("SNR must be positive, got {gamma}")));
    }
    if m == 0 {
        return Err(ScnError::domain("m must be at least 1"));
    }
    if m == 1 {
        return Ok(CdfEvaluation {
            t,
            value: 1.0,
            method: Method::Theorem2,
            err_estimate: 0.0,
        });
    }
    let inner = budget.tightened(1e3);
    let (ia, ia_err) = i_a(m, gamma, t, &inner)?;
    let (ib, ib_err) = if m == 2 {
        ib_series(m, gamma, t, &inner)?
    } else {
        ib_integral(m, gamma, t, &inner)?
    };
    let value = ia + ib;
    let err_estimate = ia_err + ib_err + 16.0 * f64::EPSILON * (ia.abs() + ib.abs());
    Ok(CdfEvaluation {
        t,
        value,
        method: Method::Theorem2,
        err_estimate,
    })
}

fn m_tilde(m: usize) -> f64 {
    (m * m - m + 1) as f64
}

/// `(-1)^{m-1} m / (γ^{m-1}(1+γ)^{(m-1)²}) (1-1/t)^{m̃-1} B(m̃, m̃)
///  F₁(m̃; m̃-1, (m-1)²; 2m̃; 1 - 1/(t(γ+1)), γ/(γ+1))`.
fn i_a(m: usize, gamma: f64, t: f64, budget: &AccuracyBudget) -> Result<(f64, f64)> {
    let mt = m_tilde(m);
    let mf = m as f64;
    let x = 1.0 - 1.0 / (t * (gamma + 1.0));
    let y = gamma / (gamma + 1.0);
    let f1 = appell_f1(mt, mt - 1.0, (mf - 1.0).powi(2), 2.0 * mt, x, y, budget)?;
    let ln_pre = mf.ln() - (mf - 1.0) * gamma.ln() - (mf - 1.0).powi(2) * gamma.ln_1p()
        + (mt - 1.0) * (-1.0 / t).ln_1p()
        + ln_beta(mt, mt)?;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let v = sign * ln_pre.exp() * f1;
    Ok((v, v.abs() * budget.rel_tol))
}

/// `m Σ_k Σ_j c_{kj} (t-1)^{m̃-1+j} Σ_ℓ (m-1)_ℓ/ℓ! γ^{ℓ+j-m+1}/(1+γ)^{ℓ+j+1}
///  B(m̃+j, m̃+j+ℓ) F₁(m̃+j+ℓ; m̃-3, j+2; 2(m̃+j)+ℓ; t-1, 1-t/(γ+1))`.
///
/// Only valid for `m = 2`, where the first Appell exponent vanishes.
fn ib_series(m: usize, gamma: f64, t: f64, budget: &AccuracyBudget) -> Result<(f64, f64)> {
    debug_assert_eq!(m, 2);
    let mt = m_tilde(m);
    let mi = m as i64;
    let (x, y) = (t - 1.0, 1.0 - t / (gamma + 1.0));
    let ln_g = gamma.ln();
    let ln_1g = gamma.ln_1p();
    let mut outer = SignedLogSum::new();
    for k in 0..=(mi - 2) {
        for j in 0..=(mi - 2 - k) {
            let jf = j as f64;
            let ln_c = ln_factorial((mi + k) as u64) - ln_factorial(k as u64) + ((j + 1) as f64).ln()
                - ln_factorial((k + 2 + j) as u64)
                - ln_factorial((mi - k - 2 - j) as u64)
                + (mt - 1.0 + jf) * (t - 1.0).ln();
            let sign = if k % 2 == 0 { Sign::Pos } else { Sign::Neg };
            let mut series = SignedLogSum::new();
            let mut peak = f64::NEG_INFINITY;
            let mut converged = false;
            for l in 0..SERIES_MAX_TERMS {
                let lf = l as f64;
                let f1 = appell_f1(mt + jf + lf, mt - 3.0, jf + 2.0, 2.0 * (mt + jf) + lf, x, y, budget)?;
                let term = pochhammer_ln(m as f64 - 1.0, l as u64)
                    / SignedLog::positive_ln(ln_factorial(l as u64))
                    * SignedLog::positive_ln(
                        (lf + jf - mi as f64 + 1.0) * ln_g - (lf + jf + 1.0) * ln_1g
                            + ln_beta(mt + jf, mt + jf + lf)?,
                    )
                    * SignedLog::from_f64(f1);
                let prev_peak = peak;
                peak = peak.max(term.ln_abs);
                series.push(term);
                if term.is_zero() || (term.ln_abs < peak - SERIES_DROP && term.ln_abs < prev_peak) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(ScnError::NonConvergence {
                    what: "spike series",
                    steps: SERIES_MAX_TERMS,
                    estimate: series.total().0.to_f64(),
                    error: peak.exp(),
                });
            }
            outer.push(SignedLog::new(sign, ln_c) * series.total().0);
        }
    }
    let (total, ln_abs) = outer.total();
    let v = m as f64 * total.to_f64_checked()?;
    Ok((v, m as f64 * ln_abs.exp() * (budget.rel_tol + 1e-15)))
}

/// `I_B` from its integral form, for `m >= 3`.
///
/// With `λ₂ = λ₁v` and `z = λ₁w`, Andréief's identity turns the inner
/// `(m-2)`-fold integral into `det[v Â_{a+b} - Â_{a+b+1}]` with
/// `Â_r(λ₁) = ∫₁^t w^r (w-1)² (1+λ₁w)^{-(2m-1)} dw`, leaving
///
/// `K(γ) ∫₀^∞ λ₁^e (1+λ₁)^{-(2m-1)} ∫₁^t (v-1)(1+λ₁v/(γ+1))^{-(m+1)} det[..] dv dλ₁`
///
/// with `e = (m-2)(m+1)+2` and `K(γ) = K̃/(γ^{m-1}(1+γ))`.
fn ib_integral(m: usize, gamma: f64, t: f64, budget: &AccuracyBudget) -> Result<(f64, f64)> {
    let dims = ProblemDims::square(m)?;
    let mf = m as f64;
    let size = m - 2;
    let e = ((m - 2) * (m + 1) + 2) as f64;
    let deg = 2.0 * mf - 1.0;
    let failure: RefCell<Option<ScnError>> = RefCell::new(None);
    let fail = |err: ScnError| {
        failure.borrow_mut().get_or_insert(err);
        0.0
    };
    // det(v) cancels when t is close to 1, so relative accuracy much below
    // 1e-11 is out of reach there.
    let quad = AccuracyBudget {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: budget.rel_tol.max(1e-11),
        ..*budget
    };

    let outer = |l1: f64| -> f64 {
        if !(l1 > 0.0) || !l1.is_finite() || failure.borrow().is_some() {
            return 0.0;
        }
        // Moments in u = w-1. The determinant is unchanged by the unit
        // triangular change of basis from powers of w, and the shifted
        // moments avoid the cancellation of v·Â_k - Â_{k+1} near t = 1.
        let mut c = Vec::with_capacity(2 * size);
        let mut d = Vec::with_capacity(2 * size);
        for k in 0..(2 * size) as i32 {
            for (out, pow) in [(&mut c, k + 2), (&mut d, k + 3)] {
                match integrate_finite(
                    |u: f64| u.powi(pow) * (-deg * (l1 * (1.0 + u)).ln_1p()).exp(),
                    0.0,
                    t - 1.0,
                    &quad,
                ) {
                    Ok(q) => out.push(q.value),
                    Err(err) => return fail(err),
                }
            }
        }
        let det = |v: f64| -> f64 {
            let mut a = vec![vec![0.0; size]; size];
            for (i, row) in a.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = (v - 1.0) * c[i + j] - d[i + j];
                }
            }
            small_det(a)
        };
        let inner = integrate_finite(
            |v: f64| (v - 1.0) * (-(mf + 1.0) * (l1 * v / (gamma + 1.0)).ln_1p()).exp() * det(v),
            1.0,
            t,
            &quad,
        );
        match inner {
            Ok(q) => (e * l1.ln() - deg * l1.ln_1p()).exp() * q.value,
            Err(err) => fail(err),
        }
    };
    let r = integrate_semi_infinite(outer, &quad);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let r = r?;
    let ln_k = ln_k_tilde(dims) - (mf - 1.0) * gamma.ln() - gamma.ln_1p();
    let k = ln_k.exp();
    Ok((k * r.value, k * r.err_estimate + k * r.value.abs() * quad.rel_tol))
}

/// Determinant by partial pivoting; the matrices here are at most a few rows.
fn small_det(mut a: Vec<Vec<f64>>) -> f64 {
    let s = a.len();
    let mut det = 1.0;
    for c in 0..s {
        let piv = (c..s).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..s {
            let f = a[r][c] / a[c][c];
            for k in c..s {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}
