use super::gamma::{ln_factorial, ln_gamma_pos, pochhammer_ln};
use super::quad::integrate_finite;
use super::sum::{CompensatedSum, SignedLog, SignedLogSum};
use super::AccuracyBudget;
use crate::{Result, ScnError};

/// Past this Pfaff argument the Gauss series is replaced by the Euler
/// integral when the parameters allow it.
const SERIES_ARG_LIMIT: f64 = 0.999;
/// Largest `max(|x|, |y|)` for which the Appell double series is used.
const APPELL_SERIES_LIMIT: f64 = 0.7;

fn nonpositive_integer(v: f64) -> Option<u64> {
    if v <= 0.0 && v.fract() == 0.0 && v > -4.5e15 {
        Some((-v) as u64)
    } else {
        None
    }
}

/// Sum of `Σ_n (a)_n (b)_n / ((c)_n n!) z^n` for `|z| < 1`.
///
/// Stops once two consecutive terms are negligible and, while the term ratio
/// is below one, the geometric tail bound is negligible too.
fn gauss_series(a: f64, b: f64, c: f64, z: f64, budget: &AccuracyBudget) -> Result<f64> {
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    sum.add(term);
    let mut quiet = 0;
    for n in 0..budget.max_terms {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        sum.add(term);
        if term == 0.0 {
            return Ok(sum.value());
        }
        let tail = if ratio.abs() < 1.0 {
            term.abs() / (1.0 - ratio.abs())
        } else {
            f64::INFINITY
        };
        if budget.negligible(term, sum.value()) && budget.negligible(tail, sum.value()) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(sum.value());
            }
        } else {
            quiet = 0;
        }
        if !term.is_finite() {
            break;
        }
    }
    Err(ScnError::NonConvergence {
        what: "Gauss hypergeometric series",
        steps: budget.max_terms,
        estimate: sum.value(),
        error: term.abs(),
    })
}

/// Terminating series: `n` is the degree of the polynomial.
fn gauss_polynomial(a: f64, b: f64, c: f64, z: f64, n: u64) -> Result<f64> {
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    sum.add(term);
    for k in 0..n {
        let kf = k as f64;
        if c + kf == 0.0 {
            return Err(ScnError::domain(format!(
                "2F1 lower parameter c={c} hits zero before the series terminates"
            )));
        }
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum.add(term);
    }
    Ok(sum.value())
}

/// `ln` of the Euler-integral normalisation and the integral
/// `∫_0^1 u^{p-1}(1-u)^{q-1} Π (1 - z_i u)^{-e_i} du`, computed with a
/// log-space shift so very large or very small values stay representable.
fn euler_integral_ln(
    p: f64,
    q: f64,
    factors: &[(f64, f64)],
    budget: &AccuracyBudget,
) -> Result<f64> {
    // Everything except the two endpoint powers.
    let rest = |u: f64| -> f64 {
        let mut v = 0.0;
        for &(z, e) in factors {
            if e != 0.0 {
                v -= e * (-z * u).ln_1p();
            }
        }
        v
    };
    let log_integrand = |u: f64| (p - 1.0) * u.ln() + (q - 1.0) * (-u).ln_1p() + rest(u);
    // Shift by the largest log-integrand on a probe grid that also reaches
    // toward both endpoints.
    let mut shift = f64::NEG_INFINITY;
    for k in 0..64 {
        shift = shift.max(log_integrand((k as f64 + 0.5) / 64.0));
    }
    for k in 1..=15 {
        let h = 10f64.powi(-k);
        shift = shift.max(log_integrand(h)).max(log_integrand(1.0 - h));
    }
    if !shift.is_finite() {
        return Err(ScnError::NotEvaluable(
            "Euler integrand is not finite on (0, 1)".into(),
        ));
    }
    // Split at 1/2. A fractional endpoint exponent below two is removed by
    // u = v^{1/p} (left) or 1 - u = w^{1/q} (right).
    let cusp = |e: f64| e < 2.0 && e.fract() != 0.0;
    // The shifted scale is arbitrary, so only the relative tolerance applies.
    let budget = &AccuracyBudget {
        abs_tol: f64::MIN_POSITIVE,
        ..*budget
    };
    let left = if cusp(p) {
        let f = |v: f64| {
            let u = v.powf(1.0 / p);
            ((q - 1.0) * (-u).ln_1p() + rest(u) - shift).exp() / p
        };
        integrate_finite(f, 0.0, 0.5f64.powf(p), budget)?
    } else {
        integrate_finite(|u| (log_integrand(u) - shift).exp(), 0.0, 0.5, budget)?
    };
    let right = if cusp(q) {
        let f = |w: f64| {
            let om = w.powf(1.0 / q);
            let u = 1.0 - om;
            ((p - 1.0) * u.ln() + rest(u) - shift).exp() / q
        };
        integrate_finite(f, 0.0, 0.5f64.powf(q), budget)?
    } else {
        integrate_finite(|u| (log_integrand(u) - shift).exp(), 0.5, 1.0, budget)?
    };
    let value = left.value + right.value;
    if !(value > 0.0) {
        return Err(ScnError::NotEvaluable(
            "Euler integral underflowed after shifting".into(),
        ));
    }
    Ok(value.ln() + shift)
}

/// `₂F₁(a, b; c; z)` as a [`SignedLog`], for `z < 1`.
pub(crate) fn gauss_2f1_signed(
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    budget: &AccuracyBudget,
) -> Result<SignedLog> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(ScnError::domain("2F1 arguments must be finite"));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(SignedLog::ONE);
    }
    let degree = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(na), Some(nb)) => Some(na.min(nb)),
        (na, nb) => na.or(nb),
    };
    if let Some(n) = degree {
        // A polynomial: exact for every z, including z >= 1.
        return gauss_polynomial(a, b, c, z, n).map(SignedLog::from_f64);
    }
    if nonpositive_integer(c).is_some() {
        return Err(ScnError::domain(format!(
            "2F1 lower parameter c={c} is a nonpositive integer"
        )));
    }
    if z >= 1.0 {
        return Err(ScnError::domain(format!(
            "2F1 argument z={z} >= 1 with a non-terminating series"
        )));
    }
    if z > 0.0 {
        if z <= SERIES_ARG_LIMIT {
            return gauss_series(a, b, c, z, budget).map(SignedLog::from_f64);
        }
        return gauss_near_one(a, b, c, z, budget);
    }

    // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; x) = (1-z)^{-b} F(c-a, b; c; x)
    // with x = z/(z-1) in (0, 1). Prefer a terminating right-hand side,
    // then the variant with the larger c - a' - b'.
    let x = z / (z - 1.0);
    let ln_1mz = (-z).ln_1p();
    let use_first = if nonpositive_integer(c - b).is_some() {
        true
    } else if nonpositive_integer(c - a).is_some() {
        false
    } else {
        b >= a
    };
    let (exp, a2, b2) = if use_first {
        (a, a, c - b)
    } else {
        (b, c - a, b)
    };
    let prefactor = SignedLog::positive_ln(-exp * ln_1mz);
    if x <= SERIES_ARG_LIMIT || nonpositive_integer(a2).is_some() || nonpositive_integer(b2).is_some()
    {
        let inner = gauss_2f1_signed(a2, b2, c, x, budget)?;
        return Ok(prefactor * inner);
    }
    // Euler integral in the original variable: (1 - z u) >= 1 on (0,1).
    if let Some(v) = gauss_euler(a, b, c, z, budget)? {
        return Ok(v);
    }
    let inner = gauss_series(a2, b2, c, x, budget)?;
    Ok(prefactor * SignedLog::from_f64(inner))
}

fn gauss_near_one(a: f64, b: f64, c: f64, z: f64, budget: &AccuracyBudget) -> Result<SignedLog> {
    if let Some(v) = gauss_euler(a, b, c, z, budget)? {
        return Ok(v);
    }
    gauss_series(a, b, c, z, budget).map(SignedLog::from_f64)
}

/// Euler representation, available when `c > b > 0` (or `c > a > 0`).
fn gauss_euler(a: f64, b: f64, c: f64, z: f64, budget: &AccuracyBudget) -> Result<Option<SignedLog>> {
    let admissible = |p: f64| p > 0.0 && c - p > 0.0;
    let (p, e) = if admissible(b) {
        (b, a)
    } else if admissible(a) {
        (a, b)
    } else {
        return Ok(None);
    };
    let ln_int = euler_integral_ln(p, c - p, &[(z, e)], budget)?;
    let ln_norm = ln_gamma_pos(c) - ln_gamma_pos(p) - ln_gamma_pos(c - p);
    Ok(Some(SignedLog::positive_ln(ln_norm + ln_int)))
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for real `z < 1`.
///
/// Terminating series are summed exactly for any `z`. Negative arguments go
/// through a Pfaff transformation to `z/(z-1) ∈ (0, 1)`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64, budget: &AccuracyBudget) -> Result<f64> {
    gauss_2f1_signed(a, b, c, z, budget)?.to_f64_checked()
}

fn appell_series(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    budget: &AccuracyBudget,
) -> Result<f64> {
    // F1 = Σ_m (a)_m (b1)_m / ((c)_m m!) x^m · Σ_n (a+m)_n (b2)_n / ((c+m)_n n!) y^n
    let mut total = CompensatedSum::new();
    let mut outer = 1.0;
    let mut used = 0usize;
    let mut quiet = 0;
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        let mut row = CompensatedSum::new();
        let mut term = outer;
        row.add(term);
        let mut n = 0usize;
        let mut row_quiet = 0;
        while term != 0.0 {
            let nf = n as f64;
            let ratio = (a + mf + nf) * (b2 + nf) / ((c + mf + nf) * (nf + 1.0)) * y;
            term *= ratio;
            row.add(term);
            n += 1;
            used += 1;
            let tail = if ratio.abs() < 1.0 {
                term.abs() / (1.0 - ratio.abs())
            } else {
                f64::INFINITY
            };
            if budget.negligible(tail, row.value()) {
                row_quiet += 1;
                if row_quiet >= 2 {
                    break;
                }
            } else {
                row_quiet = 0;
            }
            if used >= budget.max_terms {
                break;
            }
        }
        let row_value = row.value();
        total.add(row_value);
        let ratio = (a + mf) * (b1 + mf) / ((c + mf) * (mf + 1.0)) * x;
        outer *= ratio;
        m += 1;
        let scale = (1.0 - y.abs()).max(1e-3);
        if outer == 0.0 {
            return Ok(total.value());
        }
        let tail = if ratio.abs() < 1.0 {
            outer.abs() / (1.0 - ratio.abs()) / scale
        } else {
            f64::INFINITY
        };
        if budget.negligible(row_value, total.value()) && budget.negligible(tail, total.value()) {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total.value());
            }
        } else {
            quiet = 0;
        }
        if used >= budget.max_terms || !outer.is_finite() {
            return Err(ScnError::NonConvergence {
                what: "Appell F1 double series",
                steps: used,
                estimate: total.value(),
                error: row_value.abs(),
            });
        }
    }
}

fn appell_euler(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    budget: &AccuracyBudget,
) -> Result<SignedLog> {
    if !(c > a && a > 0.0) {
        return Err(ScnError::domain(format!(
            "Appell F1 Euler integral needs c > a > 0 (a={a}, c={c})"
        )));
    }
    let ln_int = euler_integral_ln(a, c - a, &[(x, b1), (y, b2)], budget)?;
    let ln_norm = ln_gamma_pos(c) - ln_gamma_pos(a) - ln_gamma_pos(c - a);
    Ok(SignedLog::positive_ln(ln_norm + ln_int))
}

fn singular_inside(arg: f64, exponent: f64) -> bool {
    arg >= 1.0 && exponent != 0.0 && nonpositive_integer(exponent).is_none()
}

/// Appell `F1(a; b1, b2; c; x, y)` as a [`SignedLog`].
/// F1 with `b1 = -n`: a finite sum over the first index of
/// `(a)_k (b1)_k / ((c)_k k!) x^k 2F1(a+k, b2; c+k; y)`.
#[allow(clippy::too_many_arguments)]
fn appell_finite_outer(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    n: u64,
    budget: &AccuracyBudget,
) -> Result<SignedLog> {
    let mut acc = SignedLogSum::new();
    let ln_x = SignedLog::from_f64(x);
    for k in 0..=n {
        let coef = pochhammer_ln(a, k) * pochhammer_ln(b1, k) * ln_x.powi(k as i64)
            / pochhammer_ln(c, k)
            / SignedLog::positive_ln(ln_factorial(k));
        if coef.is_zero() {
            continue;
        }
        let kf = k as f64;
        acc.push(coef * gauss_2f1_signed(a + kf, b2, c + kf, y, budget)?);
    }
    Ok(acc.total().0)
}

pub(crate) fn appell_f1_signed(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    budget: &AccuracyBudget,
) -> Result<SignedLog> {
    if ![a, b1, b2, c, x, y].iter().all(|v| v.is_finite()) {
        return Err(ScnError::domain("Appell F1 arguments must be finite"));
    }
    if (x == 0.0 || b1 == 0.0) && (y == 0.0 || b2 == 0.0) {
        return Ok(SignedLog::ONE);
    }
    // Exact reductions to a single Gauss function.
    if y == 0.0 || b2 == 0.0 {
        return gauss_2f1_signed(a, b1, c, x, budget);
    }
    if x == 0.0 || b1 == 0.0 {
        return gauss_2f1_signed(a, b2, c, y, budget);
    }
    if singular_inside(x, b1) || singular_inside(y, b2) {
        return Err(ScnError::domain(format!(
            "Appell F1 integrand has a singularity inside (0,1) (x={x}, y={y})"
        )));
    }
    if x.abs().max(y.abs()) <= APPELL_SERIES_LIMIT {
        return appell_series(a, b1, b2, c, x, y, budget).map(SignedLog::from_f64);
    }
    if let Some(n) = nonpositive_integer(b1) {
        return appell_finite_outer(a, b1, b2, c, x, y, n, budget);
    }
    if let Some(n) = nonpositive_integer(b2) {
        return appell_finite_outer(a, b2, b1, c, y, x, n, budget);
    }
    if c > a && a > 0.0 {
        return appell_euler(a, b1, b2, c, x, y, budget);
    }
    if x.abs() < 1.0 && y.abs() < 1.0 {
        return appell_series(a, b1, b2, c, x, y, budget).map(SignedLog::from_f64);
    }
    Err(ScnError::domain(format!(
        "Appell F1 not evaluable: needs c > a > 0 or |x|, |y| < 1 (a={a}, c={c}, x={x}, y={y})"
    )))
}

/// Appell hypergeometric function `F1(a; b1, b2; c; x, y)`.
///
/// Uses the double series when `max(|x|, |y|) <= 0.7` and the Euler
/// integral `Γ(c)/(Γ(a)Γ(c-a)) ∫_0^1 u^{a-1}(1-u)^{c-a-1}(1-ux)^{-b1}(1-uy)^{-b2} du`
/// otherwise.
pub fn appell_f1(
    a: f64,
    b1: f64,
    b2: f64,
    c: f64,
    x: f64,
    y: f64,
    budget: &AccuracyBudget,
) -> Result<f64> {
    appell_f1_signed(a, b1, b2, c, x, y, budget)?.to_f64_checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn budget() -> AccuracyBudget {
        AccuracyBudget::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gauss_trivial_cases() {
        let b = budget().tightened(1e3);
        assert_eq!(gauss_2f1(1.3, 2.7, 4.1, 0.0, &b).unwrap(), 1.0);
        let z: f64 = -0.5;
        let want = -(-z).ln_1p() / z;
        assert!(rel(gauss_2f1(1.0, 1.0, 2.0, z, &b).unwrap(), want) < 1e-12);
        assert!(rel(want, 2.0 * 1.5f64.ln()) < 1e-15);
        // (1 - z)^{-a} = 2F1(a, b; b; z)
        assert!(rel(gauss_2f1(2.5, 3.0, 3.0, 0.4, &b).unwrap(), 0.6f64.powf(-2.5)) < 1e-12);
    }

    #[test]
    fn gauss_reference_value() {
        // 2F1(4, 3; 8; -1) from a 40-digit direct evaluation.
        let got = gauss_2f1(4.0, 3.0, 8.0, -1.0, &budget().tightened(1e3)).unwrap();
        assert!(rel(got, 0.320_051_626_105_340_98) < 1e-12, "{got}");
    }

    #[test]
    fn gauss_terminating() {
        let b = budget();
        // 2F1(-2, b; c; z) = 1 - 2bz/c + b(b+1)z²/(c(c+1))
        let (bb, c, z) = (1.5, 2.5, 3.0);
        let want = 1.0 - 2.0 * bb * z / c + bb * (bb + 1.0) * z * z / (c * (c + 1.0));
        assert!(rel(gauss_2f1(-2.0, bb, c, z, &b).unwrap(), want) < 1e-14);
        // c = -3 is fine when a = -2 terminates first.
        assert!(gauss_2f1(-2.0, 1.0, -3.0, 0.5, &b).is_ok());
        assert!(gauss_2f1(-4.0, 1.0, -3.0, 0.5, &b).is_err());
    }

    #[test]
    fn gauss_domain_errors() {
        let b = budget();
        assert!(matches!(
            gauss_2f1(1.5, 2.0, 3.0, 1.0, &b),
            Err(ScnError::Domain(_))
        ));
        assert!(matches!(
            gauss_2f1(1.5, 2.0, -2.0, 0.3, &b),
            Err(ScnError::Domain(_))
        ));
    }

    #[test]
    fn gauss_series_cap_is_non_convergence() {
        let tiny = AccuracyBudget {
            max_terms: 3,
            ..budget()
        };
        assert!(matches!(
            gauss_2f1(1.5, 2.5, 3.5, 0.9, &tiny),
            Err(ScnError::NonConvergence { .. })
        ));
    }

    #[test]
    fn gauss_large_negative_argument_uses_euler_integral() {
        // The SCN c.d.f. at m = 2: 4 B(4,4) (t-1)^3 2F1(4, 3; 8; 1-t).
        let b = budget();
        let t: f64 = 1e6;
        let f = gauss_2f1(4.0, 3.0, 8.0, 1.0 - t, &b).unwrap();
        let value = 4.0 / 140.0 * (t - 1.0).powi(3) * f;
        assert!(rel(value, 0.999_866_212_834_798_000_75) < 1e-9, "{value}");
        // Continuity across the series / integral switch.
        let z1 = 1.0 - 999.0;
        let z2 = 1.0 - 1001.0;
        let f1 = gauss_2f1(4.0, 3.0, 8.0, z1, &b).unwrap() * 998f64.powi(3);
        let f2 = gauss_2f1(4.0, 3.0, 8.0, z2, &b).unwrap() * 1000f64.powi(3);
        assert!(rel(f1, f2) < 1e-2);
    }

    #[test]
    fn appell_trivial_cases() {
        let b = budget();
        assert_eq!(appell_f1(1.2, 0.7, 3.1, 4.5, 0.0, 0.0, &b).unwrap(), 1.0);
        let f = appell_f1(2.0, 1.5, 0.0, 4.0, 0.6, 0.9, &b).unwrap();
        let g = gauss_2f1(2.0, 1.5, 4.0, 0.6, &b).unwrap();
        assert!(rel(f, g) < 1e-12);
        let f = appell_f1(2.0, 1.0, 1.0, 4.0, 0.3, 0.3, &b).unwrap();
        let g = gauss_2f1(2.0, 2.0, 4.0, 0.3, &b).unwrap();
        assert!(rel(f, g) < 1e-9);
    }

    #[test]
    fn appell_reductions_hold_on_both_paths() {
        let b = budget();
        let (a, b1, b2, c) = (2.0, 1.5, 0.0, 4.0);
        for &(x, y) in &[(0.3, 0.5), (0.6, -0.4)] {
            let g = gauss_2f1(a, b1, c, x, &b).unwrap();
            let s = appell_series(a, b1, b2, c, x, y, &b).unwrap();
            let e = appell_euler(a, b1, b2, c, x, y, &b).unwrap().to_f64();
            assert!(rel(s, g) < 1e-9 && rel(e, g) < 1e-9, "{s} {e} {g}");
        }
        // Equal arguments: F1(a; b1, b2; c; x, x) = 2F1(a, b1 + b2; c; x).
        let g = gauss_2f1(2.0, 2.0, 4.0, 0.3, &b).unwrap();
        let s = appell_series(2.0, 1.0, 1.0, 4.0, 0.3, 0.3, &b).unwrap();
        let e = appell_euler(2.0, 1.0, 1.0, 4.0, 0.3, 0.3, &b).unwrap().to_f64();
        assert!(rel(s, g) < 1e-9 && rel(e, g) < 1e-9);
    }

    #[test]
    fn appell_singular_inside_interval() {
        let b = budget();
        assert!(matches!(
            appell_f1(3.0, 4.0, 2.0, 7.0, 1.5, 0.2, &b),
            Err(ScnError::Domain(_))
        ));
        // A nonpositive integer exponent keeps the integrand polynomial.
        // F1(3; -2, 2; 7; 1.5, 0.2), 30-digit reference.
        let f = appell_f1(3.0, -2.0, 2.0, 7.0, 1.5, 0.2, &b).unwrap();
        assert!(rel(f, 0.220_255_016_189_770_282_18) < 1e-10, "{f}");
    }

    #[test]
    fn appell_large_negative_y() {
        // Euler route only; 40-digit reference value.
        let f = appell_f1(3.0, 1.0, 2.0, 7.0, 0.5, -8.0, &budget()).unwrap();
        assert!(rel(f, 0.088_284_878_702_998_660_7) < 1e-10, "{f}");
    }

    proptest! {
        #[test]
        fn gauss_contiguous_relation(
            a in 0.2f64..6.0, b in 0.2f64..6.0, c in 0.5f64..8.0, z in -5.0f64..0.9,
        ) {
            // c(1-z)F(a,b;c;z) - c F(a-1,b;c;z) + (c-b) z F(a,b;c+1;z) = 0
            let bud = budget();
            let f0 = gauss_2f1(a, b, c, z, &bud).unwrap();
            let f1 = gauss_2f1(a - 1.0, b, c, z, &bud).unwrap();
            let f2 = gauss_2f1(a, b, c + 1.0, z, &bud).unwrap();
            let terms = [c * (1.0 - z) * f0, -c * f1, (c - b) * z * f2];
            let scale = terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
            let resid: f64 = terms.iter().sum();
            prop_assert!(resid.abs() <= 1e-9 * scale, "resid {} scale {}", resid, scale);
        }

        #[test]
        fn appell_series_matches_integral(
            a in 0.5f64..4.0, gap in 0.5f64..4.0, b1 in -2.0f64..3.0, b2 in -2.0f64..3.0,
            r in 0.3f64..0.7, theta in 0.0f64..std::f64::consts::TAU,
        ) {
            let bud = budget();
            let c = a + gap;
            // Point on the square annulus max(|x|,|y|) = r.
            let (s, co) = theta.sin_cos();
            let k = r / s.abs().max(co.abs());
            let (x, y) = (k * co, k * s);
            let series = appell_series(a, b1, b2, c, x, y, &bud).unwrap();
            let euler = appell_euler(a, b1, b2, c, x, y, &bud).unwrap().to_f64();
            prop_assert!((series - euler).abs() <= 1e-9 * euler.abs().max(1e-3),
                "x={} y={} series={} euler={}", x, y, series, euler);
        }
    }
}
