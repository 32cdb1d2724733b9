use super::density::ln_k_mnp;
use super::{CdfEvaluation, Method};
use crate::matrand::ProblemDims;
use crate::specfun::{
    gauss_2f1, integrate_semi_infinite, ln_beta, ln_factorial, pochhammer_ln, AccuracyBudget,
    Sign, SignedLog, SignedLogSum,
};
use crate::{Result, ScnError};

fn check_t(t: f64) -> Result<()> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(ScnError::domain(format!("threshold must be finite and > 1, got {t}")));
    }
    Ok(())
}

fn ln_fact(k: i64) -> f64 {
    debug_assert!(k >= 0);
    ln_factorial(k as u64)
}

/// `m² B(m², m²) (t-1)^{m²-1} ₂F₁(m², m²-1; 2m²; 1-t)`, the case `n = p = m`.
pub fn cdf_h0_corollary2(m: usize, t: f64, budget: &AccuracyBudget) -> Result<CdfEvaluation> {
    check_t(t)?;
    if m == 0 {
        return Err(ScnError::domain("m must be at least 1"));
    }
    let q = (m * m) as f64;
    let f = gauss_2f1(q, q - 1.0, 2.0 * q, 1.0 - t, budget)?;
    let ln_pre = q.ln() + ln_beta(q, q)? + (q - 1.0) * (t - 1.0).ln();
    let value = ln_pre.exp() * f;
    Ok(CdfEvaluation {
        t,
        value,
        method: Method::Corollary2,
        err_estimate: value.abs() * budget.rel_tol + budget.abs_tol,
    })
}

/// Determinant of a small integer matrix by fraction-free elimination, with
/// a floating-point fallback when an intermediate would overflow `i128`.
pub(crate) fn integer_det(rows: &[Vec<i128>]) -> SignedLog {
    let s = rows.len();
    if s == 0 {
        return SignedLog::ONE;
    }
    match bareiss(rows.to_vec()) {
        Some(d) => SignedLog::from_f64(d as f64),
        None => float_det(rows),
    }
}

fn bareiss(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let s = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..s {
        let Some(piv) = (c..s).find(|&r| a[r][c] != 0) else {
            return Some(0);
        };
        if piv != c {
            a.swap(piv, c);
            sign = -sign;
        }
        for r in c + 1..s {
            for k in c + 1..s {
                let v = a[r][k]
                    .checked_mul(a[c][c])?
                    .checked_sub(a[r][c].checked_mul(a[c][k])?)?;
                a[r][k] = v / prev;
            }
            a[r][c] = 0;
        }
        prev = a[c][c];
    }
    Some(sign * a[s - 1][s - 1])
}

fn float_det(rows: &[Vec<i128>]) -> SignedLog {
    let s = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut det = SignedLog::ONE;
    for c in 0..s {
        let piv = (c..s)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[piv][c] == 0.0 {
            return SignedLog::ZERO;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det = det * SignedLog::from_f64(a[c][c]);
        for r in c + 1..s {
            let f = a[r][c] / a[c][c];
            for k in c..s {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Exact `(a)_k` for integer `a`.
fn pochhammer_int(a: i64, k: i64) -> Option<i128> {
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((a + i) as i128)?;
    }
    Some(acc)
}

/// One column of the determinant: `(m+k+1+j)_{i-1} (m+i-k-j)_{s-i}` for
/// `i = 1..=s`; `k` is the position within its index family.
fn det_column(m: i64, k: i64, j: i64, s: i64) -> Option<Vec<i128>> {
    (1..=s)
        .map(|i| pochhammer_int(m + k + 1 + j, i - 1)?.checked_mul(pochhammer_int(m + i - k - j, s - i)?))
        .collect()
}

/// `columns` holds `(k, j_k)` pairs.
fn tuple_det(m: i64, columns: &[(i64, i64)], s: i64) -> Result<SignedLog> {
    let cols: Vec<Vec<i128>> = columns
        .iter()
        .map(|&(k, j)| det_column(m, k, j, s))
        .collect::<Option<_>>()
        .ok_or_else(|| ScnError::Overflow("determinant entry exceeds i128".into()))?;
    // Entries are stored column-major; the determinant is transpose-invariant.
    Ok(integer_det(&cols))
}

/// Iterates all tuples with `0 <= j_k < bounds[k]`.
fn for_each_tuple(bounds: &[i64], mut f: impl FnMut(&[i64]) -> Result<()>) -> Result<()> {
    if bounds.iter().any(|&b| b <= 0) {
        return Ok(());
    }
    let mut j = vec![0i64; bounds.len()];
    loop {
        f(&j)?;
        let mut k = 0;
        loop {
            if k == j.len() {
                return Ok(());
            }
            j[k] += 1;
            if j[k] < bounds[k] {
                break;
            }
            j[k] = 0;
            k += 1;
        }
    }
}

/// `Σ_{i=1..count} ln (m+i)! - 2 ln (i-1)! - ln (m+s-i-1)!`, shared by both
/// index families.
fn ln_family_const(m: i64, s: i64, count: i64) -> f64 {
    (1..=count)
        .map(|i| ln_fact(m + i) - 2.0 * ln_fact(i - 1) - ln_fact(m + s - i - 1))
        .sum()
}

/// `Σ_{i=1..s} 2 ln (m-2+i)! - ln (2m+2i-2)! + Σ_{j=0..m-2} ln j!(j+1)!(j+2)!/(m+j+1)!`.
fn ln_tail_const(m: i64, s: i64) -> f64 {
    let a: f64 = (1..=s)
        .map(|i| 2.0 * ln_fact(m - 2 + i) - ln_fact(2 * m + 2 * i - 2))
        .sum();
    let b: f64 = (0..=m - 2)
        .map(|j| ln_fact(j) + ln_fact(j + 1) + ln_fact(j + 2) - ln_fact(m + j + 1))
        .sum();
    a + b
}

/// Per-index coefficient `(m+1+k)_j (-(m+s-k-1))_j / (j! (k)_j)`.
fn index_coef(m: i64, s: i64, k: i64, j: i64) -> SignedLog {
    pochhammer_ln((m + 1 + k) as f64, j as u64) * pochhammer_ln(-((m + s - k - 1) as f64), j as u64)
        / pochhammer_ln(k as f64, j as u64)
        / SignedLog::positive_ln(ln_fact(j))
}

/// Null c.d.f. for general `(m, n, p)`; at `α = β = 0` the sum is a single
/// term and reproduces corollary 2.
///
/// All `j`-indices are bound by sums outside the determinant. For each
/// tuple the `y`-integral
/// `∫₀^∞ y^{τ-α-1-Σj_α} (1+y)^{Σj-τ-1} (1+ty)^{-(τ-α-β-1)} dy`
/// depends only on the two index sums, so it is computed once per pair.
pub fn cdf_h0_theorem1(dims: ProblemDims, t: f64, budget: &AccuracyBudget) -> Result<CdfEvaluation> {
    check_t(t)?;
    let (m, al, be) = (dims.m() as i64, dims.alpha() as i64, dims.beta() as i64);
    let s = al + be;
    let tau = dims.tau() as i64;
    let e_t = tau - al - be - 1;
    let quad_budget = budget.tightened(1e3);

    let ln_const = ln_k_mnp(dims) - ln_fact(m - 1)
        + ln_family_const(m, s, al)
        + ln_family_const(m, s, be)
        + ln_tail_const(m, s)
        + e_t as f64 * (t - 1.0).ln();
    let sign = if (be * (al + m - 1)) % 2 == 0 { Sign::Pos } else { Sign::Neg };

    let bounds: Vec<i64> = (1..=al)
        .map(|k| m + s - k)
        .chain((1..=be).map(|l| m + s - l))
        .collect();
    let max_sa: i64 = bounds[..al as usize].iter().map(|b| b - 1).sum();
    let max_sb: i64 = bounds[al as usize..].iter().map(|b| b - 1).sum();
    let mut integrals: Vec<Option<(f64, f64)>> = vec![None; ((max_sa + 1) * (max_sb + 1)) as usize];
    let ln_t = t.ln();
    let ln_tm1 = (t - 1.0).ln();

    let mut terms = SignedLogSum::new();
    let mut err_sum = 0.0f64;
    for_each_tuple(&bounds, |j| {
        let (ja, jb) = j.split_at(al as usize);
        let mut coef = SignedLog::ONE;
        for (k, &jk) in ja.iter().enumerate() {
            coef = coef * index_coef(m, s, k as i64 + 1, jk);
        }
        for (l, &jl) in jb.iter().enumerate() {
            coef = coef * index_coef(m, s, l as i64 + 1, jl);
        }
        if coef.is_zero() {
            return Ok(());
        }
        let columns: Vec<(i64, i64)> = ja
            .iter()
            .enumerate()
            .map(|(k, &jk)| (k as i64 + 1, jk))
            .chain(jb.iter().enumerate().map(|(l, &jl)| (l as i64 + 1, jl)))
            .collect();
        let det = tuple_det(m, &columns, s)?;
        if det.is_zero() {
            return Ok(());
        }
        let (sa, sb) = (ja.iter().sum::<i64>(), jb.iter().sum::<i64>());
        let slot = (sa * (max_sb + 1) + sb) as usize;
        let (ln_i, rel_err) = match integrals[slot] {
            Some(v) => v,
            None => {
                let v = y_integral(tau, al, be, sa, sb, t, &quad_budget)?;
                integrals[slot] = Some(v);
                v
            }
        };
        // (-1)^{sa} (t-1)^{-sa} t^{sb} (t-1)^{-sb}
        let tuple_sign = if sa % 2 == 0 { Sign::Pos } else { Sign::Neg };
        let ln_mono = sb as f64 * ln_t - (sa + sb) as f64 * ln_tm1;
        let term = coef * det * SignedLog::new(tuple_sign, ln_i + ln_mono);
        err_sum += rel_err * term.ln_abs.exp();
        terms.push(term);
        Ok(())
    })?;
    let (total, ln_abs_total) = terms.total();
    let value = (SignedLog::new(sign, ln_const) * total).to_f64_checked()?;
    let rounding = 64.0 * f64::EPSILON * (ln_abs_total + ln_const).exp();
    let err_estimate = err_sum * ln_const.exp() + rounding;
    Ok(CdfEvaluation {
        t,
        value,
        method: Method::Theorem1,
        err_estimate,
    })
}

/// `ln ∫₀^∞ y^{τ-α-1-sa} (1+y)^{sa+sb-τ-1} (1+ty)^{-(τ-α-β-1)} dy` and its
/// relative error estimate.
fn y_integral(
    tau: i64,
    al: i64,
    be: i64,
    sa: i64,
    sb: i64,
    t: f64,
    budget: &AccuracyBudget,
) -> Result<(f64, f64)> {
    let ey = (tau - al - 1 - sa) as f64;
    let e1 = (sa + sb - tau - 1) as f64;
    let et = -((tau - al - be - 1) as f64);
    // Peak-normalize in log space so the quadrature sees O(1) values.
    let ln_f = |y: f64| ey * y.ln() + e1 * y.ln_1p() + et * (t * y).ln_1p();
    let mut shift = f64::NEG_INFINITY;
    for k in -40..=40 {
        shift = shift.max(ln_f(10f64.powf(k as f64 / 4.0)));
    }
    let r = integrate_semi_infinite(
        |y| if y > 0.0 && y.is_finite() { (ln_f(y) - shift).exp() } else { 0.0 },
        &AccuracyBudget {
            abs_tol: f64::MIN_POSITIVE,
            ..*budget
        },
    )?;
    if !(r.value > 0.0) {
        return Err(ScnError::NotEvaluable("y-integral underflowed".into()));
    }
    Ok((r.value.ln() + shift, r.err_estimate / r.value))
}

/// `(p-m)(p+m-1) < 2mp`.
pub fn corollary1_constraint_holds(dims: ProblemDims) -> bool {
    let (m, p) = (dims.m(), dims.p());
    (p - m) * (p + m - 1) < 2 * m * p
}

/// Null c.d.f. for `n = m` as a `β`-fold sum of Gauss functions.
pub fn cdf_h0_corollary1(dims: ProblemDims, t: f64, budget: &AccuracyBudget) -> Result<CdfEvaluation> {
    check_t(t)?;
    if dims.alpha() != 0 {
        return Err(ScnError::domain(format!(
            "corollary 1 needs n = m, got {dims}; use theorem 1"
        )));
    }
    if !corollary1_constraint_holds(dims) {
        return Err(ScnError::domain(format!(
            "(p-m)(p+m-1) < 2mp fails for {dims}; use theorem 1"
        )));
    }
    let (m, be) = (dims.m() as i64, dims.beta() as i64);
    if be == 0 {
        return cdf_h0_corollary2(dims.m(), t, budget);
    }
    let nu = dims.nu() as i64;
    let inner = budget.tightened(1e3);
    let ln_const = ln_k_mnp(dims) - ln_fact(m - 1) + ln_tail_const(m, be);
    let sign = if (be * (m - 1)) % 2 == 0 { Sign::Pos } else { Sign::Neg };

    // G_ℓ(q) = (m+ℓ+q)! / (q! (ℓ)_q (ℓ-1)!² (m+β-ℓ-1-q)!)
    let ln_g = |l: i64, q: i64| -> SignedLog {
        SignedLog::positive_ln(ln_fact(m + l + q) - ln_fact(q) - 2.0 * ln_fact(l - 1) - ln_fact(m + be - l - 1 - q))
            / pochhammer_ln(l as f64, q as u64)
    };
    let bounds: Vec<i64> = (1..=be).map(|l| m + be - l).collect();
    let mut terms = SignedLogSum::new();
    let ln_t = t.ln();
    let ln_tm1 = (t - 1.0).ln();
    for_each_tuple(&bounds, |j| {
        let sj: i64 = j.iter().sum();
        let columns: Vec<(i64, i64)> = j
            .iter()
            .enumerate()
            .map(|(l, &jl)| (l as i64 + 1, jl))
            .collect();
        let det = tuple_det(m, &columns, be)?;
        if det.is_zero() {
            return Ok(());
        }
        let mut g = SignedLog::ONE;
        for (l, &jl) in j.iter().enumerate() {
            g = g * ln_g(l as i64 + 1, jl);
        }
        let b2 = nu - be - sj;
        if b2 <= 0 {
            return Err(ScnError::domain("Beta argument is not positive"));
        }
        let c = (2 * nu - be - sj) as f64;
        let f = gauss_2f1((nu - be - 1) as f64, nu as f64, c, 1.0 - t, &inner)?;
        let sign_t = if sj % 2 == 0 { Sign::Pos } else { Sign::Neg };
        let ln_rest = ln_beta(nu as f64, b2 as f64)? + sj as f64 * ln_t
            + (nu - sj - be - 1) as f64 * ln_tm1;
        let term = det * g * SignedLog::new(sign_t, ln_rest) * SignedLog::from_f64(f);
        terms.push(term);
        Ok(())
    })?;
    let (total, ln_abs_total) = terms.total();
    let value = (SignedLog::new(sign, ln_const) * total).to_f64_checked()?;
    let err_estimate = (inner.rel_tol + 64.0 * f64::EPSILON) * (ln_abs_total + ln_const).exp();
    Ok(CdfEvaluation {
        t,
        value,
        method: Method::Corollary1,
        err_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> AccuracyBudget {
        AccuracyBudget::default()
    }

    fn dims(m: usize, n: usize, p: usize) -> ProblemDims {
        ProblemDims::new(m, n, p).unwrap()
    }

    #[test]
    fn integer_determinants() {
        assert!((integer_det(&[vec![2, 1], vec![1, 3]]).to_f64() - 5.0).abs() < 1e-14);
        assert!(integer_det(&[vec![1, 2], vec![2, 4]]).is_zero());
        let d = integer_det(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 7]]);
        assert!((d.to_f64() + 7.0).abs() < 1e-14);
        // Overflowing entries fall back to floating point.
        let big = 1i128 << 100;
        let d = integer_det(&[vec![big, 1], vec![1, big]]);
        assert!((d.ln_abs - 200.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn tuples_cover_ranges() {
        let mut seen = Vec::new();
        for_each_tuple(&[2, 3], |j| {
            seen.push(j.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 0]);
        assert_eq!(seen[5], vec![1, 2]);
        let mut empty = 0;
        for_each_tuple(&[], |_| {
            empty += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(empty, 1);
    }

    #[test]
    fn corollary2_trivial_cases() {
        for t in [1.1, 3.0, 1e4] {
            let e = cdf_h0_corollary2(1, t, &budget()).unwrap();
            assert!((e.value - 1.0).abs() < 1e-14);
        }
        // Leading behaviour 4 B(4,4) (t-1)^3 near t = 1.
        let t = 1.0 + 1e-4;
        let e = cdf_h0_corollary2(2, t, &budget()).unwrap();
        let lead = 4.0 / 140.0 * 1e-12;
        assert!(((e.value - lead) / lead).abs() < 1e-3);
        assert!(cdf_h0_corollary2(2, 1.0, &budget()).is_err());
    }

    #[test]
    fn corollary2_reference_values() {
        // 30-digit values of the closed form.
        let cases = [
            (1.5, 0.001_878_702_577_099_425_074_73),
            (3.0, 0.034_324_659_438_310_692_853_3),
            (5.0, 0.096_807_560_203_566_712_820_8),
            (10.0, 0.232_032_058_852_858_077_616),
        ];
        for (t, want) in cases {
            let got = cdf_h0_corollary2(2, t, &budget()).unwrap().value;
            assert!(((got - want) / want).abs() < 1e-9, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn theorem1_limits() {
        let d = dims(2, 3, 3);
        let lo = cdf_h0_theorem1(d, 1.0 + 1e-6, &budget()).unwrap();
        assert!(lo.value.abs() < 1e-4);
        let hi = cdf_h0_theorem1(d, 1e6, &budget()).unwrap();
        assert!((hi.value - 1.0).abs() < 1e-3, "{}", hi.value);
        for m in [2, 3] {
            let a = cdf_h0_theorem1(dims(m, m, m), 3.0, &budget()).unwrap().value;
            let c = cdf_h0_corollary2(m, 3.0, &budget()).unwrap().value;
            assert!((a - c).abs() < 1e-10, "m={m}: {a} vs {c}");
        }
    }

    #[test]
    fn theorem1_matches_corollary_paths() {
        let b = budget();
        for t in [1.5, 3.0, 10.0] {
            let d = dims(3, 3, 4);
            let a = cdf_h0_theorem1(d, t, &b).unwrap().value;
            let c = cdf_h0_corollary1(d, t, &b).unwrap().value;
            assert!((a - c).abs() < 1e-8, "t={t}: {a} vs {c}");
        }
    }

    #[test]
    fn theorem1_reference_values() {
        // Direct quadrature of the ordered-region integral, 16 digits.
        let cases = [
            ((2, 3, 3), 1.5, 0.005_624_209_460_374_146),
            ((2, 3, 3), 10.0, 0.502_804_231_374_786_4),
            ((2, 4, 3), 3.0, 0.123_752_118_298_210_7),
            ((2, 3, 5), 50.0, 0.961_560_288_326_059_3),
            ((3, 4, 5), 1.5, 5.254_552_512_946_84e-7),
            ((3, 4, 5), 10.0, 0.113_677_493_423_992_2),
            ((3, 5, 3), 3.0, 3.292_583_351_014_21e-4),
            ((3, 5, 3), 50.0, 0.433_569_025_525_545_7),
        ];
        for ((m, n, p), t, want) in cases {
            let got = cdf_h0_theorem1(dims(m, n, p), t, &budget()).unwrap();
            assert!(
                ((got.value - want) / want).abs() < 1e-8,
                "({m},{n},{p}) t={t}: {got:?} vs {want}"
            );
        }
    }

    #[test]
    fn corollary1_constraint() {
        assert!(corollary1_constraint_holds(dims(3, 3, 4)));
        // β = 4 with m = 2: 4·5 = 20 ≥ 2·2·6 = 24? no; β = 5: 5·6 = 30 ≥ 28.
        assert!(!corollary1_constraint_holds(dims(2, 2, 7)));
        assert!(cdf_h0_corollary1(dims(2, 2, 7), 2.0, &budget()).is_err());
        assert!(cdf_h0_corollary1(dims(2, 3, 3), 2.0, &budget()).is_err());
        let via = cdf_h0_corollary1(dims(2, 2, 2), 5.0, &budget()).unwrap();
        assert_eq!(via.method, Method::Corollary2);
    }
}
