use std::f64::consts::PI;

use super::sum::{Sign, SignedLog};
use crate::{Result, ScnError};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// zeta(k) - 1 for k = 2..=40.
const ZETA_MINUS_ONE: [f64; 39] = [
    6.44934066848226406e-01,
    2.02056903159594292e-01,
    8.23232337111381857e-02,
    3.69277551433699266e-02,
    1.73430619844491402e-02,
    8.34927738192282713e-03,
    4.07735619794433960e-03,
    2.00839282608221426e-03,
    9.94575127818085256e-04,
    4.94188604119464529e-04,
    2.46086553308048320e-04,
    1.22713347578489145e-04,
    6.12481350587048277e-05,
    3.05882363070204933e-05,
    1.52822594086518710e-05,
    7.63719763789976257e-06,
    3.81729326499984022e-06,
    1.90821271655393897e-06,
    9.53962033872796212e-07,
    4.76932986787806447e-07,
    2.38450502727733004e-07,
    1.19219925965311064e-07,
    5.96081890512594801e-08,
    2.98035035146522793e-08,
    1.49015548283650427e-08,
    7.45071178983543006e-09,
    3.72533402478845728e-09,
    1.86265972351304914e-09,
    9.31327432419668166e-10,
    4.65662906503378366e-10,
    2.32831183367650534e-10,
    1.16415501727005193e-10,
    5.82077208790270145e-11,
    2.91038504449710001e-11,
    1.45519218910419849e-11,
    7.27595983505748180e-12,
    3.63797954737865086e-12,
    1.81898965030706607e-12,
    9.09494784026388841e-13,
];

// B_{2k} / (2k (2k-1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Γ(1 + z)` for `|z| <= 0.5`.
fn ln_gamma_1p(z: f64) -> f64 {
    // ln Γ(1+z) = -ln(1+z) + z(1-γ) + Σ_{k≥2} (-1)^k (ζ(k)-1) z^k / k
    let mut acc = 0.0;
    let mut zk = -z;
    for (i, c) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        zk *= -z;
        let term = c * zk / k;
        acc += term;
        if term.abs() < 1e-18 * acc.abs().max(1e-300) {
            break;
        }
    }
    -z.ln_1p() + z * (1.0 - EULER_GAMMA) + acc
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        corr += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(ScnError::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        ln_gamma_1p(x) - x.ln()
    } else if x <= 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x <= 2.5 {
        let z = x - 2.0;
        z.ln_1p() + ln_gamma_1p(z)
    } else if x < 15.0 {
        let mut r = x;
        let mut prod = 1.0;
        while r > 2.5 {
            r -= 1.0;
            prod *= r;
        }
        prod.ln() + ln_gamma_pos(r)
    } else {
        ln_gamma_stirling(x)
    }
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_pos(n as f64 + 1.0)
    }
}

/// `ln Γ̃_m(a)` for the complex multivariate gamma function
/// `Γ̃_m(a) = π^{m(m-1)/2} Π_{j=1..m} Γ(a - j + 1)`.
pub fn complex_mv_ln_gamma(m: usize, a: f64) -> Result<f64> {
    if m == 0 {
        return Err(ScnError::domain("complex_mv_ln_gamma requires m >= 1"));
    }
    if !(a > (m - 1) as f64) {
        return Err(ScnError::domain(format!(
            "complex_mv_ln_gamma requires a > m - 1 (m={m}, a={a})"
        )));
    }
    let mf = m as f64;
    let mut acc = 0.5 * mf * (mf - 1.0) * PI.ln();
    for j in 1..=m {
        acc += ln_gamma_pos(a - j as f64 + 1.0);
    }
    Ok(acc)
}

/// Pochhammer symbol `(a)_k = a (a+1) ... (a+k-1)` as sign and log-magnitude.
///
/// Returns [`SignedLog::ZERO`] when `a` is a nonpositive integer with `|a| < k`.
pub fn pochhammer_ln(a: f64, k: u64) -> SignedLog {
    if k == 0 {
        return SignedLog::ONE;
    }
    let mut sign = Sign::Pos;
    let mut ln_abs = 0.0;
    let mut i = 0u64;
    // Factors up to the first positive one are handled individually.
    while i < k && a + (i as f64) <= 0.0 {
        let f = a + i as f64;
        if f == 0.0 {
            return SignedLog::ZERO;
        }
        sign = sign * Sign::Neg;
        ln_abs += (-f).ln();
        i += 1;
    }
    let remaining = k - i;
    if remaining > 0 {
        let start = a + i as f64;
        if remaining <= 256 {
            for r in 0..remaining {
                ln_abs += (start + r as f64).ln();
            }
        } else {
            ln_abs += ln_gamma_pos(start + remaining as f64) - ln_gamma_pos(start);
        }
    }
    SignedLog::new(sign, ln_abs)
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(ScnError::domain(format!(
            "ln_beta requires a, b > 0 (a={a}, b={b})"
        )));
    }
    Ok(ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ln_gamma_trivial_values() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        assert!(rel(ln_gamma(5.0).unwrap(), 24f64.ln()) < 1e-15);
        assert!(rel(ln_gamma(0.5).unwrap(), PI.sqrt().ln()) < 1e-14);
    }

    #[test]
    fn ln_gamma_reference_values() {
        // 30-digit reference values.
        let cases = [
            (1e-3, 6.907_178_885_383_853_7),
            (0.1, 2.252_712_651_734_206),
            (0.75, 0.203_280_951_431_295_37),
            (1.25, -0.098_271_836_421_813_161),
            (1.9, -0.038_984_275_923_083_33),
            (1.0001, -5.771_334_222_047_126_8e-5),
            (2.0001, 4.228_165_811_291_994_6e-5),
            (3.7, 1.428_072_326_665_387_9),
            (14.5, 23.862_765_841_689_085),
            (15.5, 26.536_914_491_115_614),
            (100.0, 359.134_205_369_575_4),
            (1e6, 12_815_504.569_147_612),
        ];
        for (x, want) in cases {
            let got = ln_gamma(x).unwrap();
            assert!(rel(got, want) < 1e-13, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn ln_gamma_domain() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn multivariate_gamma() {
        assert!(rel(complex_mv_ln_gamma(1, 3.0).unwrap(), 2f64.ln()) < 1e-15);
        assert!(rel(complex_mv_ln_gamma(2, 2.0).unwrap(), PI.ln()) < 1e-15);
        // 3 ln π + ln Γ(5) + ln Γ(4) + ln Γ(3) = ln(π^3 · 24 · 6 · 2)
        let want = (PI.powi(3) * 24.0 * 6.0 * 2.0).ln();
        assert!(rel(complex_mv_ln_gamma(3, 5.0).unwrap(), want) < 1e-14);
        assert!(complex_mv_ln_gamma(3, 2.0).is_err());
        assert!(complex_mv_ln_gamma(0, 2.0).is_err());
    }

    #[test]
    fn pochhammer_examples() {
        let p = pochhammer_ln(3.0, 2);
        assert_eq!(p.sign, Sign::Pos);
        assert!(rel(p.ln_abs, 12f64.ln()) < 1e-15);
        assert_eq!(pochhammer_ln(-7.3, 0), SignedLog::ONE);
        assert!(pochhammer_ln(-2.0, 4).is_zero());
        assert!(!pochhammer_ln(-2.0, 2).is_zero());
        let q = pochhammer_ln(-2.0, 2); // (-2)(-1) = 2
        assert_eq!(q.sign, Sign::Pos);
        assert!(rel(q.ln_abs, 2f64.ln()) < 1e-15);
        let r = pochhammer_ln(-2.5, 3); // (-2.5)(-1.5)(-0.5)
        assert_eq!(r.sign, Sign::Neg);
        assert!(rel(r.ln_abs, 1.875f64.ln()) < 1e-14);
        // Large k switches to the gamma-ratio route.
        let big = pochhammer_ln(0.5, 1000);
        let want = ln_gamma(1000.5).unwrap() - ln_gamma(0.5).unwrap();
        assert!(rel(big.ln_abs, want) < 1e-14);
    }

    #[test]
    fn beta_examples() {
        assert!(ln_beta(1.0, 1.0).unwrap().abs() < 1e-16);
        assert!(rel(ln_beta(4.0, 4.0).unwrap(), (1.0f64 / 140.0).ln()) < 1e-14);
        // Γ(2.5)Γ(3.5)/Γ(6) = (3√π/4)(15√π/8)/120
        let want = (3.0 * PI.sqrt() / 4.0 * 15.0 * PI.sqrt() / 8.0 / 120.0).ln();
        assert!(rel(ln_beta(2.5, 3.5).unwrap(), want) < 1e-13);
        assert!(ln_beta(0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.5f64..50.0) {
            let lhs = ln_gamma(x + 1.0).unwrap().exp();
            let rhs = x * ln_gamma(x).unwrap().exp();
            prop_assert!(rel(lhs, rhs) < 1e-12, "x={} {} {}", x, lhs, rhs);
        }

        #[test]
        fn pochhammer_matches_product(a in -20.0f64..20.0, k in 0u64..40) {
            let p = pochhammer_ln(a, k);
            let mut sign = Sign::Pos;
            let mut ln_abs = 0.0;
            let mut zero = false;
            for i in 0..k {
                let f = a + i as f64;
                if f == 0.0 { zero = true; }
                sign = sign * Sign::of(f);
                ln_abs += f.abs().ln();
            }
            if zero {
                prop_assert!(p.is_zero());
            } else {
                prop_assert_eq!(p.sign, sign);
                prop_assert!((p.ln_abs - ln_abs).abs() <= 1e-13 * ln_abs.abs().max(1.0));
            }
        }
    }
}
