use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::sum::CompensatedSum;
use super::AccuracyBudget;
use crate::{Result, ScnError};

// Gauss-Kronrod 21-point abscissae (positive half, descending) and weights.
// Odd-indexed abscissae are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Hard cap on the number of live subintervals.
const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute discretization error.
    pub err_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs_value: f64,
    depth: usize,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: usize) -> Result<Interval> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ScnError::domain(format!("integrand is not finite at x={x}: {v}")))
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = fc.abs() * WGK[10];
    for (j, &x) in XGK.iter().enumerate().take(10) {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Interval {
        a,
        b,
        value: kronrod * half,
        err: ((kronrod - gauss) * half).abs(),
        abs_value: abs_k * half.abs(),
        depth,
    })
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]`.
///
/// Intervals with the largest error are bisected until the summed error
/// meets `max(abs_tol, rel_tol·|I|)` or is at the rounding floor. The
/// integrand is never evaluated at the endpoints.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    budget: &AccuracyBudget,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(ScnError::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            err_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(kronrod21(&f, a, b, 0)?);
    let mut evaluations = 21;
    loop {
        let value: CompensatedSum = heap.iter().map(|iv| iv.value).collect();
        let value = value.value();
        let err: f64 = heap.iter().map(|iv| iv.err).sum();
        let abs_total: f64 = heap.iter().map(|iv| iv.abs_value).sum();
        let target = budget.abs_tol.max(budget.rel_tol * value.abs());
        let roundoff = 50.0 * f64::EPSILON * abs_total;
        if err <= target || err <= roundoff {
            return Ok(QuadResult {
                value,
                err_estimate: err.max(roundoff),
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= budget.max_quad_refinements || heap.len() + 2 > MAX_INTERVALS {
            return Err(ScnError::NonConvergence {
                what: "adaptive quadrature",
                steps: evaluations,
                estimate: value,
                error: err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod21(&f, worst.a, mid, worst.depth + 1)?);
        heap.push(kronrod21(&f, mid, worst.b, worst.depth + 1)?);
        evaluations += 42;
    }
}

/// Quadrature over `(0, ∞)` through `y = x/(1-x)`, which maps the range to
/// `(0, 1)` with Jacobian `1/(1-x)²`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    budget: &AccuracyBudget,
) -> Result<QuadResult> {
    let mapped = |x: f64| {
        let om = 1.0 - x;
        f(x / om) / (om * om)
    };
    integrate_finite(mapped, 0.0, 1.0, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_beta;

    fn budget() -> AccuracyBudget {
        AccuracyBudget::default()
    }

    #[test]
    fn finite_polynomial_is_exact() {
        let r = integrate_finite(|x| 3.0 * x * x, 0.0, 2.0, &budget()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn finite_reversed_limits() {
        let r = integrate_finite(|x| x, 1.0, 0.0, &budget()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn finite_peaked_integrand() {
        // ∫_0^1 1/(1+1e4 x)^2 dx = 1/(1e4+1) · 1e4/1e4 ...
        let c = 1e4;
        let r = integrate_finite(|x| 1.0 / (1.0 + c * x).powi(2), 0.0, 1.0, &budget()).unwrap();
        let want = 1.0 / (1.0 + c);
        assert!(((r.value - want) / want).abs() < 1e-10);
        assert!(r.err_estimate <= 1e-10 * want + 1e-14);
    }

    #[test]
    fn semi_infinite_examples() {
        let b = budget();
        let e = integrate_semi_infinite(|y| (-y).exp(), &b).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let r = integrate_semi_infinite(|y| 1.0 / (1.0 + y).powi(2), &b).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let s = integrate_semi_infinite(|y| y / (1.0 + y).powi(4), &b).unwrap();
        assert!((s.value - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_beta_integrals() {
        let b = budget();
        let params = [1.0, 2.0, 3.5, 7.0];
        for &s in &params {
            for &r in &params {
                let got = integrate_semi_infinite(
                    |y: f64| ((s - 1.0) * y.ln() - (s + r) * y.ln_1p()).exp(),
                    &b,
                )
                .unwrap();
                let want = ln_beta(s, r).unwrap().exp();
                assert!(
                    ((got.value - want) / want).abs() < 1e-10,
                    "s={s} r={r}: {} vs {want}",
                    got.value
                );
            }
        }
    }

    #[test]
    fn refinement_cap_reports_non_convergence() {
        let tight = AccuracyBudget {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_terms: 10,
            max_quad_refinements: 1,
        };
        let r = integrate_finite(|x: f64| x.abs().sqrt(), -1.0, 1.0, &tight);
        assert!(matches!(r, Err(ScnError::NonConvergence { .. })));
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate_finite(|x| 1.0 / (x - 0.5), 0.0, 1.0, &budget());
        assert!(r.is_err());
    }
}
