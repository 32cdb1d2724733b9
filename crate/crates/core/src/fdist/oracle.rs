use super::density::{joint_density_h0, joint_density_h1};
use super::{CdfEvaluation, Method};
use crate::matrand::{scn_draws, FMatrixSampler, HermitianMatrix, Hypothesis, ProblemDims};
use crate::specfun::{integrate_finite, integrate_semi_infinite, AccuracyBudget};
use crate::{Result, ScnError};

/// Empirical c.d.f. of the SCN on an ascending grid.
///
/// The SCN law does not depend on the noise covariance, so draws use the
/// identity. `err_estimate` is the binomial standard error `√(F̂(1-F̂)/N)`.
pub fn cdf_scn_monte_carlo(
    dims: ProblemDims,
    hypothesis: &Hypothesis,
    t_grid: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<CdfEvaluation>> {
    if draws == 0 {
        return Err(ScnError::domain("need at least one draw"));
    }
    if t_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(ScnError::domain("threshold grid must be ascending"));
    }
    if t_grid.iter().any(|&t| !(t > 1.0)) {
        return Err(ScnError::domain("thresholds must exceed 1"));
    }
    let sampler = FMatrixSampler::new(dims, hypothesis, &HermitianMatrix::identity(dims.m()))?;
    let mut scn = scn_draws(&sampler, seed, draws)?;
    scn.sort_by(f64::total_cmp);
    Ok(empirical_cdf(&scn, t_grid))
}

/// Evaluates the step c.d.f. of sorted draws at each threshold.
pub(crate) fn empirical_cdf(sorted: &[f64], t_grid: &[f64]) -> Vec<CdfEvaluation> {
    let n = sorted.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let value = sorted.partition_point(|&s| s <= t) as f64 / n;
            CdfEvaluation {
                t,
                value,
                method: Method::MonteCarlo,
                err_estimate: (value * (1.0 - value) / n).sqrt(),
            }
        })
        .collect()
}

/// `∫₀^∞ ∫_{λ₁}^{tλ₁} f(λ₁, λ₂) dλ₂ dλ₁` for `m = 2` by nested adaptive
/// quadrature, with the inner variable written as `λ₂ = λ₁v`, `v ∈ (1, t)`.
pub fn cdf_scn_bruteforce_quadrature(
    dims: ProblemDims,
    hypothesis: &Hypothesis,
    t: f64,
    budget: &AccuracyBudget,
) -> Result<CdfEvaluation> {
    if dims.m() != 2 {
        return Err(ScnError::domain("brute-force quadrature is implemented for m = 2"));
    }
    if !(t > 1.0) || !t.is_finite() {
        return Err(ScnError::domain(format!("threshold must be finite and > 1, got {t}")));
    }
    let gamma = match hypothesis {
        Hypothesis::H0 => None,
        Hypothesis::H1(s) => Some(s.gamma()),
    };
    let density = |a: f64, b: f64| -> Result<f64> {
        match gamma {
            None => joint_density_h0(dims, &[a, b]),
            Some(g) => joint_density_h1(dims, g, &[a, b]),
        }
    };
    let inner_budget = budget.tightened(100.0);
    let failure = std::cell::RefCell::new(None);
    let outer = |l1: f64| -> f64 {
        if !(l1 > 0.0) || !l1.is_finite() {
            return 0.0;
        }
        let r = integrate_finite(
            |v| {
                let l2 = l1 * v;
                if !(l2 > l1) || !l2.is_finite() {
                    return 0.0;
                }
                density(l1, l2).unwrap_or(0.0) * l1
            },
            1.0,
            t,
            &inner_budget,
        );
        match r {
            Ok(q) => q.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let r = integrate_semi_infinite(outer, budget)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(CdfEvaluation {
        t,
        value: r.value,
        method: Method::BruteForceQuadrature,
        err_estimate: r.err_estimate + budget.rel_tol * r.value.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdist::{cdf_h0_corollary2, cdf_h1_theorem2};

    #[test]
    fn single_draw_is_a_step() {
        let e = empirical_cdf(&[2.5], &[1.5, 2.5, 4.0]);
        let v: Vec<f64> = e.iter().map(|x| x.value).collect();
        assert_eq!(v, vec![0.0, 1.0, 1.0]);
        assert!(e.iter().all(|x| x.err_estimate == 0.0));
    }

    #[test]
    fn m1_is_degenerate() {
        let d = ProblemDims::new(1, 3, 4).unwrap();
        let e = cdf_scn_monte_carlo(d, &Hypothesis::H0, &[1.01, 2.0], 500, 9).unwrap();
        assert!(e.iter().all(|x| x.value == 1.0));
    }

    #[test]
    fn grid_validation() {
        let d = ProblemDims::square(2).unwrap();
        assert!(cdf_scn_monte_carlo(d, &Hypothesis::H0, &[3.0, 2.0], 10, 1).is_err());
        assert!(cdf_scn_monte_carlo(d, &Hypothesis::H0, &[0.5], 10, 1).is_err());
        assert!(cdf_scn_monte_carlo(d, &Hypothesis::H0, &[2.0], 0, 1).is_err());
    }

    #[test]
    fn monte_carlo_tracks_corollary2() {
        let d = ProblemDims::square(2).unwrap();
        let n = 100_000;
        let e = cdf_scn_monte_carlo(d, &Hypothesis::H0, &[5.0], n, 11).unwrap();
        let exact = cdf_h0_corollary2(2, 5.0, &AccuracyBudget::default()).unwrap().value;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((e[0].value - exact).abs() < 4.0 * se, "{} vs {exact}", e[0].value);
    }

    #[test]
    fn quadrature_matches_exact_paths() {
        let b = AccuracyBudget::default();
        let d = ProblemDims::square(2).unwrap();
        for t in [1.5, 5.0] {
            let q = cdf_scn_bruteforce_quadrature(d, &Hypothesis::H0, t, &b).unwrap().value;
            let c = cdf_h0_corollary2(2, t, &b).unwrap().value;
            assert!((q - c).abs() < 1e-7, "t={t}: {q} vs {c}");
        }
        let h1 = Hypothesis::spiked(2, 2.0).unwrap();
        let q = cdf_scn_bruteforce_quadrature(d, &h1, 1.8, &b).unwrap().value;
        let c = cdf_h1_theorem2(2, 2.0, 1.8, &b).unwrap().value;
        assert!((q - c).abs() < 1e-6, "{q} vs {c}");
        let far = cdf_scn_bruteforce_quadrature(d, &Hypothesis::H0, 1e6, &b).unwrap().value;
        let exact = cdf_h0_corollary2(2, 1e6, &b).unwrap().value;
        assert!((far - exact).abs() < 1e-8, "{far} vs {exact}");
    }
}
