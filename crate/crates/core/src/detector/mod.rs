//! Detector built on the SCN statistic: false-alarm and detection
//! probabilities, threshold calibration, ROC profiles, and the CFAR and
//! estimation-error experiments.
//!
//! `P_F(μ) = 1 - F(μ; H0)` and `P_D(γ, μ) = 1 - F(μ; H1)`.

use serde::{Deserialize, Serialize};

use crate::fdist::{cdf_h0, cdf_h1, cdf_scn_monte_carlo, CdfEvaluation, CdfOptions, Method};
use crate::matrand::{map_draws, FMatrixSampler, HermitianMatrix, Hypothesis, ProblemDims, DEFAULT_CHUNK};
use crate::{Result, ScnError};

/// Relative width at which threshold bisection stops.
const BRACKET_REL_WIDTH: f64 = 1e-10;

/// A tail probability with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub value: f64,
    pub err_estimate: f64,
    pub method: Method,
}

impl Probability {
    fn complement(e: CdfEvaluation) -> Self {
        Probability {
            value: 1.0 - e.value,
            err_estimate: e.err_estimate,
            method: e.method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorOperatingPoint {
    /// Target false-alarm rate the threshold was calibrated for.
    pub alpha: f64,
    pub mu_th: f64,
    pub p_f: f64,
    pub p_d: Option<f64>,
    pub p_d_err: Option<f64>,
    pub p_d_method: Option<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    Scn,
    LambdaMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessScenario {
    pub epsilon: f64,
    pub statistic: Statistic,
}

/// How [`detection_probability`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetectionMethod {
    Exact,
    MonteCarlo { draws: usize, seed: u64 },
}

/// `1 - F(μ; H0)` through the fdist dispatcher.
pub fn false_alarm_rate(dims: ProblemDims, mu_th: f64, opts: &CdfOptions) -> Result<Probability> {
    Ok(Probability::complement(cdf_h0(dims, mu_th, opts)?))
}

/// Calibrated threshold and the false-alarm rate it achieves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub alpha: f64,
    pub mu_th: f64,
    pub p_f: Probability,
}

/// Solves `P_F(μ) = alpha_rate`.
///
/// Exact paths are inverted by bracketing and bisection. When the null
/// c.d.f. is only available by simulation, the threshold is the empirical
/// `(1 - alpha_rate)` quantile of one batch of draws.
pub fn threshold_for_alpha(dims: ProblemDims, alpha_rate: f64, opts: &CdfOptions) -> Result<Threshold> {
    if !(alpha_rate > 0.0 && alpha_rate < 1.0) {
        return Err(ScnError::domain(format!("false-alarm rate must lie in (0, 1), got {alpha_rate}")));
    }
    if dims.m() == 1 {
        return Err(ScnError::domain("the SCN is identically 1 for m = 1; no threshold exists"));
    }
    let pf = |mu: f64| false_alarm_rate(dims, mu, opts);
    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut at_hi = pf(hi)?;
    if at_hi.method == Method::MonteCarlo {
        return threshold_by_quantile(dims, alpha_rate, opts);
    }
    let mut doublings = 0;
    while at_hi.value > alpha_rate {
        lo = hi;
        hi *= 2.0;
        at_hi = pf(hi)?;
        doublings += 1;
        if doublings > 200 || at_hi.method == Method::MonteCarlo {
            if at_hi.method == Method::MonteCarlo {
                return threshold_by_quantile(dims, alpha_rate, opts);
            }
            return Err(ScnError::NonConvergence {
                what: "threshold bracketing",
                steps: doublings,
                estimate: hi,
                error: at_hi.value,
            });
        }
    }
    let mut best = at_hi;
    while (hi - lo) > BRACKET_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        let at_mid = pf(mid)?;
        if at_mid.method == Method::MonteCarlo {
            return threshold_by_quantile(dims, alpha_rate, opts);
        }
        if at_mid.value > alpha_rate {
            lo = mid;
        } else {
            hi = mid;
            best = at_mid;
        }
    }
    Ok(Threshold {
        alpha: alpha_rate,
        mu_th: hi,
        p_f: best,
    })
}

fn threshold_by_quantile(dims: ProblemDims, alpha_rate: f64, opts: &CdfOptions) -> Result<Threshold> {
    let sampler = FMatrixSampler::new(dims, &Hypothesis::H0, &HermitianMatrix::identity(dims.m()))?;
    let mut scn = map_draws(opts.seed, opts.mc_draws, DEFAULT_CHUNK, |rng| sampler.draw(rng).map(|s| s.scn))?;
    scn.sort_by(f64::total_cmp);
    let mu_th = upper_quantile(&scn, alpha_rate);
    let exceed = scn.len() - scn.partition_point(|&s| s <= mu_th);
    let p = exceed as f64 / scn.len() as f64;
    Ok(Threshold {
        alpha: alpha_rate,
        mu_th,
        p_f: Probability {
            value: p,
            err_estimate: (p * (1.0 - p) / scn.len() as f64).sqrt(),
            method: Method::MonteCarlo,
        },
    })
}

/// Smallest sample value with at most a fraction `a` of draws above it.
fn upper_quantile(sorted: &[f64], a: f64) -> f64 {
    let n = sorted.len();
    let allowed = (a * n as f64).floor() as usize;
    sorted[(n - allowed.min(n)).saturating_sub(1).min(n - 1)]
}

/// `1 - F(μ; H1)`. `γ = 0` is the null hypothesis.
pub fn detection_probability(
    dims: ProblemDims,
    gamma: f64,
    mu_th: f64,
    method: DetectionMethod,
    opts: &CdfOptions,
) -> Result<Probability> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(ScnError::domain(format!("SNR must be nonnegative, got {gamma}")));
    }
    if !(mu_th > 1.0) {
        return Err(ScnError::domain(format!("threshold must exceed 1, got {mu_th}")));
    }
    let hyp = Hypothesis::spiked(dims.m(), gamma)?;
    match method {
        DetectionMethod::Exact => {
            if gamma == 0.0 {
                return false_alarm_rate(dims, mu_th, opts);
            }
            if !dims.is_square() {
                return Err(ScnError::domain(format!(
                    "the exact spiked c.d.f. needs m = n = p, got {dims}; use Monte Carlo"
                )));
            }
            Ok(Probability::complement(cdf_h1(dims, &hyp, mu_th, opts)?))
        }
        DetectionMethod::MonteCarlo { draws, seed } => {
            let e = cdf_scn_monte_carlo(dims, &hyp, &[mu_th], draws, seed)?;
            Ok(Probability::complement(e[0]))
        }
    }
}

/// Operating points for each target false-alarm rate, sorted by `p_f`.
///
/// With Monte Carlo, one batch of spiked draws serves every threshold.
pub fn roc_profile(
    dims: ProblemDims,
    gamma: f64,
    alpha_grid: &[f64],
    method: DetectionMethod,
    opts: &CdfOptions,
) -> Result<Vec<DetectorOperatingPoint>> {
    if alpha_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ScnError::domain("false-alarm grid must be strictly ascending"));
    }
    let thresholds: Vec<Threshold> = alpha_grid
        .iter()
        .map(|&a| threshold_for_alpha(dims, a, opts))
        .collect::<Result<_>>()?;
    let p_d: Vec<Probability> = match method {
        DetectionMethod::MonteCarlo { draws, seed } if gamma > 0.0 => {
            let hyp = Hypothesis::spiked(dims.m(), gamma)?;
            let mut mus: Vec<f64> = thresholds.iter().map(|t| t.mu_th).collect();
            // Thresholds descend as alpha ascends.
            mus.reverse();
            let mut cdf = cdf_scn_monte_carlo(dims, &hyp, &mus, draws, seed)?;
            cdf.reverse();
            cdf.into_iter().map(Probability::complement).collect()
        }
        _ => thresholds
            .iter()
            .map(|t| detection_probability(dims, gamma, t.mu_th, method, opts))
            .collect::<Result<_>>()?,
    };
    let mut points: Vec<DetectorOperatingPoint> = thresholds
        .iter()
        .zip(&p_d)
        .map(|(t, d)| DetectorOperatingPoint {
            alpha: t.alpha,
            mu_th: t.mu_th,
            p_f: t.p_f.value,
            p_d: Some(d.value),
            p_d_err: Some(d.err_estimate),
            p_d_method: Some(d.method),
        })
        .collect();
    points.sort_by(|a, b| a.p_f.total_cmp(&b.p_f));
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfarEntry {
    pub p_f: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfarReport {
    pub mu_th: f64,
    pub exact: Probability,
    pub entries: Vec<CfarEntry>,
    /// `max |p̂_i - p̂_j|` over covariance pairs.
    pub max_pairwise_deviation: f64,
    /// `max |p̂_i - P_F|`.
    pub max_exact_deviation: f64,
}

/// Empirical false-alarm rate at `mu_th` under each noise covariance.
///
/// Covariance `i` uses seed `seed + i`, so the batches are independent.
pub fn cfar_experiment(
    dims: ProblemDims,
    mu_th: f64,
    covariances: &[HermitianMatrix],
    draws: usize,
    seed: u64,
    opts: &CdfOptions,
) -> Result<CfarReport> {
    if draws == 0 {
        return Err(ScnError::domain("need at least one draw"));
    }
    let exact = false_alarm_rate(dims, mu_th, opts)?;
    let mut entries = Vec::with_capacity(covariances.len());
    for (i, cov) in covariances.iter().enumerate() {
        let sampler = FMatrixSampler::new(dims, &Hypothesis::H0, cov)?;
        let hits = map_draws(seed.wrapping_add(i as u64), draws, DEFAULT_CHUNK, |rng| {
            sampler.draw(rng).map(|s| s.scn > mu_th)
        })?;
        let p = hits.iter().filter(|&&h| h).count() as f64 / draws as f64;
        entries.push(CfarEntry {
            p_f: p,
            stderr: (p * (1.0 - p) / draws as f64).sqrt(),
        });
    }
    let mut max_pairwise_deviation = 0.0f64;
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            max_pairwise_deviation = max_pairwise_deviation.max((a.p_f - b.p_f).abs());
        }
    }
    let max_exact_deviation = entries
        .iter()
        .map(|e| (e.p_f - exact.value).abs())
        .fold(0.0, f64::max);
    Ok(CfarReport {
        mu_th,
        exact,
        entries,
        max_pairwise_deviation,
        max_exact_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessOutcome {
    pub scenario: RobustnessScenario,
    pub threshold: f64,
    pub p_f: f64,
    pub stderr: f64,
    pub draws: usize,
}

/// Per-draw statistic under the scenario's estimation error.
pub fn robustness_statistics(
    dims: ProblemDims,
    scenario: RobustnessScenario,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(scenario.epsilon >= 0.0) || !scenario.epsilon.is_finite() {
        return Err(ScnError::domain(format!("ε must be nonnegative, got {}", scenario.epsilon)));
    }
    let sampler = FMatrixSampler::new(dims, &Hypothesis::H0, &HermitianMatrix::identity(dims.m()))?;
    map_draws(seed, draws, DEFAULT_CHUNK, |rng| {
        let d = sampler.draw(rng)?;
        let d = if scenario.epsilon == 0.0 { d } else { d.perturbed(scenario.epsilon) };
        Ok(match scenario.statistic {
            Statistic::Scn => d.scn,
            Statistic::LambdaMax => d.lambda_max,
        })
    })
}

/// Threshold for the statistic at `ε = 0`: the empirical upper
/// `alpha_rate` quantile of `draws` null draws.
pub fn calibrate_threshold(
    dims: ProblemDims,
    statistic: Statistic,
    alpha_rate: f64,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if !(alpha_rate > 0.0 && alpha_rate < 1.0) {
        return Err(ScnError::domain(format!("false-alarm rate must lie in (0, 1), got {alpha_rate}")));
    }
    if draws == 0 {
        return Err(ScnError::domain("need at least one draw"));
    }
    let scenario = RobustnessScenario { epsilon: 0.0, statistic };
    let mut s = robustness_statistics(dims, scenario, draws, seed)?;
    s.sort_by(f64::total_cmp);
    Ok(upper_quantile(&s, alpha_rate))
}

/// Empirical false-alarm rate of the scenario's statistic at `threshold`.
pub fn robustness_experiment(
    dims: ProblemDims,
    scenario: RobustnessScenario,
    threshold: f64,
    draws: usize,
    seed: u64,
) -> Result<RobustnessOutcome> {
    if draws == 0 {
        return Err(ScnError::domain("need at least one draw"));
    }
    let s = robustness_statistics(dims, scenario, draws, seed)?;
    let p = s.iter().filter(|&&x| x > threshold).count() as f64 / draws as f64;
    Ok(RobustnessOutcome {
        scenario,
        threshold,
        p_f: p,
        stderr: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    })
}
