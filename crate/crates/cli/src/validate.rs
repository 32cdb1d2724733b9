use scn_core::detector::{
    cfar_experiment, detection_probability, robustness_statistics, threshold_for_alpha, DetectionMethod,
    RobustnessScenario, Statistic,
};
use scn_core::fdist::{
    cdf_h0, cdf_h0_corollary1, cdf_h0_corollary2, cdf_h0_theorem1, cdf_h1_theorem2, cdf_scn_bruteforce_quadrature,
    cdf_scn_monte_carlo, CdfEvaluation, CdfOptions,
};
use scn_core::matrand::{HermitianMatrix, Hypothesis, ProblemDims, RngStream};
use scn_core::specfun::AccuracyBudget;
use scn_core::Result;

pub struct Scale {
    pub draws: usize,
    /// Multiplies every tolerance.
    pub tolerance: f64,
}

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, r: Result<(bool, String)>) -> Check {
    let name = name.into();
    match r {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn dims(m: usize, n: usize, p: usize) -> ProblemDims {
    ProblemDims::new(m, n, p).expect("fixed dimensions are valid")
}

/// `3·√(max(F̂(1-F̂), F(1-F))/N)`: the binomial band, floored by the exact
/// variance so that a zero empirical count does not collapse it.
fn mc_band(exact: f64, mc: f64, n: usize) -> f64 {
    let v = (mc * (1.0 - mc)).max(exact * (1.0 - exact));
    3.0 * (v / n as f64).sqrt()
}

pub fn run(scale: &Scale) -> Vec<Check> {
    let k = scale.tolerance;
    let n = scale.draws;
    let budget = AccuracyBudget::default();
    let opts = CdfOptions::default();
    let mut out = Vec::new();

    let grid = [1.5, 3.0, 10.0, 50.0];
    for (i, d) in [dims(2, 2, 2), dims(2, 3, 3), dims(3, 3, 4), dims(2, 4, 3)].into_iter().enumerate() {
        out.push(check(format!("h0 exact vs monte carlo {d}"), (|| {
            let mc = cdf_scn_monte_carlo(d, &Hypothesis::H0, &grid, n, 100 + i as u64)?;
            let mut worst = 0.0f64;
            let mut pass = true;
            for e in &mc {
                let x = cdf_h0(d, e.t, &opts)?;
                let dev = (x.value - e.value).abs();
                let tol = k * (mc_band(x.value, e.value, n) + x.err_estimate);
                pass &= dev < tol || (dev == 0.0 && k > 0.0);
                worst = worst.max(dev / tol.max(f64::MIN_POSITIVE));
            }
            Ok((pass, format!("max deviation/band {worst:.3}")))
        })()));
    }

    let quad_cases: [(&str, ProblemDims, fn(ProblemDims, f64, &AccuracyBudget) -> Result<CdfEvaluation>); 3] = [
        ("corollary2", dims(2, 2, 2), |d, t, b| cdf_h0_corollary2(d.m(), t, b)),
        ("corollary1", dims(2, 2, 3), cdf_h0_corollary1),
        ("theorem1", dims(2, 3, 3), cdf_h0_theorem1),
    ];
    for (name, d, f) in quad_cases {
        out.push(check(format!("{name} vs quadrature {d}"), (|| {
            let mut worst = 0.0f64;
            for t in [1.5, 3.0, 10.0] {
                let q = cdf_scn_bruteforce_quadrature(d, &Hypothesis::H0, t, &budget)?.value;
                worst = worst.max((f(d, t, &budget)?.value - q).abs());
            }
            Ok((worst < k * 1e-6, format!("max |Δ| {worst:.2e}")))
        })()));
    }

    out.push(check("degeneration chain", (|| {
        let mut worst = 0.0f64;
        for d in [dims(3, 3, 4), dims(2, 2, 3), dims(2, 2, 4)] {
            for t in [1.5, 3.0, 10.0] {
                let a = cdf_h0_theorem1(d, t, &budget)?.value;
                let c = cdf_h0_corollary1(d, t, &budget)?.value;
                worst = worst.max((a - c).abs());
            }
        }
        for m in [2, 3] {
            let a = cdf_h0_corollary1(dims(m, m, m), 4.0, &budget)?.value;
            let c = cdf_h0_corollary2(m, 4.0, &budget)?.value;
            worst = worst.max((a - c).abs());
        }
        Ok((worst < k * 1e-8, format!("max |Δ| {worst:.2e}")))
    })()));

    let log_grid: Vec<f64> = (1..=100).map(|i| 10f64.powf(3.0 * i as f64 / 100.0)).collect();
    let paths: [(&str, Box<dyn Fn(f64) -> Result<CdfEvaluation>>); 5] = [
        ("corollary2 m=2", Box::new(|t| cdf_h0_corollary2(2, t, &budget))),
        ("corollary1 (3,3,4)", Box::new(|t| cdf_h0_corollary1(dims(3, 3, 4), t, &budget))),
        ("theorem1 (2,3,3)", Box::new(|t| cdf_h0_theorem1(dims(2, 3, 3), t, &budget))),
        ("theorem2 m=2 gamma=1", Box::new(|t| cdf_h1_theorem2(2, 1.0, t, &budget))),
        ("theorem2 m=3 gamma=1", Box::new(|t| cdf_h1_theorem2(3, 1.0, t, &budget))),
    ];
    for (name, f) in paths {
        out.push(check(format!("monotone and bounded: {name}"), (|| {
            let mut prev: Option<CdfEvaluation> = None;
            let mut pass = true;
            for &t in &log_grid {
                let e = f(t)?;
                let slack = k * e.err_estimate.max(1e-12);
                pass &= e.value > -slack && e.value < 1.0 + slack;
                if let Some(p) = prev {
                    pass &= e.value > p.value - slack - k * p.err_estimate;
                }
                prev = Some(e);
            }
            Ok((pass, format!("{} points on (1, 1e3]", log_grid.len())))
        })()));
    }

    for m in [2usize, 3] {
        out.push(check(format!("h1 exact vs monte carlo m={m}"), (|| {
            let d = ProblemDims::square(m)?;
            let mut worst = 0.0f64;
            let mut pass = true;
            for (j, gamma) in [0.5, 2.0, 5.0].into_iter().enumerate() {
                let hyp = Hypothesis::spiked(m, gamma)?;
                let mc = cdf_scn_monte_carlo(d, &hyp, &[1.2, 1.8], n, 200 + 10 * m as u64 + j as u64)?;
                for e in &mc {
                    let x = cdf_h1_theorem2(m, gamma, e.t, &budget)?;
                    let dev = (x.value - e.value).abs();
                    let tol = k * (mc_band(x.value, e.value, n) + x.err_estimate);
                    pass &= dev < tol;
                    worst = worst.max(dev / tol.max(f64::MIN_POSITIVE));
                }
            }
            Ok((pass, format!("max deviation/band {worst:.3}")))
        })()));
    }

    out.push(check("cfar across covariances (2,3,3)", (|| {
        let d = dims(2, 3, 3);
        let th = threshold_for_alpha(d, 0.1, &opts)?;
        let mut rng = RngStream::new(7, 0);
        let covs = [
            HermitianMatrix::identity(2),
            HermitianMatrix::diagonal(&[1.0, 10.0])?,
            HermitianMatrix::random_positive_definite(2, 0.01, &mut rng)?,
        ];
        let r = cfar_experiment(d, th.mu_th, &covs, n, 300, &opts)?;
        let band = mc_band(r.exact.value, r.exact.value, n);
        Ok((
            r.max_exact_deviation < k * band,
            format!("max |p̂ - P_F| {:.2e}, band {band:.2e}", r.max_exact_deviation),
        ))
    })()));

    out.push(check("estimation-error identities", (|| {
        let d = dims(4, 4, 6);
        let draws = 2_000;
        let base = |statistic, epsilon| robustness_statistics(d, RobustnessScenario { epsilon, statistic }, draws, 400);
        let lm0 = base(Statistic::LambdaMax, 0.0)?;
        let sc0 = base(Statistic::Scn, 0.0)?;
        let lm = base(Statistic::LambdaMax, 0.3)?;
        let sc = base(Statistic::Scn, 0.3)?;
        let exact_lm = lm0.iter().zip(&lm).all(|(a, b)| *b == a / 1.3);
        let worst = sc0
            .iter()
            .zip(&sc)
            .map(|(a, b)| ((a - b) / a).abs())
            .fold(0.0f64, f64::max);
        let pow2 = base(Statistic::Scn, 1.0)? == sc0;
        Ok((
            exact_lm && pow2 && worst < k * 4.0 * f64::EPSILON,
            format!("λ_max exact: {exact_lm}, SCN max rel {worst:.1e}, ε=1 bitwise: {pow2}"),
        ))
    })()));

    out.push(check("power does not grow with m", (|| {
        let mut pass = true;
        let mut detail = Vec::new();
        for pf in [0.01, 0.1] {
            let mut prev = f64::INFINITY;
            for m in [2, 3, 4] {
                let d = ProblemDims::square(m)?;
                let th = threshold_for_alpha(d, pf, &opts)?;
                let pd = detection_probability(d, 2.0, th.mu_th, DetectionMethod::Exact, &opts)?;
                pass &= pd.value < prev + k * (pd.err_estimate + 1e-12);
                prev = pd.value;
                detail.push(format!("{:.4}", pd.value));
            }
        }
        Ok((pass, format!("P_D at γ=2: {}", detail.join(" "))))
    })()));

    out
}
