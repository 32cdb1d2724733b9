//! `scn`: c.d.f. evaluation, threshold calibration, ROC and simulation
//! tables, and the validation suite.
//!
//! Exit codes: 0 ok, 1 validation-suite failure, 2 invalid input,
//! 3 numerical failure.

mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scn_core::detector::{
    calibrate_threshold, cfar_experiment, roc_profile, robustness_experiment, threshold_for_alpha, DetectionMethod,
    RobustnessScenario, Statistic,
};
use scn_core::fdist::{
    cdf, cdf_h0_corollary1, cdf_h0_corollary2, cdf_h0_theorem1, cdf_h1_theorem2, cdf_scn_bruteforce_quadrature,
    cdf_scn_monte_carlo, CdfEvaluation, CdfOptions,
};
use scn_core::matrand::{HermitianMatrix, Hypothesis, ProblemDims, RngStream};
use scn_core::specfun::AccuracyBudget;
use scn_core::ScnError;

use output::{write_gnuplot, Format, PlotSpec, Sink};

#[derive(Parser, Debug)]
#[command(name = "scn", version, about = "Squared condition number of complex F-matrices")]
struct Cli {
    /// Worker threads for Monte Carlo batches (0 = all cores).
    #[arg(long, global = true, env = "SCN_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the SCN c.d.f. on a grid of thresholds.
    Cdf(CdfArgs),
    /// Threshold for a target false-alarm rate.
    Threshold(ThresholdArgs),
    /// ROC profile (false-alarm rate against detection probability).
    Roc(RocArgs),
    /// Monte Carlo tables: empirical c.d.f., CFAR check or estimation-error study.
    Simulate(SimulateArgs),
    /// Oracle, degeneration, monotonicity and identity checks.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
struct DimArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
}

impl DimArgs {
    fn dims(&self) -> Result<ProblemDims, ScnError> {
        ProblemDims::new(self.m, self.n, self.p)
    }
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script next to the output file.
    #[arg(long, requires = "output")]
    plot: bool,
}

impl OutArgs {
    fn sink(&self) -> Sink {
        Sink {
            format: self.format,
            path: self.output.clone(),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 200_000)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Theorem1,
    Corollary1,
    Corollary2,
    Theorem2,
    MonteCarlo,
    Quadrature,
}

#[derive(Args, Debug)]
struct CdfArgs {
    #[command(flatten)]
    dims: DimArgs,
    /// Thresholds, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    /// Spike SNR; 0 is the null hypothesis.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    dims: DimArgs,
    /// Target false-alarm rate in (0, 1).
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct RocArgs {
    #[command(flatten)]
    dims: DimArgs,
    #[arg(long)]
    gamma: f64,
    /// Target false-alarm rates, ascending, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.001,0.002,0.005,0.01,0.02,0.05,0.1,0.2,0.3,0.5,0.7,0.9"
    )]
    alphas: Vec<f64>,
    /// Estimate P_D by simulation instead of the exact path.
    #[arg(long)]
    monte_carlo: bool,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimMode {
    /// Empirical c.d.f. and tail probability on a threshold grid.
    Cdf,
    /// False-alarm rate at a calibrated threshold under several covariances.
    Cfar,
    /// False-alarm rate of SCN and λ_max under estimation error ε.
    Robustness,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    dims: DimArgs,
    #[arg(long, value_enum, default_value_t = SimMode::Cdf)]
    mode: SimMode,
    /// Thresholds for `--mode cdf`.
    #[arg(long, value_delimiter = ',', default_value = "1.5,3,10,50")]
    t: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    /// Nominal false-alarm rate for `cfar` and `robustness`.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Estimation-error levels for `robustness`.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.3")]
    epsilons: Vec<f64>,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Reduced suite with 10^4 draws.
    #[arg(long)]
    quick: bool,
    /// Multiplies every tolerance; values below 1 tighten the suite.
    #[arg(long, default_value_t = 1.0, hide = true)]
    tolerance_scale: f64,
}

/// Command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<ScnError> for Failure {
    fn from(e: ScnError) -> Self {
        let code = if matches!(e, ScnError::Domain(_)) { 2 } else { 3 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 2,
            message: format!("output: {e}"),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn check_thresholds(t: &[f64]) -> Result<(), Failure> {
    if t.is_empty() {
        return Err(invalid("at least one threshold is required"));
    }
    if let Some(bad) = t.iter().find(|&&x| !(x > 1.0) || !x.is_finite()) {
        return Err(invalid(format!("thresholds must be finite and > 1 (got {bad})")));
    }
    Ok(())
}

fn check_alpha(a: f64) -> Result<(), Failure> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid(format!("--alpha must lie in (0, 1) (got {a})")));
    }
    Ok(())
}

fn check_gamma(g: f64) -> Result<(), Failure> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(invalid(format!("--gamma must be finite and >= 0 (got {g})")));
    }
    Ok(())
}

fn check_draws(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(invalid("--draws must be at least 1"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let r = match cli.command {
        Command::Cdf(a) => cmd_cdf(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Roc(a) => cmd_roc(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[derive(Serialize)]
struct CdfRow {
    m: usize,
    n: usize,
    p: usize,
    gamma: f64,
    t: f64,
    value: f64,
    err_estimate: f64,
    method: String,
    seed: Option<u64>,
    draws: Option<usize>,
}

fn cmd_cdf(a: CdfArgs) -> Result<u8, Failure> {
    let dims = a.dims.dims()?;
    check_thresholds(&a.t)?;
    check_gamma(a.gamma)?;
    check_draws(a.mc.draws)?;
    let budget = AccuracyBudget {
        rel_tol: a.rel_tol,
        ..AccuracyBudget::default()
    };
    budget.validate()?;
    let opts = CdfOptions {
        budget,
        mc_draws: a.mc.draws,
        seed: a.mc.seed,
        ..CdfOptions::default()
    };
    let hyp = Hypothesis::spiked(dims.m(), a.gamma)?;
    let null_only = |what: &str| -> Result<(), Failure> {
        if a.gamma > 0.0 {
            return Err(invalid(format!("{what} is a null-hypothesis path; drop --gamma")));
        }
        Ok(())
    };
    let evals: Vec<CdfEvaluation> = match a.method {
        MethodArg::Auto => a.t.iter().map(|&t| cdf(dims, &hyp, t, &opts)).collect::<Result<_, _>>()?,
        MethodArg::Theorem1 => {
            null_only("theorem1")?;
            a.t.iter().map(|&t| cdf_h0_theorem1(dims, t, &budget)).collect::<Result<_, _>>()?
        }
        MethodArg::Corollary1 => {
            null_only("corollary1")?;
            a.t.iter().map(|&t| cdf_h0_corollary1(dims, t, &budget)).collect::<Result<_, _>>()?
        }
        MethodArg::Corollary2 => {
            null_only("corollary2")?;
            if !dims.is_square() {
                return Err(invalid("corollary2 needs m = n = p"));
            }
            a.t.iter().map(|&t| cdf_h0_corollary2(dims.m(), t, &budget)).collect::<Result<_, _>>()?
        }
        MethodArg::Theorem2 => {
            if !dims.is_square() || a.gamma <= 0.0 {
                return Err(invalid("theorem2 needs m = n = p and --gamma > 0"));
            }
            a.t.iter()
                .map(|&t| cdf_h1_theorem2(dims.m(), a.gamma, t, &budget))
                .collect::<Result<_, _>>()?
        }
        MethodArg::MonteCarlo => {
            let mut grid = a.t.clone();
            grid.sort_by(f64::total_cmp);
            let e = cdf_scn_monte_carlo(dims, &hyp, &grid, a.mc.draws, a.mc.seed)?;
            a.t.iter()
                .map(|t| *e.iter().find(|x| x.t == *t).expect("grid value"))
                .collect()
        }
        MethodArg::Quadrature => a
            .t
            .iter()
            .map(|&t| cdf_scn_bruteforce_quadrature(dims, &hyp, t, &budget))
            .collect::<Result<_, _>>()?,
    };
    let rows: Vec<CdfRow> = evals
        .iter()
        .map(|e| {
            let mc = e.method == scn_core::fdist::Method::MonteCarlo;
            CdfRow {
                m: dims.m(),
                n: dims.n(),
                p: dims.p(),
                gamma: a.gamma,
                t: e.t,
                value: e.value,
                err_estimate: e.err_estimate,
                method: e.method.to_string(),
                seed: mc.then_some(a.mc.seed),
                draws: mc.then_some(a.mc.draws),
            }
        })
        .collect();
    a.out.sink().write(&rows)?;
    if a.out.plot {
        plot(&a.out, "SCN c.d.f.", "t", &["value"], true, CDF_HEADER)?;
    }
    Ok(0)
}

const CDF_HEADER: &[&str] = &["m", "n", "p", "gamma", "t", "value", "err_estimate", "method", "seed", "draws"];

fn plot(out: &OutArgs, title: &str, x: &str, y: &[&str], logx: bool, header: &[&str]) -> Result<(), Failure> {
    if out.format != Format::Csv {
        return Err(invalid("--plot needs --format csv"));
    }
    let path = out.output.as_ref().expect("clap requires --output with --plot");
    let script = write_gnuplot(
        path,
        &PlotSpec {
            title,
            x,
            y,
            logscale_x: logx,
        },
        header,
    )?;
    eprintln!("plot script: {}", script.display());
    Ok(())
}

#[derive(Serialize)]
struct ThresholdRow {
    m: usize,
    n: usize,
    p: usize,
    alpha: f64,
    mu_th: f64,
    p_f: f64,
    err_estimate: f64,
    method: String,
}

fn cmd_threshold(a: ThresholdArgs) -> Result<u8, Failure> {
    let dims = a.dims.dims()?;
    check_alpha(a.alpha)?;
    check_draws(a.mc.draws)?;
    let opts = CdfOptions {
        mc_draws: a.mc.draws,
        seed: a.mc.seed,
        ..CdfOptions::default()
    };
    let th = threshold_for_alpha(dims, a.alpha, &opts)?;
    let row = ThresholdRow {
        m: dims.m(),
        n: dims.n(),
        p: dims.p(),
        alpha: a.alpha,
        mu_th: th.mu_th,
        p_f: th.p_f.value,
        err_estimate: th.p_f.err_estimate,
        method: th.p_f.method.to_string(),
    };
    a.out.sink().write(&[row])?;
    Ok(0)
}

#[derive(Serialize)]
struct RocRow {
    m: usize,
    n: usize,
    p: usize,
    gamma: f64,
    alpha: f64,
    mu_th: f64,
    p_f: f64,
    p_d: f64,
    p_d_err: f64,
    method: String,
    seed: Option<u64>,
    draws: Option<usize>,
}

const ROC_HEADER: &[&str] = &[
    "m", "n", "p", "gamma", "alpha", "mu_th", "p_f", "p_d", "p_d_err", "method", "seed", "draws",
];

fn cmd_roc(a: RocArgs) -> Result<u8, Failure> {
    let dims = a.dims.dims()?;
    check_gamma(a.gamma)?;
    check_draws(a.mc.draws)?;
    for &x in &a.alphas {
        check_alpha(x)?;
    }
    if a.alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("--alphas must be strictly ascending"));
    }
    let use_mc = a.monte_carlo || !dims.is_square();
    if use_mc && !a.monte_carlo {
        eprintln!("note: {dims} is not square; detection probabilities are simulated");
    }
    let method = if use_mc {
        DetectionMethod::MonteCarlo {
            draws: a.mc.draws,
            seed: a.mc.seed,
        }
    } else {
        DetectionMethod::Exact
    };
    let opts = CdfOptions {
        mc_draws: a.mc.draws,
        seed: a.mc.seed,
        ..CdfOptions::default()
    };
    let points = roc_profile(dims, a.gamma, &a.alphas, method, &opts)?;
    let rows: Vec<RocRow> = points
        .iter()
        .map(|pt| {
            let m = pt.p_d_method.expect("detection method");
            let mc = m == scn_core::fdist::Method::MonteCarlo;
            RocRow {
                m: dims.m(),
                n: dims.n(),
                p: dims.p(),
                gamma: a.gamma,
                alpha: pt.alpha,
                mu_th: pt.mu_th,
                p_f: pt.p_f,
                p_d: pt.p_d.unwrap_or(f64::NAN),
                p_d_err: pt.p_d_err.unwrap_or(f64::NAN),
                method: m.to_string(),
                seed: mc.then_some(a.mc.seed),
                draws: mc.then_some(a.mc.draws),
            }
        })
        .collect();
    a.out.sink().write(&rows)?;
    if a.out.plot {
        plot(&a.out, "ROC", "p_f", &["p_d"], true, ROC_HEADER)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimCdfRow {
    m: usize,
    n: usize,
    p: usize,
    gamma: f64,
    t: f64,
    cdf: f64,
    tail: f64,
    stderr: f64,
    method: String,
    seed: u64,
    draws: usize,
}

const SIM_CDF_HEADER: &[&str] = &[
    "m", "n", "p", "gamma", "t", "cdf", "tail", "stderr", "method", "seed", "draws",
];

#[derive(Serialize)]
struct CfarRow {
    m: usize,
    n: usize,
    p: usize,
    covariance: String,
    mu_th: f64,
    p_f: f64,
    stderr: f64,
    exact_p_f: f64,
    exact_method: String,
    seed: u64,
    draws: usize,
}

#[derive(Serialize)]
struct RobustnessRow {
    m: usize,
    n: usize,
    p: usize,
    epsilon: f64,
    statistic: String,
    alpha: f64,
    threshold: f64,
    p_f: f64,
    stderr: f64,
    seed: u64,
    draws: usize,
}

const ROBUSTNESS_HEADER: &[&str] = &[
    "m", "n", "p", "epsilon", "statistic", "alpha", "threshold", "p_f", "stderr", "seed", "draws",
];

fn cmd_simulate(a: SimulateArgs) -> Result<u8, Failure> {
    let dims = a.dims.dims()?;
    check_draws(a.mc.draws)?;
    check_gamma(a.gamma)?;
    let (m, n, p) = (dims.m(), dims.n(), dims.p());
    match a.mode {
        SimMode::Cdf => {
            check_thresholds(&a.t)?;
            let mut grid = a.t.clone();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let hyp = Hypothesis::spiked(m, a.gamma)?;
            let e = cdf_scn_monte_carlo(dims, &hyp, &grid, a.mc.draws, a.mc.seed)?;
            let rows: Vec<SimCdfRow> = e
                .iter()
                .map(|e| SimCdfRow {
                    m,
                    n,
                    p,
                    gamma: a.gamma,
                    t: e.t,
                    cdf: e.value,
                    tail: 1.0 - e.value,
                    stderr: e.err_estimate,
                    method: e.method.to_string(),
                    seed: a.mc.seed,
                    draws: a.mc.draws,
                })
                .collect();
            a.out.sink().write(&rows)?;
            if a.out.plot {
                plot(&a.out, "Empirical SCN c.d.f.", "t", &["cdf"], true, SIM_CDF_HEADER)?;
            }
        }
        SimMode::Cfar => {
            check_alpha(a.alpha)?;
            let opts = CdfOptions {
                mc_draws: a.mc.draws,
                seed: a.mc.seed,
                ..CdfOptions::default()
            };
            let th = threshold_for_alpha(dims, a.alpha, &opts)?;
            let (names, covs) = cfar_covariances(m, a.mc.seed)?;
            let r = cfar_experiment(dims, th.mu_th, &covs, a.mc.draws, a.mc.seed, &opts)?;
            let rows: Vec<CfarRow> = names
                .into_iter()
                .zip(&r.entries)
                .map(|(name, e)| CfarRow {
                    m,
                    n,
                    p,
                    covariance: name,
                    mu_th: r.mu_th,
                    p_f: e.p_f,
                    stderr: e.stderr,
                    exact_p_f: r.exact.value,
                    exact_method: r.exact.method.to_string(),
                    seed: a.mc.seed,
                    draws: a.mc.draws,
                })
                .collect();
            a.out.sink().write(&rows)?;
        }
        SimMode::Robustness => {
            check_alpha(a.alpha)?;
            if let Some(bad) = a.epsilons.iter().find(|&&e| !(e >= 0.0) || !e.is_finite()) {
                return Err(invalid(format!("--epsilons must be finite and >= 0 (got {bad})")));
            }
            // Calibration and evaluation use different streams.
            let cal_seed = a.mc.seed.wrapping_add(1 << 32);
            let mut rows = Vec::new();
            for statistic in [Statistic::Scn, Statistic::LambdaMax] {
                let threshold = calibrate_threshold(dims, statistic, a.alpha, a.mc.draws, cal_seed)?;
                for &epsilon in &a.epsilons {
                    let o = robustness_experiment(
                        dims,
                        RobustnessScenario { epsilon, statistic },
                        threshold,
                        a.mc.draws,
                        a.mc.seed,
                    )?;
                    rows.push(RobustnessRow {
                        m,
                        n,
                        p,
                        epsilon,
                        statistic: match statistic {
                            Statistic::Scn => "scn".into(),
                            Statistic::LambdaMax => "lambda_max".into(),
                        },
                        alpha: a.alpha,
                        threshold,
                        p_f: o.p_f,
                        stderr: o.stderr,
                        seed: a.mc.seed,
                        draws: a.mc.draws,
                    });
                }
            }
            a.out.sink().write(&rows)?;
            if a.out.plot {
                plot(&a.out, "False-alarm rate under estimation error", "epsilon", &["p_f"], false, ROBUSTNESS_HEADER)?;
            }
        }
    }
    Ok(0)
}

/// Identity, a geometric diagonal and a random ill-conditioned covariance.
fn cfar_covariances(m: usize, seed: u64) -> Result<(Vec<String>, Vec<HermitianMatrix>), ScnError> {
    let diag: Vec<f64> = (0..m).map(|i| 10f64.powi(i as i32)).collect();
    let mut rng = RngStream::new(seed, u64::MAX);
    Ok((
        vec!["identity".into(), "geometric_diagonal".into(), "random".into()],
        vec![
            HermitianMatrix::identity(m),
            HermitianMatrix::diagonal(&diag)?,
            HermitianMatrix::random_positive_definite(m, 0.01, &mut rng)?,
        ],
    ))
}

fn cmd_validate(a: ValidateArgs) -> Result<u8, Failure> {
    if !(a.tolerance_scale >= 0.0) {
        return Err(invalid("--tolerance-scale must be >= 0"));
    }
    let scale = validate::Scale {
        draws: if a.quick { 10_000 } else { 200_000 },
        tolerance: a.tolerance_scale,
    };
    let checks = validate::run(&scale);
    let mut failed = 0;
    for c in &checks {
        println!("{} {:<44} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    println!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { 0 } else { 1 })
}
