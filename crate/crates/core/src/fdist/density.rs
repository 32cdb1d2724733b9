use crate::matrand::ProblemDims;
use crate::specfun::{ln_factorial, SignedLog, SignedLogSum};
use crate::{Result, ScnError};

/// `ln K_{m,n,p} = Σ_j ln Γ(n+p-j+1) - ln Γ(m-j+1) - ln Γ(n-j+1) - ln Γ(p-j+1)`.
///
/// The powers of π in the two complex multivariate gamma functions cancel.
pub fn ln_k_mnp(dims: ProblemDims) -> f64 {
    let (m, n, p) = (dims.m(), dims.n(), dims.p());
    (1..=m)
        .map(|j| {
            ln_factorial((n + p - j) as u64)
                - ln_factorial((m - j) as u64)
                - ln_factorial((n - j) as u64)
                - ln_factorial((p - j) as u64)
        })
        .sum()
}

/// `ln K̃ = ln K + ln (m-1)! + ln (p+n-m)! - ln (p+n-1)!`, the constant of the
/// spiked density.
pub fn ln_k_tilde(dims: ProblemDims) -> f64 {
    let (m, n, p) = (dims.m(), dims.n(), dims.p());
    ln_k_mnp(dims) + ln_factorial((m - 1) as u64) + ln_factorial((p + n - m) as u64)
        - ln_factorial((p + n - 1) as u64)
}

fn check_lambdas(dims: ProblemDims, lambdas: &[f64]) -> Result<()> {
    if lambdas.len() != dims.m() {
        return Err(ScnError::domain(format!(
            "expected {} eigenvalues, got {}",
            dims.m(),
            lambdas.len()
        )));
    }
    if !lambdas.iter().all(|&x| x > 0.0 && x.is_finite()) {
        return Err(ScnError::domain("eigenvalues must be positive and finite"));
    }
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(ScnError::domain("eigenvalues must be in ascending order"));
    }
    Ok(())
}

/// `ln Δ²` over the indices not equal to `skip`.
fn ln_vandermonde_sq(lambdas: &[f64], skip: Option<usize>) -> f64 {
    let mut acc = 0.0;
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            if Some(i) != skip && Some(j) != skip {
                acc += 2.0 * (lambdas[j] - lambdas[i]).abs().ln();
            }
        }
    }
    acc
}

/// Joint density of the ordered eigenvalues of `W₁W₂⁻¹` under the null:
/// `K Π λ^{p-m}/(1+λ)^{p+n} Δ²(λ)`.
pub fn joint_density_h0(dims: ProblemDims, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(dims, lambdas)?;
    if lambdas.windows(2).any(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    let (m, n, p) = (dims.m() as f64, dims.n() as f64, dims.p() as f64);
    let mut ln_f = ln_k_mnp(dims) + ln_vandermonde_sq(lambdas, None);
    for &x in lambdas {
        ln_f += (p - m) * x.ln() - (p + n) * x.ln_1p();
    }
    Ok(ln_f.exp())
}

/// Joint density under a rank-one spike of SNR `γ > 0`.
///
/// The `k`-sum has simple poles at coincident eigenvalues that the Vandermonde
/// factor removes; each term is written as `Π_{j≠k}(λ_k-λ_j) Δ²_{-k}` so no
/// division by a difference ever happens.
pub fn joint_density_h1(dims: ProblemDims, gamma: f64, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(dims, lambdas)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ScnError::domain(format!("SNR must be positive, got {gamma}")));
    }
    let (mu, nu, pu) = (dims.m(), dims.n(), dims.p());
    let (m, n, p) = (mu as f64, nu as f64, pu as f64);
    if lambdas.windows(2).any(|w| w[0] == w[1]) && mu > 1 {
        return Ok(0.0);
    }
    let mut ln_pre = ln_k_tilde(dims) - (m - 1.0) * gamma.ln() - (p + 1.0 - m) * gamma.ln_1p();
    for &x in lambdas {
        ln_pre += (p - m) * x.ln() - (p + n - 1.0) * x.ln_1p();
    }
    let mut sum = SignedLogSum::new();
    for k in 0..mu {
        let lk = lambdas[k];
        let mut term = SignedLog::positive_ln(
            (p + n - 1.0) * lk.ln_1p() - (p + n + 1.0 - m) * (lk / (gamma + 1.0)).ln_1p()
                + ln_vandermonde_sq(lambdas, Some(k)),
        );
        for (j, &lj) in lambdas.iter().enumerate() {
            if j != k {
                term = term * SignedLog::from_f64(lk - lj);
            }
        }
        sum.push(term);
    }
    let (total, _) = sum.total();
    Ok((total * SignedLog::positive_ln(ln_pre)).to_f64().max(0.0))
}
