//! Complex Gaussian and Wishart sampling, and F-matrix eigenvalues.
//!
//! Every sampler takes an explicit [`RngStream`]. Streams are ChaCha
//! generators addressed by `(seed, stream id)`, so a batch can be cut into
//! chunks that are drawn in any order and still merge to the same result.

mod batch;

pub use batch::{map_draws, scn_draws, DEFAULT_CHUNK};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Result, ScnError};

/// Sensor dimension `m` and the two sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemDims {
    m: usize,
    n: usize,
    p: usize,
}

impl ProblemDims {
    /// `n` noise-only samples and `p` signal-plus-noise samples, both `>= m`.
    pub fn new(m: usize, n: usize, p: usize) -> Result<Self> {
        if m == 0 {
            return Err(ScnError::domain("m must be at least 1"));
        }
        if n < m || p < m {
            return Err(ScnError::domain(format!(
                "need n >= m and p >= m (m={m}, n={n}, p={p})"
            )));
        }
        Ok(ProblemDims { m, n, p })
    }

    /// `m = n = p`.
    pub fn square(m: usize) -> Result<Self> {
        Self::new(m, m, m)
    }

    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.p
    }
    /// `n - m`.
    pub fn alpha(&self) -> usize {
        self.n - self.m
    }
    /// `p - m`.
    pub fn beta(&self) -> usize {
        self.p - self.m
    }
    /// `(m + α)(m + β) = n p`.
    pub fn tau(&self) -> usize {
        self.n * self.p
    }
    /// `m (β + m) = m p`.
    pub fn nu(&self) -> usize {
        self.m * self.p
    }
    /// `m² - m + 1`.
    pub fn m_tilde(&self) -> usize {
        self.m * self.m - self.m + 1
    }
    pub fn is_square(&self) -> bool {
        self.m == self.n && self.m == self.p
    }
}

impl std::fmt::Display for ProblemDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(m={}, n={}, p={})", self.m, self.n, self.p)
    }
}

/// Rank-one spike `I + γ v v†` of the alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeParams {
    gamma: f64,
    v: DVector<Complex64>,
}

impl SpikeParams {
    pub fn new(gamma: f64, v: DVector<Complex64>) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(ScnError::domain(format!("SNR must be finite and >= 0, got {gamma}")));
        }
        let norm = v.norm();
        if v.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(ScnError::domain(format!("spike direction must have unit norm, got {norm}")));
        }
        Ok(SpikeParams { gamma, v })
    }

    /// Spike along the first basis vector.
    pub fn along_first_axis(m: usize, gamma: f64) -> Result<Self> {
        if m == 0 {
            return Err(ScnError::domain("m must be at least 1"));
        }
        let mut v = DVector::zeros(m);
        v[0] = Complex64::new(1.0, 0.0);
        Self::new(gamma, v)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn direction(&self) -> &DVector<Complex64> {
        &self.v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    H0,
    H1(SpikeParams),
}

impl Hypothesis {
    /// `H1` along `e₁`, or `H0` when `γ = 0`.
    pub fn spiked(m: usize, gamma: f64) -> Result<Self> {
        if gamma == 0.0 {
            Ok(Hypothesis::H0)
        } else {
            SpikeParams::along_first_axis(m, gamma).map(Hypothesis::H1)
        }
    }
}

/// Hermitian matrix; positive definiteness is checked where it is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    const TOL: f64 = 1e-12;

    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(ScnError::domain("Hermitian matrix must be square and non-empty"));
        }
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..a.nrows() {
            for j in 0..=i {
                if (a[(i, j)] - a[(j, i)].conj()).norm() > Self::TOL * scale {
                    return Err(ScnError::domain(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(HermitianMatrix(a))
    }

    pub fn identity(m: usize) -> Self {
        HermitianMatrix(DMatrix::identity(m, m))
    }

    /// Real diagonal matrix.
    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&v))
    }

    /// `B B† + shift·I` for a seeded random complex `B`; positive definite
    /// whenever `shift > 0`.
    pub fn random_positive_definite(m: usize, shift: f64, rng: &mut RngStream) -> Result<Self> {
        let b = sample_complex_gaussian_matrix(m, m, rng);
        let mut a = &b * b.adjoint();
        for i in 0..m {
            a[(i, i)] += Complex64::new(shift, 0.0);
        }
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Lower Cholesky factor `L` with `L L† = self`.
    pub fn cholesky_factor(&self) -> Result<DMatrix<Complex64>> {
        cholesky_lower(self.0.clone())
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant().re
    }
}

/// Ordered eigenvalues of one F-matrix draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMatrixSample {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub scn: f64,
    pub lambda_max: f64,
}

impl FMatrixSample {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(ScnError::domain("no eigenvalues"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        if !(eigenvalues[0] > 0.0) || !eigenvalues.iter().all(|x| x.is_finite()) {
            return Err(ScnError::Factorization(format!(
                "F-matrix is not positive definite (smallest eigenvalue {})",
                eigenvalues[0]
            )));
        }
        let lambda_max = *eigenvalues.last().unwrap();
        Ok(FMatrixSample {
            scn: lambda_max / eigenvalues[0],
            lambda_max,
            eigenvalues,
        })
    }

    /// Every eigenvalue multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        self.map_eigenvalues(|x| x * c)
    }

    /// The draw seen through an estimation error `ε`: every eigenvalue is
    /// divided by `1 + ε`.
    pub fn perturbed(&self, epsilon: f64) -> Self {
        let d = 1.0 + epsilon;
        self.map_eigenvalues(|x| x / d)
    }

    fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Self {
        let eigenvalues: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let lambda_max = *eigenvalues.last().unwrap();
        FMatrixSample {
            scn: lambda_max / eigenvalues[0],
            lambda_max,
            eigenvalues,
        }
    }
}

/// `λ_max / λ_min`.
pub fn scn_of(sample: &FMatrixSample) -> f64 {
    sample.eigenvalues[sample.eigenvalues.len() - 1] / sample.eigenvalues[0]
}

/// One reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream(rng)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }

    fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.0.sample(StandardNormal);
        let im: f64 = self.0.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// `rows × cols` matrix of i.i.d. unit-variance circular complex normals.
pub fn sample_complex_gaussian_matrix(
    rows: usize,
    cols: usize,
    rng: &mut RngStream,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

/// `W = A X X† A†` with `X` an `m × dof` unit Gaussian and `A` the Cholesky
/// factor of `covariance`.
pub fn sample_wishart(
    dof: usize,
    covariance: &HermitianMatrix,
    rng: &mut RngStream,
) -> Result<HermitianMatrix> {
    let m = covariance.dim();
    if dof < m {
        return Err(ScnError::domain(format!("Wishart needs dof >= m (dof={dof}, m={m})")));
    }
    let a = covariance.cholesky_factor()?;
    let y = a * sample_complex_gaussian_matrix(m, dof, rng);
    Ok(HermitianMatrix(hermitian_gram(&y)))
}

/// The complex Cholesky routine happily takes `sqrt(-1) = i`, so the pivots
/// are checked to be real and positive here.
fn cholesky_lower(a: DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let l = a
        .cholesky()
        .ok_or_else(|| ScnError::Factorization("matrix is not positive definite".into()))?
        .unpack();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re {
            return Err(ScnError::Factorization(format!(
                "matrix is not positive definite (pivot {i} = {d})"
            )));
        }
    }
    Ok(l)
}

/// `Y Y†` with an exactly Hermitian result.
fn hermitian_gram(y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut g = y * y.adjoint();
    let m = g.nrows();
    for i in 0..m {
        g[(i, i)].im = 0.0;
        for j in 0..i {
            let z = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    g
}

/// Pre-factored sampler for repeated F-matrix draws.
///
/// The signal-plus-noise factor is `L_Σ (I + (√(1+γ) - 1) v v†)`, the square
/// root of `Σ^{1/2}(I + γ v v†)Σ^{1/2}` up to a unitary.
#[derive(Debug, Clone)]
pub struct FMatrixSampler {
    dims: ProblemDims,
    noise_factor: DMatrix<Complex64>,
    signal_factor: DMatrix<Complex64>,
}

impl FMatrixSampler {
    pub fn new(dims: ProblemDims, hypothesis: &Hypothesis, noise_cov: &HermitianMatrix) -> Result<Self> {
        let m = dims.m();
        if noise_cov.dim() != m {
            return Err(ScnError::domain(format!(
                "noise covariance is {0}×{0}, expected {m}×{m}",
                noise_cov.dim()
            )));
        }
        let noise_factor = noise_cov.cholesky_factor()?;
        let signal_factor = match hypothesis {
            Hypothesis::H0 => noise_factor.clone(),
            Hypothesis::H1(spike) => {
                let v = spike.direction();
                if v.len() != m {
                    return Err(ScnError::domain("spike direction has the wrong length"));
                }
                let c = (1.0 + spike.gamma()).sqrt() - 1.0;
                let root = DMatrix::identity(m, m) + v * v.adjoint() * Complex64::new(c, 0.0);
                &noise_factor * root
            }
        };
        Ok(FMatrixSampler {
            dims,
            noise_factor,
            signal_factor,
        })
    }

    pub fn dims(&self) -> ProblemDims {
        self.dims
    }

    /// Eigenvalues of `Ŝ Σ̂⁻¹` with `Ŝ = W₁/p`, `Σ̂ = W₂/n`.
    ///
    /// `Σ̂ = L L†` is factored and the eigenvalues are taken from the
    /// Hermitian `L⁻¹ Ŝ L⁻†`, formed as a Gram matrix of `L⁻¹ A X`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<FMatrixSample> {
        let (m, n, p) = (self.dims.m(), self.dims.n(), self.dims.p());
        let signal = &self.signal_factor * sample_complex_gaussian_matrix(m, p, rng);
        let noise = &self.noise_factor * sample_complex_gaussian_matrix(m, n, rng);
        let mut sigma_hat = hermitian_gram(&noise);
        sigma_hat /= Complex64::new(n as f64, 0.0);
        let l = cholesky_lower(sigma_hat)?;
        let z = l
            .solve_lower_triangular(&signal)
            .ok_or_else(|| ScnError::Factorization("singular Cholesky factor".into()))?;
        let mut psi = hermitian_gram(&z);
        psi /= Complex64::new(p as f64, 0.0);
        let eig = psi.symmetric_eigenvalues();
        FMatrixSample::from_eigenvalues(eig.iter().copied().collect())
    }
}

/// One F-matrix draw; see [`FMatrixSampler::draw`].
pub fn sample_f_eigenvalues(
    dims: ProblemDims,
    hypothesis: &Hypothesis,
    noise_cov: &HermitianMatrix,
    rng: &mut RngStream,
) -> Result<FMatrixSample> {
    FMatrixSampler::new(dims, hypothesis, noise_cov)?.draw(rng)
}
