use rayon::prelude::*;

use super::{FMatrixSampler, RngStream};
use crate::Result;

/// Draws per chunk; chunk `c` always uses stream `c`.
pub const DEFAULT_CHUNK: usize = 4096;

/// Runs `f` once per draw and returns the results in draw order.
///
/// Draws are cut into fixed chunks, each with its own stream, so the output
/// depends only on `(seed, draws, chunk)` and never on the thread count.
pub fn map_draws<T, F>(seed: u64, draws: usize, chunk: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let chunk = chunk.max(1);
    let chunks = draws.div_ceil(chunk);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64);
            let len = chunk.min(draws - c * chunk);
            (0..len).map(|_| f(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(draws);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// `draws` SCN values from one sampler.
pub fn scn_draws(sampler: &FMatrixSampler, seed: u64, draws: usize) -> Result<Vec<f64>> {
    map_draws(seed, draws, DEFAULT_CHUNK, |rng| sampler.draw(rng).map(|s| s.scn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrand::{HermitianMatrix, Hypothesis, ProblemDims};

    #[test]
    fn independent_of_thread_count() {
        let dims = ProblemDims::new(2, 3, 3).unwrap();
        let sampler = FMatrixSampler::new(dims, &Hypothesis::H0, &HermitianMatrix::identity(2)).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| scn_draws(&sampler, 42, 10_000).unwrap())
        };
        let one = run(1);
        assert_eq!(one.len(), 10_000);
        assert_eq!(one, run(3));
    }

    #[test]
    fn partial_last_chunk() {
        let v = map_draws(1, 10, 4, |_| Ok(1u8)).unwrap();
        assert_eq!(v.len(), 10);
        assert!(map_draws(1, 0, 4, |_| Ok(1u8)).unwrap().is_empty());
    }

    fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn whitening_invariance_under_h0() {
        let dims = ProblemDims::new(3, 4, 5).unwrap();
        let n = 10_000;
        let base = FMatrixSampler::new(dims, &Hypothesis::H0, &HermitianMatrix::identity(3)).unwrap();
        let mut reference = scn_draws(&base, 100, n).unwrap();
        // Two-sample critical value at the 1% level.
        let critical = 1.628 * (2.0 / n as f64).sqrt();
        let mut cov_rng = RngStream::new(77, 0);
        let covs = [
            HermitianMatrix::diagonal(&[1.0, 10.0, 100.0]).unwrap(),
            HermitianMatrix::random_positive_definite(3, 0.1, &mut cov_rng).unwrap(),
            HermitianMatrix::random_positive_definite(3, 1e-3, &mut cov_rng).unwrap(),
        ];
        for (k, cov) in covs.iter().enumerate() {
            let s = FMatrixSampler::new(dims, &Hypothesis::H0, cov).unwrap();
            let mut other = scn_draws(&s, 200 + k as u64, n).unwrap();
            let d = ks_statistic(&mut reference, &mut other);
            assert!(d < critical, "covariance {k}: D={d} critical={critical}");
        }
    }

    #[test]
    fn epsilon_scaling_law() {
        let dims = ProblemDims::new(4, 4, 6).unwrap();
        let s = FMatrixSampler::new(dims, &Hypothesis::H0, &HermitianMatrix::identity(4)).unwrap();
        let draws = map_draws(3, 200, 64, |rng| s.draw(rng)).unwrap();
        for d in &draws {
            for eps in [0.1, 0.3, 1.0] {
                let e = d.perturbed(eps);
                assert_eq!(e.lambda_max, d.lambda_max / (1.0 + eps));
                assert!(((e.scn - d.scn) / d.scn).abs() <= 4.0 * f64::EPSILON);
            }
            // Powers of two scale exactly.
            assert_eq!(d.scaled(0.5).scn, d.scn);
        }
    }
}
