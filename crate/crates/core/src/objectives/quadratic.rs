use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{quadratic_segment_minimizer, Objective};
use crate::error::{Error, Result};
use crate::vecops::{dot, sub};

/// `f(x) = (x - x*)^T H (x - x*) / 2 + f0` with a dense symmetric `H`.
#[derive(Debug, Clone)]
pub struct DenseQuadratic {
    hessian: Vec<Vec<f64>>,
    minimizer: Vec<f64>,
    min_value: f64,
    alpha: f64,
    beta: f64,
}

impl DenseQuadratic {
    /// Caller guarantees `H` symmetric with spectrum inside `[alpha, beta]`.
    pub fn new(hessian: Vec<Vec<f64>>, minimizer: Vec<f64>, min_value: f64, alpha: f64, beta: f64) -> Result<Self> {
        let n = minimizer.len();
        if hessian.len() != n || hessian.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: hessian.len(),
            });
        }
        if !(alpha > 0.0 && alpha <= beta) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < alpha <= beta, got {alpha}, {beta}"
            )));
        }
        Ok(Self {
            hessian,
            minimizer,
            min_value,
            alpha,
            beta,
        })
    }

    pub fn hessian(&self) -> &[Vec<f64>] {
        &self.hessian
    }

    fn hessian_times(&self, d: &[f64]) -> Vec<f64> {
        self.hessian.iter().map(|row| dot(row, d)).collect()
    }
}

/// A quadratic with spectrum spread over `[alpha, beta]`, both ends attained.
///
/// Eigenvectors come from the QR factorization of a Gaussian matrix; the
/// interior eigenvalues are log-uniform between the endpoints.
pub fn random_quadratic(n: usize, alpha: f64, beta: f64, seed: u64) -> Result<DenseQuadratic> {
    if !(alpha > 0.0) || alpha > beta {
        return Err(Error::InvalidParameter(format!(
            "need 0 < alpha <= beta, got {alpha}, {beta}"
        )));
    }
    if n == 0 || (n == 1 && alpha != beta) {
        return Err(Error::InvalidParameter(format!(
            "dimension {n} cannot attain both spectral endpoints"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let minimizer: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let min_value: f64 = rng.sample(StandardNormal);

    let hessian = if alpha == beta {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { alpha } else { 0.0 }).collect())
            .collect()
    } else {
        let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = gauss.qr().q();
        let (la, lb) = (alpha.ln(), beta.ln());
        let eig: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => alpha,
                i if i == n - 1 => beta,
                _ => (la + (lb - la) * rng.random::<f64>()).exp(),
            })
            .collect();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| q[(i, k)] * eig[k] * q[(j, k)]).sum();
                h[i][j] = s;
                h[j][i] = s;
            }
        }
        h
    };
    DenseQuadratic::new(hessian, minimizer, min_value, alpha, beta)
}

impl Objective for DenseQuadratic {
    fn dimension(&self) -> usize {
        self.minimizer.len()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = sub(x, &self.minimizer);
        0.5 * dot(&d, &self.hessian_times(&d)) + self.min_value
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.hessian_times(&sub(x, &self.minimizer))
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = sub(x, &self.minimizer);
        let g = self.hessian_times(&d);
        (0.5 * dot(&d, &g) + self.min_value, g)
    }

    fn exact_segment_minimizer(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        let d = sub(b, a);
        Some(quadratic_segment_minimizer(
            &self.gradient(a),
            &d,
            &self.hessian_times(&d),
        ))
    }

    fn known_minimum(&self) -> Option<(&[f64], f64)> {
        Some((&self.minimizer, self.min_value))
    }

    fn describe(&self) -> String {
        format!(
            "quadratic(n={}, alpha={}, beta={})",
            self.minimizer.len(),
            self.alpha,
            self.beta
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::testing::{check_sandwich, max_fd_error};
    use nalgebra::SymmetricEigen;

    #[test]
    fn identity_when_well_conditioned() {
        let f = random_quadratic(4, 1.0, 1.0, 9).unwrap();
        for (i, row) in f.hessian().iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                assert_eq!(*h, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn minimum_is_consistent() {
        for seed in 0..5 {
            let f = random_quadratic(7, 0.5, 30.0, seed).unwrap();
            let (x, fstar) = f.known_minimum().unwrap();
            assert_eq!(f.value(x), fstar);
            assert!(f.gradient(x).iter().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn spectrum_matches_eigendecomposition() {
        for (n, a, b) in [(2, 1.0, 4.0), (20, 1.0, 100.0), (50, 0.1, 7.0)] {
            let f = random_quadratic(n, a, b, 42).unwrap();
            let h = DMatrix::from_fn(n, n, |i, j| f.hessian()[i][j]);
            let eig = SymmetricEigen::new(h).eigenvalues;
            let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((lo - a).abs() < 1e-10 * b, "min eigenvalue {lo}");
            assert!((hi - b).abs() < 1e-10 * b, "max eigenvalue {hi}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = random_quadratic(5, 1.0, 10.0, 3).unwrap();
        let b = random_quadratic(5, 1.0, 10.0, 3).unwrap();
        assert_eq!(a.hessian(), b.hessian());
        assert!(random_quadratic(5, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn gradient_and_models() {
        let f = random_quadratic(10, 1.0, 25.0, 1).unwrap();
        assert!(max_fd_error(&f, 50, 3.0, 4) < 1e-5);
        check_sandwich(&f, 200, 3.0, 5);
    }
}
