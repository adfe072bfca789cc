use super::{Dataset, Objective};
use crate::error::{Error, Result};
use crate::vecops::{dot, norm, sub};

/// `L(w) = (1/N) sum log(1 + exp(-y_i <w, x_i>)) + (alpha/2) ||w||^2`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    data: Dataset,
    alpha: f64,
    beta: f64,
}

/// Number of power-iteration steps used to estimate `lambda_max(X^T X)`.
const POWER_STEPS: usize = 50;
const BETA_INFLATION: f64 = 1.01;

pub fn logistic_loss(data: Dataset, alpha: f64) -> Result<LogisticLoss> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("logistic loss needs a nonempty dataset".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveCurvature(alpha));
    }
    let n = data.num_features.max(1);
    let lambda_max = power_iteration(&data, n);
    let beta = alpha + BETA_INFLATION * lambda_max / (4.0 * data.num_rows() as f64);
    Ok(LogisticLoss { data, alpha, beta })
}

/// Largest eigenvalue of `X^T X` from a fixed all-ones start.
fn power_iteration(data: &Dataset, n: usize) -> f64 {
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..POWER_STEPS {
        let mut w = vec![0.0; n];
        for row in &data.rows {
            let xv = row.dot(&v);
            for &(i, x) in &row.features {
                w[i - 1] += x * xv;
            }
        }
        lambda = norm(&w);
        if lambda == 0.0 {
            return 0.0;
        }
        v = w.iter().map(|x| x / lambda).collect();
    }
    lambda
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-z})`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticLoss {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn margins(&self, w: &[f64]) -> Vec<f64> {
        self.data.rows.iter().map(|r| r.label * r.dot(w)).collect()
    }
}

impl Objective for LogisticLoss {
    fn dimension(&self) -> usize {
        self.data.num_features
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn value(&self, w: &[f64]) -> f64 {
        let n = self.data.num_rows() as f64;
        let loss: f64 = self.margins(w).iter().map(|m| softplus(-m)).sum();
        loss / n + 0.5 * self.alpha * dot(w, w)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.value_and_gradient(w).1
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.data.num_rows() as f64;
        let mut g: Vec<f64> = w.iter().map(|wi| self.alpha * wi).collect();
        let mut loss = 0.0;
        for row in &self.data.rows {
            let m = row.label * row.dot(w);
            loss += softplus(-m);
            let coef = -row.label * sigmoid(-m) / n;
            for &(i, x) in &row.features {
                g[i - 1] += coef * x;
            }
        }
        (loss / n + 0.5 * self.alpha * dot(w, w), g)
    }

    fn line_restriction<'a>(&'a self, a: &[f64], b: &[f64]) -> Option<Box<dyn Fn(f64) -> f64 + 'a>> {
        let d = sub(b, a);
        let ma = self.margins(a);
        let md = self.margins(&d);
        let (aa, ad, dd) = (dot(a, a), dot(a, &d), dot(&d, &d));
        let n = self.data.num_rows() as f64;
        let alpha = self.alpha;
        Some(Box::new(move |r: f64| {
            let loss: f64 = ma.iter().zip(&md).map(|(x, y)| softplus(-(x + r * y))).sum();
            loss / n + 0.5 * alpha * (aa + 2.0 * r * ad + r * r * dd)
        }))
    }

    fn describe(&self) -> String {
        format!(
            "logistic(N={}, n={}, alpha={})",
            self.data.num_rows(),
            self.data.num_features,
            self.alpha
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::synthetic_dataset;
    use crate::objectives::testing::{check_sandwich, max_fd_error};

    #[test]
    fn value_and_gradient_at_zero() {
        let data = synthetic_dataset(20, 5, 0.5, 7);
        let nrows = data.num_rows() as f64;
        let mut expected = vec![0.0; 5];
        for r in &data.rows {
            for &(i, x) in &r.features {
                expected[i - 1] -= r.label * x / (2.0 * nrows);
            }
        }
        let f = logistic_loss(data, 0.1).unwrap();
        assert!((f.value(&[0.0; 5]) - 2f64.ln()).abs() < 1e-15);
        let g = f.gradient(&[0.0; 5]);
        for (a, b) in g.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = logistic_loss(synthetic_dataset(20, 5, 0.6, 3), 0.01).unwrap();
        assert!(max_fd_error(&f, 50, 2.0, 9) < 1e-6);
    }

    #[test]
    fn smoothness_estimate_bounds_models() {
        let f = logistic_loss(synthetic_dataset(40, 8, 0.4, 5), 0.05).unwrap();
        check_sandwich(&f, 200, 3.0, 6);
    }

    #[test]
    fn stable_at_large_margins() {
        assert_eq!(softplus(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
        assert!((sigmoid(-800.0)).abs() < 1e-300);
        let f = logistic_loss(synthetic_dataset(10, 3, 1.0, 1), 1e-4).unwrap();
        assert!(f.value(&[1e6, -1e6, 1e6]).is_finite());
    }

    #[test]
    fn line_restriction_matches_value() {
        let f = logistic_loss(synthetic_dataset(30, 6, 0.5, 2), 0.01).unwrap();
        let a = vec![0.3, -0.1, 0.0, 1.0, 2.0, -1.0];
        let b = vec![-1.0, 0.5, 0.5, 0.0, 0.0, 1.0];
        let phi = f.line_restriction(&a, &b).unwrap();
        for r in [0.0, 0.3, 1.0, 1.7] {
            let p = crate::vecops::lerp(&a, &b, r);
            assert!((phi(r) - f.value(&p)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(logistic_loss(Dataset::default(), 1.0).is_err());
        assert!(logistic_loss(synthetic_dataset(5, 2, 1.0, 1), 0.0).is_err());
    }
}
