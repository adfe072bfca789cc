use super::{quadratic_segment_minimizer, Objective};
use crate::error::{Error, Result};
use crate::vecops::{dot, sub};

/// `f(x) = (B/2)((1 - x_1)^2 + sum (x_i - x_{i+1})^2 + x_n^2) + ||x||^2 / 2`.
///
/// The Hessian is `B T + I` with `T` the second-difference matrix, whose
/// spectrum lies in `[0, 4]`; hence `alpha = 1` and `beta = 4B + 1`.
#[derive(Debug, Clone)]
pub struct WorstFunction {
    b: f64,
    n: usize,
    minimizer: Vec<f64>,
    min_value: f64,
}

pub fn worst_function(b: f64, n: usize) -> Result<WorstFunction> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("worst function needs n >= 2, got {n}")));
    }
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("worst function needs B > 0, got {b}")));
    }
    let mut f = WorstFunction {
        b,
        n,
        minimizer: Vec::new(),
        min_value: 0.0,
    };
    f.minimizer = f.solve_minimizer();
    f.min_value = f.value(&f.minimizer);
    Ok(f)
}

impl WorstFunction {
    pub fn b(&self) -> f64 {
        self.b
    }

    fn hessian_times(&self, d: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let left = if i > 0 { d[i - 1] } else { 0.0 };
                let right = if i + 1 < n { d[i + 1] } else { 0.0 };
                self.b * (2.0 * d[i] - left - right) + d[i]
            })
            .collect()
    }

    /// Thomas algorithm for `(B T + I) x = B e_1`.
    fn solve_minimizer(&self) -> Vec<f64> {
        let n = self.n;
        let diag = 2.0 * self.b + 1.0;
        let off = -self.b;
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        c_prime[0] = off / diag;
        d_prime[0] = self.b / diag;
        for i in 1..n {
            let m = diag - off * c_prime[i - 1];
            c_prime[i] = off / m;
            d_prime[i] = (0.0 - off * d_prime[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d_prime[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d_prime[i] - c_prime[i] * x[i + 1];
        }
        x
    }
}

impl Objective for WorstFunction {
    fn dimension(&self) -> usize {
        self.n
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn beta(&self) -> f64 {
        4.0 * self.b + 1.0
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut s = (1.0 - x[0]).powi(2) + x[n - 1].powi(2);
        for i in 0..n - 1 {
            s += (x[i] - x[i + 1]).powi(2);
        }
        0.5 * self.b * s + 0.5 * dot(x, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian_times(x);
        g[0] -= self.b;
        g
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
        format!("worst(B={}, n={})", self.b, self.n)
    }
}
