//! Smooth strongly convex objectives and the composite (smooth + prox) form.

mod libsvm;
mod logistic;
mod prox;
mod quadratic;
mod worst;

pub use libsvm::{parse_libsvm, parse_libsvm_str, synthetic_dataset, to_libsvm_string, Dataset, Row};
pub use logistic::{logistic_loss, LogisticLoss};
pub use prox::{gradient_mapping, prox_box, prox_l1, BoxIndicator, CompositeObjective, L1Norm, ProxTerm};
pub use quadratic::{random_quadratic, DenseQuadratic};
pub use worst::{worst_function, WorstFunction};

use crate::vecops::{axpy, dot};

/// A beta-smooth, alpha-strongly convex function on R^n.
pub trait Objective: Send + Sync {
    fn dimension(&self) -> usize;

    /// Strong convexity constant.
    fn alpha(&self) -> f64;

    /// Smoothness constant (Lipschitz constant of the gradient).
    fn beta(&self) -> f64;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Parameter `r` in `[0, 1]` minimizing `f(a + r (b - a))`, when it has a
    /// closed form.
    fn exact_segment_minimizer(&self, _a: &[f64], _b: &[f64]) -> Option<f64> {
        None
    }

    /// A cheap evaluator of `r -> f(a + r (b - a))`, if the objective has one.
    fn line_restriction<'a>(&'a self, _a: &[f64], _b: &[f64]) -> Option<Box<dyn Fn(f64) -> f64 + 'a>> {
        None
    }

    /// Minimizer and minimum value, when known.
    fn known_minimum(&self) -> Option<(&[f64], f64)> {
        None
    }

    fn describe(&self) -> String;

    fn condition_number(&self) -> f64 {
        self.beta() / self.alpha()
    }
}

/// Short step `x - grad f(x) / beta`.
pub fn short_step(obj: &dyn Objective, x: &[f64]) -> Vec<f64> {
    axpy(x, -1.0 / obj.beta(), &obj.gradient(x))
}

/// Long step `x - grad f(x) / alpha`.
pub fn long_step(obj: &dyn Objective, x: &[f64]) -> Vec<f64> {
    axpy(x, -1.0 / obj.alpha(), &obj.gradient(x))
}

/// Closed-form segment minimizer of a quadratic given its Hessian action.
pub(crate) fn quadratic_segment_minimizer(grad_a: &[f64], d: &[f64], hd: &[f64]) -> f64 {
    let curv = dot(d, hd);
    if curv <= 0.0 {
        return if dot(grad_a, d) < 0.0 { 1.0 } else { 0.0 };
    }
    (-dot(grad_a, d) / curv).clamp(0.0, 1.0)
}
