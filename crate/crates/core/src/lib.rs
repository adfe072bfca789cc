//! First-order methods for smooth strongly convex minimization that carry a
//! certified lower bound on the optimal value.
//!
//! The central object is the [`CanonicalQuadratic`] `v + (alpha/2)||x - c||^2`.
//! Every gradient evaluation produces one such lower model; the solvers keep a
//! running average of them whose minimum `v_k` brackets the optimum together
//! with the best function value seen.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;

pub mod linesearch;
pub mod objectives;
pub mod quadratic;
pub mod simplex_qp;
pub mod solvers;

pub mod vecops;

pub use error::{Error, Result};
pub use quadratic::{
    average_two, ball_from_quadratic, evaluate, lower_model_at, min_enclosing_ball_two, optimal_average_two,
    quadratic_from_ball, AveragingWeight, Ball, CanonicalQuadratic,
};
pub use simplex_qp::{
    average_multi, brute_force_lambda, min_enclosing_ball_multi, optimal_average_multi, QuadraticBundle, SimplexWeights,
};
