use serde::{Deserialize, Serialize};

use super::trace::{tryrec, BoundKind, Recorder, StopReason};
use super::{check_start, SolverConfig, SolverFailure, SolverResult, SolverTrace};
use crate::error::Error;
use crate::linesearch::segment_search;
use crate::objectives::Objective;
use crate::quadratic::CanonicalQuadratic;
use crate::vecops::{axpy, dist_sq, lerp, norm_sq};

/// State after one accelerated step; `quadratic` has curvature `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NesterovState {
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
    pub quadratic: CanonicalQuadratic,
}

/// Positive root `lambda` of `beta l^2 + (gamma_prev - alpha) l - gamma_prev = 0`,
/// the new curvature `gamma = (1 - lambda) gamma_prev + lambda alpha` and
/// `theta = gamma / (gamma_prev + lambda alpha)`.
pub fn nesterov_lambda_step(beta: f64, gamma_prev: f64, alpha: f64) -> (f64, f64, f64) {
    let b = gamma_prev - alpha;
    let disc = (b * b + 4.0 * beta * gamma_prev).sqrt();
    let lambda = if b >= 0.0 {
        2.0 * gamma_prev / (b + disc)
    } else {
        (disc - b) / (2.0 * beta)
    };
    let lambda = lambda.min(1.0);
    let gamma = (1.0 - lambda) * gamma_prev + lambda * alpha;
    let theta = gamma / (gamma_prev + lambda * alpha);
    (lambda, gamma, theta)
}

/// Accelerated scheme from `(x0, c0)` with initial curvature `gamma0 >= alpha`.
/// The trace's `v` column is the estimate-sequence minimum, which stays above
/// `f(x_k^+)`; the stopping test uses the classical gap.
pub fn nesterov_run(obj: &dyn Objective, x0: &[f64], c0: &[f64], gamma0: f64, cfg: &SolverConfig) -> SolverResult {
    run(obj, x0, c0, gamma0, cfg, false, "nesterov")
}

/// The accelerated scheme with `x_k` chosen by segment minimization between
/// `c_{k-1}` and `x_{k-1}^+`; starts from `c0 = x0^{++}` and `gamma0 = alpha`.
pub fn nesterov_exact_ls_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    let c0 = crate::objectives::long_step(obj, x0);
    run(obj, x0, &c0, obj.alpha(), cfg, true, "nesterov-ls")
}

fn run(
    obj: &dyn Objective,
    x0: &[f64],
    c0: &[f64],
    gamma0: f64,
    cfg: &SolverConfig,
    exact: bool,
    name: &str,
) -> SolverResult {
    let (alpha, beta) = (obj.alpha(), obj.beta());
    let fail = |error| {
        Err(SolverFailure {
            error,
            partial: SolverTrace::new(name, BoundKind::EstimateSequence),
        })
    };
    if let Err(e) = check_start(obj, x0, cfg).and_then(|_| crate::error::check_dim(x0.len(), c0.len())) {
        return fail(e);
    }
    if !(gamma0 >= alpha * (1.0 - 1e-12)) {
        return fail(Error::InvalidParameter(format!("gamma0 {gamma0} below alpha {alpha}")));
    }
    let mut rec = Recorder::new(name, BoundKind::EstimateSequence, alpha, cfg);

    let (f0, g0) = obj.value_and_gradient(x0);
    let mut x_plus = axpy(x0, -1.0 / beta, &g0);
    let mut f_plus = obj.value(&x_plus);
    let g0_sq = norm_sq(&g0);
    let mut q = tryrec!(
        rec,
        CanonicalQuadratic::new(f0 - g0_sq / (2.0 * beta), c0.to_vec(), gamma0)
    );
    rec.set_scale(f0, f_plus - q.min_value);
    tryrec!(rec, rec.push(f_plus, q.min_value, g0_sq, &q.center, x0, None));
    let mut states = Vec::new();
    let done = |rec: Recorder, reason, x_plus: Vec<f64>, q, states| {
        let mut out = rec.finish(reason, x_plus);
        out.final_quadratic = Some(q);
        out.nesterov_states = states;
        Ok(out)
    };
    if g0_sq == 0.0 {
        return done(rec, StopReason::GradientZero, x_plus, q, states);
    }
    if g0_sq / (2.0 * alpha) <= cfg.effective_gap_tolerance(rec.scale()) {
        return done(rec, StopReason::GapTolerance, x_plus, q, states);
    }

    for _ in 0..cfg.max_iterations {
        let gamma_prev = q.curvature;
        let (lambda, gamma, theta) = nesterov_lambda_step(beta, gamma_prev, alpha);
        let x = if exact {
            tryrec!(
                rec,
                segment_search(
                    obj,
                    &q.center,
                    &x_plus,
                    cfg.line_search_tol,
                    cfg.closed_form_line_search
                )
            )
            .point
        } else {
            lerp(&q.center, &x_plus, theta)
        };
        let (fx, g) = obj.value_and_gradient(&x);
        let g_sq = norm_sq(&g);
        let x_pp = axpy(&x, -1.0 / alpha, &g);
        let v_a = fx - g_sq / (2.0 * alpha);
        let w_prev = (1.0 - lambda) * gamma_prev;
        let w_new = lambda * alpha;
        let center: Vec<f64> = q
            .center
            .iter()
            .zip(&x_pp)
            .map(|(c, p)| (w_prev * c + w_new * p) / gamma)
            .collect();
        let min_value =
            (1.0 - lambda) * q.min_value + lambda * v_a + w_prev * w_new / (2.0 * gamma) * dist_sq(&q.center, &x_pp);
        q = tryrec!(rec, CanonicalQuadratic::new(min_value, center, gamma));
        x_plus = axpy(&x, -1.0 / beta, &g);
        f_plus = obj.value(&x_plus);
        tryrec!(rec, rec.push(f_plus, q.min_value, g_sq, &q.center, &x, None));
        states.push(NesterovState {
            gamma,
            lambda,
            theta,
            quadratic: q.clone(),
        });
        if g_sq == 0.0 {
            return done(rec, StopReason::GradientZero, x_plus, q, states);
        }
        if g_sq / (2.0 * alpha) <= cfg.effective_gap_tolerance(rec.scale()) {
            return done(rec, StopReason::GapTolerance, x_plus, q, states);
        }
    }
    let _ = f_plus;
    done(rec, StopReason::MaxIterations, x_plus, q, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{random_quadratic, worst_function};
    use crate::solvers::testing::random_start;

    #[test]
    fn lambda_step_examples() {
        let (l, g, t) = nesterov_lambda_step(4.0, 1.0, 1.0);
        assert_eq!((l, g), (0.5, 1.0));
        assert!((t - 2.0 / 3.0).abs() < 1e-15);
        let (l, _, _) = nesterov_lambda_step(3.0, 3.0, 3.0);
        assert_eq!(l, 1.0);
        let (l, g, t) = nesterov_lambda_step(4.0, 4.0, 1.0);
        let expected = (73f64.sqrt() - 3.0) / 8.0;
        assert!((l - expected).abs() < 1e-15);
        assert!((g - (4.0 - 3.0 * expected)).abs() < 1e-14);
        assert!((t - g / (4.0 + l)).abs() < 1e-15);
        // lambda satisfies its defining equation
        for (beta, gp, alpha) in [(10.0, 2.0, 1.0), (1e4, 0.5, 0.1), (2.0, 7.0, 1.5)] {
            let (l, g, _) = nesterov_lambda_step(beta, gp, alpha);
            assert!((beta * l * l - g).abs() < 1e-12 * (1.0 + g));
            assert!(l > 0.0 && l <= 1.0);
        }
    }

    fn cfg(iters: usize) -> SolverConfig {
        SolverConfig {
            max_iterations: iters,
            gap_tolerance: 1e-300,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn constant_parameters_with_gamma0_alpha() {
        let f = worst_function(100.0, 50).unwrap();
        let x0 = vec![0.0; 50];
        let c0 = crate::objectives::long_step(&f, &x0);
        let out = nesterov_run(&f, &x0, &c0, 1.0, &cfg(300)).unwrap();
        let kappa = f.condition_number();
        for s in &out.nesterov_states {
            assert!((s.lambda - 1.0 / kappa.sqrt()).abs() < 1e-12);
            assert!((s.gamma - 1.0).abs() < 1e-12);
            assert!((s.theta - kappa.sqrt() / (1.0 + kappa.sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_sequence_invariant_and_rate() {
        let f = worst_function(100.0, 50).unwrap();
        let (xs, fstar) = f.known_minimum().unwrap();
        let x0 = vec![0.0; 50];
        let c0 = crate::objectives::long_step(&f, &x0);
        for out in [
            nesterov_run(&f, &x0, &c0, 1.0, &cfg(300)).unwrap(),
            nesterov_exact_ls_run(&f, &x0, &cfg(300)).unwrap(),
        ] {
            let t = &out.trace;
            assert_eq!(t.bound, BoundKind::EstimateSequence);
            for r in &t.records {
                assert!(r.f_plus <= r.v + 1e-10 * t.scale, "{} k={}", t.solver, r.k);
            }
            let q0 = CanonicalQuadratic::new(t.records[0].v, c0.clone(), 1.0).unwrap();
            let q0_at = q0.evaluate(xs).unwrap();
            let mut big_lambda = 1.0;
            for (r, s) in t.records[1..].iter().zip(&out.nesterov_states) {
                big_lambda *= 1.0 - s.lambda;
                assert!(r.f_plus - fstar <= big_lambda * (q0_at - fstar) + 1e-8 * t.scale);
            }
        }
    }

    #[test]
    fn kappa_one_hits_minimizer() {
        let f = random_quadratic(3, 1.0, 1.0, 2).unwrap();
        let (xs, _) = f.known_minimum().unwrap();
        let x0 = random_start(3, 1);
        let c0 = crate::objectives::long_step(&f, &x0);
        let out = nesterov_run(
            &f,
            &x0,
            &c0,
            1.0,
            &SolverConfig {
                record_centers: true,
                ..cfg(3)
            },
        )
        .unwrap();
        let x1 = out.trace.records[1].iterate.as_ref().unwrap();
        assert!(dist_sq(x1, xs) < 1e-28);
        let out = nesterov_exact_ls_run(
            &f,
            &x0,
            &SolverConfig {
                record_centers: true,
                ..cfg(3)
            },
        )
        .unwrap();
        let x1 = out.trace.records[1].iterate.as_ref().unwrap();
        assert!(dist_sq(x1, xs) < 1e-28);
    }

    #[test]
    fn general_gamma0() {
        let f = random_quadratic(8, 1.0, 50.0, 4).unwrap();
        let x0 = random_start(8, 2);
        let out = nesterov_run(&f, &x0, &x0, 7.0, &cfg(100)).unwrap();
        let mut gp = 7.0;
        for s in &out.nesterov_states {
            assert!((s.gamma - ((1.0 - s.lambda) * gp + s.lambda)).abs() < 1e-12 * gp);
            assert!((s.theta - s.gamma / (gp + s.lambda)).abs() < 1e-12);
            assert!(s.lambda >= (1.0f64 / 50.0).sqrt() - 1e-12);
            gp = s.gamma;
        }
        for r in &out.trace.records {
            assert!(r.f_plus <= r.v + 1e-10 * out.trace.scale);
        }
        assert!(nesterov_run(&f, &x0, &x0, 0.5, &cfg(10)).is_err());
    }
}
