use super::trace::{tryrec, BoundKind, Recorder, StopReason};
use super::{check_start, plus_step, SolverConfig, SolverFailure, SolverResult, SolverTrace};
use crate::objectives::Objective;
use crate::vecops::{axpy, norm_sq};

/// Steepest descent with short steps. The `v` column is the best
/// strong-convexity bound `f(x_j) - ||grad f(x_j)||^2 / (2 alpha)` seen so far.
pub fn gradient_descent_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    let name = "gd";
    if let Err(error) = check_start(obj, x0, cfg) {
        return Err(SolverFailure {
            error,
            partial: SolverTrace::new(name, BoundKind::LowerBound),
        });
    }
    let alpha = obj.alpha();
    let mut rec = Recorder::new(name, BoundKind::LowerBound, alpha, cfg);
    let mut x = x0.to_vec();
    let (f0, mut g) = obj.value_and_gradient(x0);
    let mut fx = f0;
    let mut best_lower = f64::NEG_INFINITY;
    loop {
        let g_sq = norm_sq(&g);
        best_lower = best_lower.max(fx - g_sq / (2.0 * alpha));
        let (x_plus, f_plus) = tryrec!(rec, plus_step(obj, &x, &g, cfg));
        if rec.next_k() == 0 {
            rec.set_scale(f0, f_plus - best_lower);
        }
        let long = axpy(&x, -1.0 / alpha, &g);
        let gap = tryrec!(rec, rec.push(f_plus, best_lower, g_sq, &long, &x, None));
        let reason = if g_sq == 0.0 {
            Some(StopReason::GradientZero)
        } else if gap <= cfg.effective_gap_tolerance(rec.scale()) {
            Some(StopReason::GapTolerance)
        } else if rec.next_k() > cfg.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = reason {
            return Ok(rec.finish(reason, x_plus));
        }
        x = x_plus;
        (fx, g) = obj.value_and_gradient(&x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::random_quadratic;
    use crate::solvers::testing::{assert_lower_bound_trace, random_start};
    use crate::solvers::ShortStepRule;
    use crate::vecops::dist_sq;

    #[test]
    fn kappa_one_and_stationary_start() {
        let f = random_quadratic(4, 1.0, 1.0, 1).unwrap();
        let (xs, _) = f.known_minimum().unwrap();
        let out = gradient_descent_run(&f, &random_start(4, 3), &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert!(dist_sq(&out.final_iterate, xs) < 1e-28);
        let out = gradient_descent_run(&f, xs, &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.stop_reason, Some(StopReason::GradientZero));
        assert_eq!(out.final_iterate, xs.to_vec());
    }

    #[test]
    fn classical_distance_rate() {
        let f = random_quadratic(10, 1.0, 100.0, 2).unwrap();
        let (xs, _) = f.known_minimum().unwrap();
        let cfg = SolverConfig {
            max_iterations: 300,
            gap_tolerance: 1e-300,
            record_centers: true,
            short_step: ShortStepRule::Beta,
            ..SolverConfig::default()
        };
        let x0 = random_start(10, 5);
        let out = gradient_descent_run(&f, &x0, &cfg).unwrap();
        let d0 = dist_sq(&x0, xs);
        for r in &out.trace.records {
            let x = r.iterate.as_ref().unwrap();
            assert!(dist_sq(x, xs) <= (1.0 - 0.01f64).powi(r.k as i32) * d0 * (1.0 + 1e-8));
        }
        for w in out.trace.records.windows(2) {
            assert!(w[1].f_plus <= w[0].f_plus);
        }
        assert_lower_bound_trace(&out.trace);
        assert_eq!(out.trace.stop_reason, Some(StopReason::MaxIterations));
        assert_eq!(out.trace.iterations(), 300);
    }
}
