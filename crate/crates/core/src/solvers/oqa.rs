use super::trace::{tryrec, BoundKind, Recorder, StopReason};
use super::{check_start, plus_step, SolverConfig, SolverFailure, SolverResult, SolverTrace};
use crate::linesearch::segment_search;
use crate::objectives::Objective;
use crate::quadratic::{lower_model_at, optimal_average_two};
use crate::simplex_qp::{optimal_average_multi_with_tol, QuadraticBundle, SimplexWeights};
use crate::vecops::norm_sq;

/// Optimal quadratic averaging: keeps one lower model `Q_k` and replaces it
/// each step by its best average with the new strong-convexity model.
pub fn oqa_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    run(obj, x0, cfg, None, "oqa")
}

/// Optimal averaging of `Q_{k-1}` together with the last `cfg.memory`
/// strong-convexity models.
pub fn oqa_memory_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    run(obj, x0, cfg, Some(cfg.memory), "oqa-mem")
}

fn run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig, memory: Option<usize>, name: &str) -> SolverResult {
    if let Err(error) = check_start(obj, x0, cfg) {
        return Err(SolverFailure {
            error,
            partial: SolverTrace::new(name, BoundKind::LowerBound),
        });
    }
    let alpha = obj.alpha();
    let mut rec = Recorder::new(name, BoundKind::LowerBound, alpha, cfg);

    let (f0, g0) = obj.value_and_gradient(x0);
    let mut q = tryrec!(rec, lower_model_at(f0, &g0, x0, alpha));
    let (mut x_plus, mut f_plus) = tryrec!(rec, plus_step(obj, x0, &g0, cfg));
    rec.set_scale(f0, f_plus - q.min_value);
    let g0_sq = norm_sq(&g0);
    let gap = tryrec!(rec, rec.push(f_plus, q.min_value, g0_sq, &q.center, x0, None));
    let done = |rec: Recorder, reason, x_plus: Vec<f64>, q| {
        let mut out = rec.finish(reason, x_plus);
        out.final_quadratic = Some(q);
        Ok(out)
    };
    if g0_sq == 0.0 {
        return done(rec, StopReason::GradientZero, x_plus, q);
    }
    if gap <= cfg.effective_gap_tolerance(rec.scale()) {
        return done(rec, StopReason::GapTolerance, x_plus, q);
    }

    let mut bundle = match memory {
        Some(t) => Some(tryrec!(rec, QuadraticBundle::new(obj.dimension(), alpha, t))),
        None => None,
    };
    for _ in 0..cfg.max_iterations {
        let search = tryrec!(
            rec,
            segment_search(
                obj,
                &q.center,
                &x_plus,
                cfg.line_search_tol,
                cfg.closed_form_line_search
            )
        );
        let x = search.point;
        let (fx, g) = obj.value_and_gradient(&x);
        let m = tryrec!(rec, lower_model_at(fx, &g, &x, alpha));
        q = match bundle.as_mut() {
            None => tryrec!(rec, optimal_average_two(&m, &q)).0,
            Some(b) => {
                tryrec!(rec, b.push_mut(m));
                let full = tryrec!(rec, b.with_leading(q));
                if full.len() == 2 {
                    tryrec!(rec, optimal_average_two(full.member(1), full.member(0))).0
                } else {
                    let warm = SimplexWeights::vertex(full.len(), 0);
                    tryrec!(
                        rec,
                        optimal_average_multi_with_tol(&full, Some(&warm), cfg.qp_tolerance)
                    )
                    .0
                }
            }
        };
        (x_plus, f_plus) = tryrec!(rec, plus_step(obj, &x, &g, cfg));
        let g_sq = norm_sq(&g);
        let gap = tryrec!(rec, rec.push(f_plus, q.min_value, g_sq, &q.center, &x, None));
        if g_sq == 0.0 {
            return done(rec, StopReason::GradientZero, x_plus, q);
        }
        if gap <= cfg.effective_gap_tolerance(rec.scale()) {
            return done(rec, StopReason::GapTolerance, x_plus, q);
        }
    }
    done(rec, StopReason::MaxIterations, x_plus, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{logistic_loss, random_quadratic, synthetic_dataset, worst_function};
    use crate::solvers::testing::{assert_lower_bound_trace, random_start};
    use crate::vecops::{dist_sq, norm};

    fn exact() -> SolverConfig {
        SolverConfig {
            max_iterations: 300,
            gap_tolerance: 1e-300,
            record_centers: true,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn kappa_one_terminates_at_once() {
        let f = random_quadratic(2, 1.0, 1.0, 0).unwrap();
        let (xs, fs) = f.known_minimum().unwrap();
        let x0 = vec![xs[0] + 1.0, xs[1]];
        let out = oqa_run(&f, &x0, &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        let r = &out.trace.records[0];
        assert!((r.v - fs).abs() < 1e-15 && r.gap.abs() < 1e-15);
        assert!(dist_sq(&out.final_iterate, xs) < 1e-30);
        assert_eq!(out.trace.stop_reason, Some(StopReason::GapTolerance));

        let out = oqa_run(&f, xs, &SolverConfig::default()).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert_eq!(out.trace.records[0].v, fs);
        assert_eq!(out.trace.stop_reason, Some(StopReason::GradientZero));
    }

    #[test]
    fn worst_function_rate_and_contraction() {
        let f = worst_function(100.0, 50).unwrap();
        let (_, fstar) = f.known_minimum().unwrap();
        let out = oqa_run(&f, &[0.0; 50], &exact()).unwrap();
        let t = &out.trace;
        assert_eq!(t.stop_reason, Some(StopReason::GapTolerance));
        assert!(t.final_gap().unwrap() <= 1e-14 * t.scale);
        let q = 1.0 - 1.0 / f.condition_number().sqrt();
        let g0 = t.records[0].gap;
        for w in t.records.windows(2) {
            assert!(w[1].gap <= q * w[0].gap * (1.0 + 1e-8), "k={}", w[1].k);
        }
        for r in &t.records {
            assert!(r.gap <= q.powi(r.k as i32) * g0 * (1.0 + 1e-8));
            assert!(r.v <= fstar + 1e-9 * t.scale && fstar <= r.f_plus + 1e-12 * t.scale);
        }
        assert_lower_bound_trace(t);
    }

    #[test]
    fn final_quadratic_lower_bounds_f() {
        let f = random_quadratic(10, 1.0, 50.0, 3).unwrap();
        let x0 = random_start(10, 1);
        let out = oqa_run(
            &f,
            &x0,
            &SolverConfig {
                max_iterations: 40,
                ..exact()
            },
        )
        .unwrap();
        let q = out.final_quadratic.unwrap();
        let scale = out.trace.scale;
        for i in 0..100 {
            let x = random_start(10, 100 + i);
            assert!(q.evaluate(&x).unwrap() <= f.value(&x) + 1e-9 * scale);
        }
    }

    #[test]
    fn memory_one_matches_memoryless_exactly() {
        let f = worst_function(100.0, 50).unwrap();
        let cfg = SolverConfig {
            max_iterations: 120,
            ..exact()
        };
        let a = oqa_run(&f, &[0.0; 50], &cfg).unwrap();
        let b = oqa_memory_run(&f, &[0.0; 50], &cfg).unwrap();
        assert_eq!(a.trace.records, b.trace.records);
        assert_eq!(a.final_iterate, b.final_iterate);
    }

    #[test]
    fn memory_three_keeps_certificate() {
        let f = random_quadratic(15, 1.0, 200.0, 5).unwrap();
        let (_, fstar) = f.known_minimum().unwrap();
        let cfg = SolverConfig {
            memory: 3,
            max_iterations: 150,
            ..exact()
        };
        let out = oqa_memory_run(&f, &random_start(15, 2), &cfg).unwrap();
        let t = &out.trace;
        for r in &t.records {
            assert!(r.v <= fstar + 1e-9 * t.scale);
        }
        assert_lower_bound_trace(t);
        let q = 1.0 - 1.0 / f.condition_number().sqrt();
        for w in t.records.windows(2) {
            assert!(
                w[1].gap <= q * w[0].gap * (1.0 + 1e-8) + 1e-13 * t.scale,
                "k={}",
                w[1].k
            );
        }
    }

    #[test]
    fn memory_helps_on_logistic() {
        let f = logistic_loss(synthetic_dataset(100, 20, 0.3, 4), 1e-3).unwrap();
        let cfg = |memory| SolverConfig {
            memory,
            gap_tolerance: 1e-6,
            max_iterations: 5000,
            ..SolverConfig::default()
        };
        let one = oqa_memory_run(&f, &[0.0; 20], &cfg(1)).unwrap();
        let five = oqa_memory_run(&f, &[0.0; 20], &cfg(5)).unwrap();
        assert_eq!(five.trace.stop_reason, Some(StopReason::GapTolerance));
        assert!(five.trace.iterations() <= one.trace.iterations());
        assert_lower_bound_trace(&five.trace);
    }

    #[test]
    fn separation_inequality_at_iterates() {
        let f = random_quadratic(8, 1.0, 30.0, 9).unwrap();
        let out = oqa_run(
            &f,
            &random_start(8, 3),
            &SolverConfig {
                max_iterations: 60,
                ..exact()
            },
        )
        .unwrap();
        let recs = &out.trace.records;
        let alpha = f.alpha();
        for w in recs.windows(2) {
            let c_prev = w[0].center.as_ref().unwrap();
            let x = w[1].iterate.as_ref().unwrap();
            let g = f.gradient(x);
            let xpp = crate::vecops::axpy(x, -1.0 / alpha, &g);
            let rhs = norm(&g).powi(2) / (alpha * alpha);
            assert!(dist_sq(&xpp, c_prev) >= rhs - 1e-9 * out.trace.scale);
        }
    }

    #[test]
    fn rejects_bad_start() {
        let f = worst_function(10.0, 4).unwrap();
        assert!(oqa_run(&f, &[0.0; 3], &SolverConfig::default()).is_err());
        let cfg = SolverConfig {
            memory: 0,
            ..SolverConfig::default()
        };
        assert!(oqa_memory_run(&f, &[0.0; 4], &cfg).is_err());
        assert!(oqa_run(&f, &[f64::NAN, 0.0, 0.0, 0.0], &SolverConfig::default()).is_err());
    }
}
