use serde::{Deserialize, Serialize};

use super::trace::{tryrec, BoundKind, Recorder, StopReason};
use super::{check_start, plus_step, SolverConfig, SolverFailure, SolverResult, SolverTrace};
use crate::error::{Error, Result};
use crate::linesearch::{geo_safeguard_accept, segment_search};
use crate::objectives::{CompositeObjective, Objective, ProxTerm};
use crate::quadratic::{min_enclosing_ball_two, Ball};
use crate::vecops::{axpy, norm_sq};

/// Ball state of the geometric schemes: `x* in B(center, squared_radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoState {
    pub center: Vec<f64>,
    pub squared_radius: f64,
    pub best_plus_value: f64,
}

/// Refinements of an inexact line search before falling back.
const SAFEGUARD_REFINEMENTS: usize = 3;

fn violation(k: usize, message: String) -> Error {
    Error::CertificateViolation { iteration: k, message }
}

/// Clamps a squared radius that is negative only through rounding.
fn clamp_radius(r2: f64, tol: f64, k: usize, what: &str) -> Result<f64> {
    if r2 >= 0.0 {
        Ok(r2)
    } else if r2 >= -tol {
        Ok(0.0)
    } else {
        Err(violation(k, format!("{what} squared radius {r2} is negative")))
    }
}

fn enclose(a: &Ball, b: &Ball, k: usize) -> Result<Ball> {
    min_enclosing_ball_two(a, b).map_err(|e| violation(k, e.to_string()))
}

/// Geometric descent: tracks a ball around the minimizer, shrinking it by
/// intersecting with the ball certified by each new gradient.
pub fn geometric_descent_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    let name = "geo";
    if let Err(error) = check_start(obj, x0, cfg) {
        return Err(SolverFailure {
            error,
            partial: SolverTrace::new(name, BoundKind::LowerBound),
        });
    }
    let alpha = obj.alpha();
    let mut rec = Recorder::new(name, BoundKind::LowerBound, alpha, cfg);

    let (f0, g0) = obj.value_and_gradient(x0);
    let (mut x_plus, mut f_plus) = tryrec!(rec, plus_step(obj, x0, &g0, cfg));
    let g0_sq = norm_sq(&g0);
    let raw = g0_sq / (alpha * alpha) - 2.0 / alpha * (f0 - f_plus);
    rec.set_scale(f0, 0.5 * alpha * raw);
    let r_tol = 1e-10 * 2.0 / alpha * rec.scale();
    let mut ball = Ball {
        center: axpy(x0, -1.0 / alpha, &g0),
        squared_radius: tryrec!(rec, clamp_radius(raw, r_tol, 0, "initial")),
    };
    let v = |f_plus: f64, ball: &Ball| f_plus - 0.5 * alpha * ball.squared_radius;
    let gap = tryrec!(
        rec,
        rec.push(
            f_plus,
            v(f_plus, &ball),
            g0_sq,
            &ball.center,
            x0,
            Some(ball.squared_radius)
        )
    );
    let done = |rec: Recorder, reason, x_plus: Vec<f64>, ball: Ball, f_plus: f64| {
        let mut out = rec.finish(reason, x_plus);
        out.geo_state = Some(GeoState {
            center: ball.center,
            squared_radius: ball.squared_radius,
            best_plus_value: f_plus,
        });
        Ok(out)
    };
    if g0_sq == 0.0 {
        return done(rec, StopReason::GradientZero, x_plus, ball, f_plus);
    }
    if gap <= cfg.effective_gap_tolerance(rec.scale()) {
        return done(rec, StopReason::GapTolerance, x_plus, ball, f_plus);
    }

    for _ in 0..cfg.max_iterations {
        let k = rec.next_k();
        let mut tol = cfg.line_search_tol;
        let mut x = tryrec!(
            rec,
            segment_search(obj, &x_plus, &ball.center, tol, cfg.closed_form_line_search)
        )
        .point;
        let mut refinements = 0;
        while !geo_safeguard_accept(obj, &x, &ball.center, f_plus) && refinements < SAFEGUARD_REFINEMENTS {
            if obj.value(&ball.center) <= f_plus {
                x = ball.center.clone();
                break;
            }
            tol *= 1e-3;
            refinements += 1;
            x = tryrec!(
                rec,
                segment_search(obj, &x_plus, &ball.center, tol, cfg.closed_form_line_search)
            )
            .point;
        }

        let (fx, g) = obj.value_and_gradient(&x);
        let (new_plus, new_f_plus) = tryrec!(rec, plus_step(obj, &x, &g, cfg));
        let g_sq = norm_sq(&g);
        let r_a = g_sq / (alpha * alpha) - 2.0 / alpha * (fx - new_f_plus);
        let r_b = ball.squared_radius - 2.0 / alpha * (f_plus - new_f_plus);
        let ball_a = Ball {
            center: axpy(&x, -1.0 / alpha, &g),
            squared_radius: tryrec!(rec, clamp_radius(r_a, r_tol, k, "gradient ball")),
        };
        let ball_b = Ball {
            center: ball.center,
            squared_radius: tryrec!(rec, clamp_radius(r_b, r_tol, k, "previous ball")),
        };
        ball = tryrec!(rec, enclose(&ball_a, &ball_b, k));
        (x_plus, f_plus) = (new_plus, new_f_plus);
        let gap = tryrec!(
            rec,
            rec.push(
                f_plus,
                v(f_plus, &ball),
                g_sq,
                &ball.center,
                &x,
                Some(ball.squared_radius)
            )
        );
        if g_sq == 0.0 {
            return done(rec, StopReason::GradientZero, x_plus, ball, f_plus);
        }
        if gap <= cfg.effective_gap_tolerance(rec.scale()) {
            return done(rec, StopReason::GapTolerance, x_plus, ball, f_plus);
        }
    }
    done(rec, StopReason::MaxIterations, x_plus, ball, f_plus)
}

/// The ball scheme with a single sequence of centers: each step intersects
/// `B(c_k, R_k^2)` with `B(c_k^{++}, (1 - 1/kappa) ||grad f(c_k)||^2 / alpha^2)`.
pub fn suboptimal_geometric_descent_run(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    suboptimal(obj, None, x0, cfg, "geo-sub")
}

/// [`suboptimal_geometric_descent_run`] for `g + h` with the gradient mapping
/// at step `1/beta` in place of the gradient.
pub fn prox_suboptimal_geo_run(comp: &CompositeObjective, x0: &[f64], cfg: &SolverConfig) -> SolverResult {
    suboptimal(&*comp.smooth, comp.prox.as_deref(), x0, cfg, "prox-geo-sub")
}

struct ProxInfo {
    mapping: Vec<f64>,
    plus: Vec<f64>,
    plus_value: f64,
    lower: f64,
}

/// Gradient mapping at `x` with `t = 1/beta`, the prox step and its lower bound
/// `F(x^+) + ||G||^2 / (2 beta) - ||G||^2 / (2 alpha)`.
fn prox_info(smooth: &dyn Objective, prox: Option<&dyn ProxTerm>, x: &[f64]) -> ProxInfo {
    let (alpha, beta) = (smooth.alpha(), smooth.beta());
    let t = 1.0 / beta;
    let g = smooth.gradient(x);
    let (mapping, plus) = match prox {
        None => {
            let plus = axpy(x, -t, &g);
            (g, plus)
        }
        Some(h) => {
            let plus = h.prox(&axpy(x, -t, &g), t);
            let mapping = x.iter().zip(&plus).map(|(a, b)| (a - b) / t).collect();
            (mapping, plus)
        }
    };
    let plus_value = smooth.value(&plus) + prox.map_or(0.0, |h| h.value(&plus));
    let m2 = norm_sq(&mapping);
    ProxInfo {
        lower: plus_value + m2 / (2.0 * beta) - m2 / (2.0 * alpha),
        mapping,
        plus,
        plus_value,
    }
}

fn suboptimal(
    smooth: &dyn Objective,
    prox: Option<&dyn ProxTerm>,
    x0: &[f64],
    cfg: &SolverConfig,
    name: &str,
) -> SolverResult {
    if let Err(error) = check_start(smooth, x0, cfg) {
        return Err(SolverFailure {
            error,
            partial: SolverTrace::new(name, BoundKind::LowerBound),
        });
    }
    let (alpha, beta) = (smooth.alpha(), smooth.beta());
    let shrink = (1.0 - alpha / beta).max(0.0);
    let mut rec = Recorder::new(name, BoundKind::LowerBound, alpha, cfg);

    let start = prox_info(smooth, prox, x0);
    let f0 = smooth.value(x0) + prox.map_or(0.0, |h| h.value(x0));
    let mut best_plus = (start.plus.clone(), start.plus_value);
    let mut best_lower = start.lower;
    let mut ball = Ball {
        center: axpy(x0, -1.0 / alpha, &start.mapping),
        squared_radius: shrink * norm_sq(&start.mapping) / (alpha * alpha),
    };
    let scale_f0 = if f0.is_finite() { f0 } else { start.plus_value };
    rec.set_scale(scale_f0, start.plus_value - start.lower);

    loop {
        let k = rec.next_k();
        let info = prox_info(smooth, prox, &ball.center);
        if info.plus_value < best_plus.1 {
            best_plus = (info.plus.clone(), info.plus_value);
        }
        best_lower = best_lower.max(info.lower);
        let m_sq = norm_sq(&info.mapping);
        let gap = tryrec!(
            rec,
            rec.push(
                best_plus.1,
                best_lower,
                m_sq,
                &ball.center,
                &ball.center,
                Some(ball.squared_radius)
            )
        );
        let reason = if m_sq == 0.0 {
            Some(StopReason::GradientZero)
        } else if gap <= cfg.effective_gap_tolerance(rec.scale()) {
            Some(StopReason::GapTolerance)
        } else if k >= cfg.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = reason {
            let mut out = rec.finish(reason, best_plus.0);
            out.geo_state = Some(GeoState {
                center: ball.center,
                squared_radius: ball.squared_radius,
                best_plus_value: best_plus.1,
            });
            return Ok(out);
        }
        let certified = Ball {
            center: axpy(&ball.center, -1.0 / alpha, &info.mapping),
            squared_radius: shrink * m_sq / (alpha * alpha),
        };
        ball = tryrec!(rec, enclose(&ball, &certified, k));
    }
}
