//! One-dimensional minimization along segments.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::vecops::{axpy, dist_sq, lerp, norm_sq};

/// Working tolerance in the normalized segment parameter.
pub const DEFAULT_TOL: f64 = 1e-4;

/// Maximum function evaluations per segment search.
pub const EVAL_BUDGET: usize = 200;

/// Maximum number of times the short-step ray is doubled.
const MAX_DOUBLINGS: usize = 60;

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSearchResult {
    /// `a + parameter * (b - a)`.
    pub point: Vec<f64>,
    pub parameter: f64,
    /// `f(point)`.
    pub value: f64,
    pub evaluations: usize,
    /// The evaluation budget ran out before the bracket met the tolerance.
    pub budget_exhausted: bool,
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("function value {v} during line search")))
    }
}

/// Minimizer of a unimodal `phi` on `[0, 1]` to bracket width `tol`.
/// Returns `(r, phi(r), evaluations, budget_exhausted)`; the result is never
/// worse than either endpoint.
fn minimize_unit_interval(phi: &dyn Fn(f64) -> f64, tol: f64) -> Result<(f64, f64, usize, bool)> {
    let f0 = finite(phi(0.0))?;
    let f1 = finite(phi(1.0))?;
    let mut evals = 2;

    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = finite(phi(x))?;
    evals += 1;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let tol1_base = tol / 4.0;
    let mut exhausted = false;

    loop {
        let m = 0.5 * (a + b);
        let tol1 = tol1_base + f64::EPSILON.sqrt() * x.abs() * 1e-4;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        if evals >= EVAL_BUDGET {
            exhausted = true;
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through (v, fv), (w, fw), (x, fx)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = finite(phi(u))?;
        evals += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }

    let mut best = (x, fx);
    if f0 <= best.1 {
        best = (0.0, f0);
    }
    if f1 < best.1 {
        best = (1.0, f1);
    }
    Ok((best.0, best.1, evals, exhausted))
}

fn point_at(a: &[f64], b: &[f64], r: f64) -> Vec<f64> {
    if r == 1.0 {
        b.to_vec()
    } else {
        lerp(a, b, r)
    }
}

/// Minimize `f` on the segment `[a, b]` by golden-section search with
/// parabolic refinement.
pub fn minimize_on_segment<F>(f: F, a: &[f64], b: &[f64], tol: f64) -> Result<SegmentSearchResult>
where
    F: Fn(&[f64]) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("line search tolerance {tol}")));
    }
    let phi = |r: f64| f(&point_at(a, b, r));
    let (r, _, evaluations, budget_exhausted) = minimize_unit_interval(&phi, tol)?;
    let point = point_at(a, b, r);
    let value = finite(f(&point))?;
    Ok(SegmentSearchResult {
        point,
        parameter: r,
        value,
        evaluations: evaluations + 1,
        budget_exhausted,
    })
}

/// Segment minimization for an objective: uses its closed-form minimizer
/// when available (and `closed_form` is set), otherwise a golden-section
/// search on its cheapest line evaluator.
pub fn segment_search(
    obj: &dyn Objective,
    a: &[f64],
    b: &[f64],
    tol: f64,
    closed_form: bool,
) -> Result<SegmentSearchResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("line search tolerance {tol}")));
    }
    if closed_form {
        if let Some(r) = obj.exact_segment_minimizer(a, b) {
            let point = point_at(a, b, r);
            let value = finite(obj.value(&point))?;
            let (fa, fb) = (obj.value(a), obj.value(b));
            // Guard against rounding on nearly flat segments.
            let result = if value <= fa && value <= fb {
                (point, r, value)
            } else if fa <= fb {
                (a.to_vec(), 0.0, fa)
            } else {
                (b.to_vec(), 1.0, fb)
            };
            return Ok(SegmentSearchResult {
                point: result.0,
                parameter: result.1,
                value: result.2,
                evaluations: 3,
                budget_exhausted: false,
            });
        }
    }
    match obj.line_restriction(a, b) {
        Some(phi) => {
            let (r, _, evaluations, budget_exhausted) = minimize_unit_interval(&*phi, tol)?;
            let point = point_at(a, b, r);
            let value = finite(obj.value(&point))?;
            Ok(SegmentSearchResult {
                point,
                parameter: r,
                value,
                evaluations: evaluations + 1,
                budget_exhausted,
            })
        }
        None => minimize_on_segment(|x| obj.value(x), a, b, tol),
    }
}

/// The beta-free short step: minimize along `x - s grad f(x)`, starting with
/// `s = 1` and doubling `s` while the minimizer sits at the far end. Never
/// worse than the fixed step `x - grad f(x) / beta`.
pub fn short_step_ls(obj: &dyn Objective, x: &[f64], tol: f64, closed_form: bool) -> Result<Vec<f64>> {
    let g = obj.gradient(x);
    short_step_ls_with_gradient(obj, x, &g, tol, closed_form).map(|(p, _)| p)
}

/// As [`short_step_ls`], reusing a computed gradient; returns the point and its value.
pub fn short_step_ls_with_gradient(
    obj: &dyn Objective,
    x: &[f64],
    g: &[f64],
    tol: f64,
    closed_form: bool,
) -> Result<(Vec<f64>, f64)> {
    if norm_sq(g) == 0.0 {
        return Ok((x.to_vec(), finite(obj.value(x))?));
    }
    let mut step = 1.0;
    let mut result = segment_search(obj, x, &axpy(x, -step, g), tol, closed_form)?;
    let mut doublings = 0;
    while result.parameter >= 1.0 - tol && doublings < MAX_DOUBLINGS {
        step *= 2.0;
        doublings += 1;
        result = segment_search(obj, x, &axpy(x, -step, g), tol, closed_form)?;
    }
    let fixed = axpy(x, -1.0 / obj.beta(), g);
    let f_fixed = obj.value(&fixed);
    if f_fixed < result.value {
        return Ok((fixed, f_fixed));
    }
    Ok((result.point, result.value))
}

/// Inexact line-search acceptance for geometric descent: accept `z` when
/// `f(z) <= f(x_k^+)` and `||z^{++} - c_k||^2 >= ||grad f(z)||^2 / alpha^2`.
pub fn geo_safeguard_accept(obj: &dyn Objective, z: &[f64], c_k: &[f64], x_k_plus_value: f64) -> bool {
    let (fz, g) = obj.value_and_gradient(z);
    if fz > x_k_plus_value {
        return false;
    }
    if z == c_k {
        return true;
    }
    let alpha = obj.alpha();
    let zpp = axpy(z, -1.0 / alpha, &g);
    let rhs = norm_sq(&g) / (alpha * alpha);
    dist_sq(&zpp, c_k) >= rhs - 1e-12 * (1.0 + rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{logistic_loss, random_quadratic, synthetic_dataset, worst_function};
    use crate::vecops::{dot, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parabola_and_monotone() {
        let r = minimize_on_segment(|x| x[0] * x[0], &[-1.0], &[3.0], 1e-8).unwrap();
        assert!(r.point[0].abs() < 1e-7);
        assert!((r.parameter - 0.25).abs() < 1e-8);
        assert!(r.value <= 1.0);

        let r = minimize_on_segment(|x| x[0], &[0.0], &[1.0], 1e-4).unwrap();
        assert_eq!(r.point, vec![0.0]);
        assert_eq!(r.parameter, 0.0);

        assert!(minimize_on_segment(|x| x[0], &[0.0], &[1.0], 0.0).is_err());
        assert!(matches!(
            minimize_on_segment(|x| 1.0 / x[0].abs() - 1e300 * f64::MAX, &[-1.0], &[1.0], 1e-4),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn bracket_meets_tolerance() {
        for (tol, target) in [(1e-4, 0.3), (1e-6, 0.777), (1e-10, 0.123_456)] {
            let r = minimize_on_segment(|x| (x[0] - target).powi(2) * (1.0 + x[0]), &[0.0], &[1.0], tol).unwrap();
            assert!((r.parameter - target).abs() <= tol, "tol {tol}: {}", r.parameter);
            assert!(!r.budget_exhausted);
        }
    }

    #[test]
    fn matches_grid_scan_on_logistic() {
        let f = logistic_loss(synthetic_dataset(40, 6, 0.5, 1), 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let a: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
            let r = segment_search(&f, &a, &b, 1e-8, true).unwrap();
            let phi = f.line_restriction(&a, &b).unwrap();
            let (mut best_r, mut best_v) = (0.0, f64::INFINITY);
            for i in 0..=1_000_000 {
                let s = i as f64 * 1e-6;
                let v = phi(s);
                if v < best_v {
                    (best_r, best_v) = (s, v);
                }
            }
            assert!((r.parameter - best_r).abs() <= 2e-6, "{} vs {}", r.parameter, best_r);
            assert!(r.value <= best_v + 1e-12);
            assert!(r.value <= f.value(&a) && r.value <= f.value(&b));
        }
    }

    #[test]
    fn orthogonality_at_interior_minimum() {
        let f = logistic_loss(synthetic_dataset(40, 6, 0.5, 2), 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for tol in [1e-4, 1e-6, 1e-4, 1e-6].into_iter().cycle().take(40) {
            let a: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
            let r = segment_search(&f, &a, &b, tol, true).unwrap();
            if r.parameter <= 1e-6 || r.parameter >= 1.0 - 1e-6 {
                continue;
            }
            checked += 1;
            let d = sub(&b, &a);
            let g = f.gradient(&r.point);
            assert!(dot(&g, &d).abs() <= 10.0 * tol * crate::vecops::norm(&g) * crate::vecops::norm(&d) + 1e-12);
        }
        assert!(checked > 5);
    }

    #[test]
    fn deterministic() {
        let f = logistic_loss(synthetic_dataset(30, 4, 0.5, 3), 0.01).unwrap();
        let a = [1.0, 2.0, -1.0, 0.5];
        let b = [-2.0, 0.0, 1.0, 0.0];
        assert_eq!(
            segment_search(&f, &a, &b, 1e-4, true).unwrap(),
            segment_search(&f, &a, &b, 1e-4, true).unwrap()
        );
    }

    #[test]
    fn short_step_examples() {
        let q = random_quadratic(2, 1.0, 1.0, 0).unwrap();
        let (xstar, _) = q.known_minimum().unwrap();
        let xs = xstar.to_vec();
        assert_eq!(short_step_ls(&q, &xs, 1e-4, true).unwrap(), xs);
        let x0 = axpy(&xs, 1.0, &[1.0, 0.0]);
        let p = short_step_ls(&q, &x0, 1e-4, true).unwrap();
        assert!(dist_sq(&p, &xs) < 1e-28);
        let p = short_step_ls(&q, &x0, 1e-4, false).unwrap();
        assert!(dist_sq(&p, &xs) < 1e-8);
    }

    #[test]
    fn short_step_descent_inequality() {
        let f = worst_function(100.0, 20).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for closed in [true, false] {
            for _ in 0..100 {
                let x: Vec<f64> = (0..20).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (fx, g) = f.value_and_gradient(&x);
                let p = short_step_ls(&f, &x, 1e-4, closed).unwrap();
                assert!(f.value(&p) + norm_sq(&g) / (2.0 * f.beta()) <= fx + 1e-10);
            }
        }
    }

    #[test]
    fn short_step_extends_ray_when_needed() {
        // alpha = beta = 0.01: the minimizer along -g sits at s = 100.
        let q = random_quadratic(3, 0.01, 0.01, 2).unwrap();
        let (xstar, _) = q.known_minimum().unwrap();
        let x0 = axpy(xstar, 1.0, &[1.0, -1.0, 2.0]);
        let p = short_step_ls(&q, &x0, 1e-8, false).unwrap();
        assert!(dist_sq(&p, xstar) < 1e-10);
    }

    #[test]
    fn safeguard_cases() {
        let f = random_quadratic(4, 1.0, 10.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xp = short_step_ls(&f, &x, 1e-4, true).unwrap();
            let fxp = f.value(&xp);
            let z = segment_search(&f, &c, &xp, 1e-4, true).unwrap();
            assert!(geo_safeguard_accept(&f, &z.point, &c, fxp));
            let fc = f.value(&c);
            assert_eq!(geo_safeguard_accept(&f, &c, &c, fxp), fc <= fxp);
        }
        let far = vec![50.0; 4];
        assert!(!geo_safeguard_accept(&f, &far, &[0.0; 4], 0.0));
    }
}
