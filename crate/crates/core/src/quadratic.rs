//! Canonical quadratic lower models `v + (alpha/2) ||x - c||^2`, their
//! two-term optimal averaging, and the dual picture in terms of balls.
//!
//! Every strongly convex function is bounded below at each point by a
//! quadratic of this form. Convex combinations of such quadratics keep the
//! same shape, so the best lower bound available from two of them is found
//! by maximizing the minimum value of the combination over the weight.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vecops::{dist_sq, lerp, norm_sq};

/// Relative tolerance when comparing curvatures of two quadratics.
pub const CURVATURE_RTOL: f64 = 1e-9;

/// Centers closer than this (relative to `1 + ||c_A||^2`) are treated as coincident.
pub const COINCIDENT_RTOL: f64 = 1e-14;

/// The quadratic `min_value + (curvature / 2) * ||x - center||^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalQuadratic {
    pub min_value: f64,
    pub center: Vec<f64>,
    pub curvature: f64,
}

impl CanonicalQuadratic {
    pub fn new(min_value: f64, center: Vec<f64>, curvature: f64) -> Result<Self> {
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::NonPositiveCurvature(curvature));
        }
        Ok(Self {
            min_value,
            center,
            curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        evaluate(self, x)
    }
}

/// A Euclidean ball stored by center and squared radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub squared_radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, squared_radius: f64) -> Result<Self> {
        if squared_radius < 0.0 || squared_radius.is_nan() {
            return Err(Error::EmptyIntersection(squared_radius));
        }
        Ok(Self { center, squared_radius })
    }

    pub fn radius(&self) -> f64 {
        self.squared_radius.sqrt()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        dist_sq(&self.center, x) <= self.squared_radius + tol
    }
}

/// A weight in `[0, 1]` placed on the first of two averaged quadratics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingWeight(f64);

impl AveragingWeight {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self(lambda))
        } else {
            Err(Error::WeightOutOfRange(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn evaluate(q: &CanonicalQuadratic, x: &[f64]) -> Result<f64> {
    check_dim(q.dim(), x.len())?;
    Ok(q.min_value + 0.5 * q.curvature * dist_sq(x, &q.center))
}

/// Strong-convexity lower model at `x`: minimum `f(x) - ||g||^2 / (2 alpha)`
/// attained at the long step `x - g / alpha`.
pub fn lower_model_at(f_x: f64, grad: &[f64], x: &[f64], alpha: f64) -> Result<CanonicalQuadratic> {
    check_dim(x.len(), grad.len())?;
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveCurvature(alpha));
    }
    let center = x.iter().zip(grad).map(|(xi, gi)| xi - gi / alpha).collect();
    CanonicalQuadratic::new(f_x - norm_sq(grad) / (2.0 * alpha), center, alpha)
}

fn check_compatible(a: &CanonicalQuadratic, b: &CanonicalQuadratic) -> Result<()> {
    check_dim(a.dim(), b.dim())?;
    let scale = a.curvature.abs().max(b.curvature.abs());
    if (a.curvature - b.curvature).abs() > CURVATURE_RTOL * scale {
        return Err(Error::CurvatureMismatch(a.curvature, b.curvature));
    }
    Ok(())
}

/// Minimum value of `lambda Q_A + (1 - lambda) Q_B` as a polynomial in lambda.
fn averaged_min_value(v_a: f64, v_b: f64, half_alpha_d2: f64, lambda: f64) -> f64 {
    v_b + (v_a - v_b + half_alpha_d2) * lambda - half_alpha_d2 * lambda * lambda
}

/// The convex combination `lambda Q_A + (1 - lambda) Q_B`.
pub fn average_two(q_a: &CanonicalQuadratic, q_b: &CanonicalQuadratic, lambda: f64) -> Result<CanonicalQuadratic> {
    check_compatible(q_a, q_b)?;
    let lambda = AveragingWeight::new(lambda)?.value();
    let half_alpha_d2 = 0.5 * q_a.curvature * dist_sq(&q_a.center, &q_b.center);
    Ok(CanonicalQuadratic {
        min_value: averaged_min_value(q_a.min_value, q_b.min_value, half_alpha_d2, lambda),
        center: lerp(&q_b.center, &q_a.center, lambda),
        curvature: q_a.curvature,
    })
}

/// Unclamped maximizer `1/2 + (v_A - v_B) / (alpha d^2)` of the averaged
/// minimum value, or `None` when the centers coincide.
pub fn unclamped_weight(q_a: &CanonicalQuadratic, q_b: &CanonicalQuadratic) -> Option<f64> {
    let d2 = dist_sq(&q_a.center, &q_b.center);
    if d2 < COINCIDENT_RTOL * (1.0 + norm_sq(&q_a.center)) {
        None
    } else {
        Some(0.5 + (q_a.min_value - q_b.min_value) / (q_a.curvature * d2))
    }
}

/// The average of two quadratics with the largest minimum value.
pub fn optimal_average_two(
    q_a: &CanonicalQuadratic,
    q_b: &CanonicalQuadratic,
) -> Result<(CanonicalQuadratic, AveragingWeight)> {
    check_compatible(q_a, q_b)?;
    let Some(lambda_hat) = unclamped_weight(q_a, q_b) else {
        // Coincident centers: the larger minimum is the tighter bound.
        let (q, lambda) = if q_a.min_value > q_b.min_value {
            (q_a.clone(), 1.0)
        } else if q_a.min_value < q_b.min_value {
            (q_b.clone(), 0.0)
        } else {
            (q_a.clone(), 0.5)
        };
        return Ok((q, AveragingWeight(lambda)));
    };
    if lambda_hat >= 1.0 {
        return Ok((q_a.clone(), AveragingWeight(1.0)));
    }
    if lambda_hat <= 0.0 {
        return Ok((q_b.clone(), AveragingWeight(0.0)));
    }
    let alpha = q_a.curvature;
    let d2 = dist_sq(&q_a.center, &q_b.center);
    let dv = q_a.min_value - q_b.min_value;
    let min_value = alpha / 8.0 * d2 + 0.5 * (q_a.min_value + q_b.min_value) + dv * dv / (2.0 * alpha * d2);
    Ok((
        CanonicalQuadratic {
            min_value,
            center: lerp(&q_b.center, &q_a.center, lambda_hat),
            curvature: alpha,
        },
        AveragingWeight(lambda_hat),
    ))
}

/// The sublevel set `{Q <= level}` as a ball.
pub fn ball_from_quadratic(q: &CanonicalQuadratic, level: f64) -> Result<Ball> {
    if level < q.min_value {
        return Err(Error::NegativeRadius {
            level,
            min_value: q.min_value,
        });
    }
    Ok(Ball {
        center: q.center.clone(),
        squared_radius: 2.0 / q.curvature * (level - q.min_value),
    })
}

/// The quadratic with curvature `alpha` whose `level` sublevel set is `b`.
pub fn quadratic_from_ball(b: &Ball, level: f64, alpha: f64) -> Result<CanonicalQuadratic> {
    CanonicalQuadratic::new(level - 0.5 * alpha * b.squared_radius, b.center.clone(), alpha)
}

/// Smallest ball containing the intersection of two balls.
///
/// Both balls are read as sublevel sets of unit-curvature quadratics at a
/// shared level; the optimal average of those quadratics has the minimal
/// enclosing ball as its sublevel set at that level.
pub fn min_enclosing_ball_two(b_a: &Ball, b_b: &Ball) -> Result<Ball> {
    check_dim(b_a.center.len(), b_b.center.len())?;
    let (r_a, r_b) = (b_a.radius(), b_b.radius());
    let d = dist_sq(&b_a.center, &b_b.center).sqrt();
    let slack = 1e-12 * (1.0 + d + r_a + r_b);
    if d > r_a + r_b + slack {
        return Err(Error::EmptyIntersection(d - r_a - r_b));
    }
    let alpha = 1.0;
    let level = alpha * b_a.squared_radius.max(b_b.squared_radius);
    let q_a = quadratic_from_ball(b_a, level, alpha)?;
    let q_b = quadratic_from_ball(b_b, level, alpha)?;
    let (avg, _) = optimal_average_two(&q_a, &q_b)?;
    let squared_radius = 2.0 / alpha * (level - avg.min_value);
    if squared_radius < 0.0 {
        if squared_radius < -1e-12 * (1.0 + level) {
            return Err(Error::EmptyIntersection(squared_radius));
        }
        return Ok(Ball {
            center: avg.center,
            squared_radius: 0.0,
        });
    }
    Ok(Ball {
        center: avg.center,
        squared_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q1(v: f64, c: f64, a: f64) -> CanonicalQuadratic {
        CanonicalQuadratic::new(v, vec![c], a).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&q1(0.0, 0.0, 2.0), &[0.0]).unwrap(), 0.0);
        assert_eq!(evaluate(&q1(1.0, -2.0, 1.0), &[0.0]).unwrap(), 3.0);
        assert_eq!(evaluate(&q1(3.0, 4.0, 1.0), &[4.0]).unwrap(), 3.0);
        assert!(matches!(
            evaluate(&q1(0.0, 0.0, 1.0), &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_curvature() {
        assert!(CanonicalQuadratic::new(0.0, vec![0.0], 0.0).is_err());
        assert!(lower_model_at(1.0, &[1.0], &[0.0], -1.0).is_err());
    }

    #[test]
    fn lower_model_examples() {
        let q = lower_model_at(0.5, &[1.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(q.min_value, 0.0);
        assert_eq!(q.center, vec![0.0, 0.0]);

        let q = lower_model_at(2.5, &[0.0, 0.0], &[3.0, -1.0], 4.0).unwrap();
        assert_eq!(q.min_value, 2.5);
        assert_eq!(q.center, vec![3.0, -1.0]);
        assert_eq!(q.curvature, 4.0);

        let mut grad = vec![0.0; 5];
        grad[0] = -100.0;
        let q = lower_model_at(50.0, &grad, &[0.0; 5], 1.0).unwrap();
        assert_eq!(q.min_value, 50.0 - 5000.0);
        assert_eq!(q.center, vec![100.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn average_two_examples() {
        let a = q1(0.0, 0.0, 2.0);
        let b = q1(0.0, 2.0, 2.0);
        assert_eq!(average_two(&a, &b, 0.0).unwrap(), b);
        assert_eq!(average_two(&a, &b, 1.0).unwrap(), a);
        let m = average_two(&a, &b, 0.5).unwrap();
        assert!((m.min_value - 1.0).abs() < 1e-15);
        assert!((m.center[0] - 1.0).abs() < 1e-15);
        assert!(matches!(average_two(&a, &b, 1.5), Err(Error::WeightOutOfRange(_))));
        assert!(matches!(
            average_two(&a, &q1(0.0, 0.0, 2.1), 0.5),
            Err(Error::CurvatureMismatch(..))
        ));
    }

    #[test]
    fn optimal_average_figure_instance() {
        let a = q1(1.0, -2.0, 1.0);
        let b = q1(3.0, 4.0, 1.0);
        let (q, w) = optimal_average_two(&a, &b).unwrap();
        assert!((w.value() - 4.0 / 9.0).abs() < 1e-15);
        assert!((q.min_value - (6.5 + 1.0 / 18.0)).abs() < 1e-13);
        assert!((q.center[0] - 4.0 / 3.0).abs() < 1e-14);

        // 10^6-point grid over lambda.
        let best = (0..=1_000_000)
            .map(|i| average_two(&a, &b, i as f64 / 1e6).unwrap().min_value)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(q.min_value >= best - 1e-12);
        assert!(q.min_value - best < 1e-9);
    }

    #[test]
    fn optimal_average_identical_and_clamped() {
        let a = q1(2.0, 1.0, 1.0);
        let (q, w) = optimal_average_two(&a, &a).unwrap();
        assert_eq!(q, a);
        assert_eq!(w.value(), 0.5);

        let (q, w) = optimal_average_two(&q1(10.0, 0.0, 1.0), &q1(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(w.value(), 1.0);
        assert_eq!(q, q1(10.0, 0.0, 1.0));

        let (q, w) = optimal_average_two(&q1(1.0, 0.0, 1.0), &q1(3.0, 0.0, 1.0)).unwrap();
        assert_eq!(w.value(), 0.0);
        assert_eq!(q.min_value, 3.0);
    }

    #[test]
    fn ball_conversions() {
        let b = ball_from_quadratic(&q1(0.0, 0.0, 2.0), 1.0).unwrap();
        assert_eq!(b, Ball::new(vec![0.0], 1.0).unwrap());
        let b = ball_from_quadratic(&q1(3.0, 5.0, 2.0), 3.0).unwrap();
        assert_eq!(b.squared_radius, 0.0);
        assert!(matches!(
            ball_from_quadratic(&q1(3.0, 5.0, 2.0), 2.0),
            Err(Error::NegativeRadius { .. })
        ));
        let q = q1(6.5 + 1.0 / 18.0, 4.0 / 3.0, 1.0);
        let b = ball_from_quadratic(&q, 8.0).unwrap();
        assert!((b.squared_radius - 2.0 * (8.0 - 6.5 - 1.0 / 18.0)).abs() < 1e-14);

        let q = quadratic_from_ball(&Ball::new(vec![0.0], 1.0).unwrap(), 1.0, 2.0).unwrap();
        assert_eq!(q, q1(0.0, 0.0, 2.0));
        let q = quadratic_from_ball(&Ball::new(vec![7.0], 0.0).unwrap(), 4.0, 3.0).unwrap();
        assert_eq!(q, q1(4.0, 7.0, 3.0));
        assert!(quadratic_from_ball(&Ball::new(vec![7.0], 0.0).unwrap(), 4.0, 0.0).is_err());
        assert!(Ball::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn meb_two_examples() {
        let b = |c: f64, r2: f64| Ball::new(vec![c], r2).unwrap();
        let m = min_enclosing_ball_two(&b(0.0, 1.0), &b(2.0, 1.0)).unwrap();
        assert!((m.center[0] - 1.0).abs() < 1e-12 && m.squared_radius.abs() < 1e-12);

        let m = min_enclosing_ball_two(&b(0.0, 4.0), &b(1.0, 4.0)).unwrap();
        assert!((m.center[0] - 0.5).abs() < 1e-14);
        assert!((m.squared_radius - 3.75).abs() < 1e-13);

        let m = min_enclosing_ball_two(&b(0.0, 9.0), &b(0.5, 1.0)).unwrap();
        assert_eq!(m.center, vec![0.5]);
        assert!((m.squared_radius - 1.0).abs() < 1e-14);

        assert!(matches!(
            min_enclosing_ball_two(&b(0.0, 1.0), &b(3.0, 1.0)),
            Err(Error::EmptyIntersection(_))
        ));
    }

    #[test]
    fn meb_lens_sampling() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        // Points of the lens B(0,4) ∩ B(1,4) stay inside B(0.5, 3.75); the
        // lens apexes sit exactly on its boundary.
        let m = min_enclosing_ball_two(
            &Ball::new(vec![0.0, 0.0], 4.0).unwrap(),
            &Ball::new(vec![1.0, 0.0], 4.0).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut inside = 0;
        for _ in 0..100_000 {
            let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            if dist_sq(&p, &[0.0, 0.0]) <= 4.0 && dist_sq(&p, &[1.0, 0.0]) <= 4.0 {
                inside += 1;
                assert!(m.contains(&p, 1e-10));
            }
        }
        assert!(inside > 10_000);
        let apex = [0.5, 3.75f64.sqrt()];
        assert!((dist_sq(&apex, &m.center) - 3.75).abs() < 1e-12);
    }
}
