//! Composite objectives `g + h` with a smooth `g` and a prox-friendly `h`.

use std::sync::Arc;

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// A closed convex term with an inexpensive proximal map.
pub trait ProxTerm: Send + Sync {
    /// `h(x)`, possibly `+inf`.
    fn value(&self, x: &[f64]) -> f64;

    /// `argmin_z h(z) + ||z - x||^2 / (2t)`.
    fn prox(&self, x: &[f64], t: f64) -> Vec<f64>;

    fn describe(&self) -> String;
}

/// Componentwise soft thresholding at level `t`.
pub fn prox_l1(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|&xi| xi.signum() * (xi.abs() - t).max(0.0)).collect()
}

/// Componentwise clamping to `[lo, hi]`.
pub fn prox_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&xi, (&l, &h))| xi.clamp(l, h))
        .collect()
}

/// `h(x) = weight * ||x||_1`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    pub weight: f64,
}

impl ProxTerm for L1Norm {
    fn value(&self, x: &[f64]) -> f64 {
        self.weight * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn prox(&self, x: &[f64], t: f64) -> Vec<f64> {
        prox_l1(x, t * self.weight)
    }

    fn describe(&self) -> String {
        format!("{}*l1", self.weight)
    }
}

/// Indicator of the box `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxIndicator {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("box needs lo <= hi".into()));
        }
        Ok(Self { lo, hi })
    }
}

impl ProxTerm for BoxIndicator {
    fn value(&self, x: &[f64]) -> f64 {
        let inside = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l <= v && v <= h);
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn prox(&self, x: &[f64], _t: f64) -> Vec<f64> {
        prox_box(x, &self.lo, &self.hi)
    }

    fn describe(&self) -> String {
        "box".into()
    }
}

/// `f = g + h`. A missing prox part means `h = 0`.
#[derive(Clone)]
pub struct CompositeObjective {
    pub smooth: Arc<dyn Objective>,
    pub prox: Option<Arc<dyn ProxTerm>>,
}

impl CompositeObjective {
    pub fn smooth_only(smooth: Arc<dyn Objective>) -> Self {
        Self { smooth, prox: None }
    }

    pub fn new(smooth: Arc<dyn Objective>, prox: Arc<dyn ProxTerm>) -> Self {
        Self {
            smooth,
            prox: Some(prox),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.smooth.value(x) + self.prox.as_ref().map_or(0.0, |h| h.value(x))
    }

    /// `prox_{th}(y)`; the identity when `h = 0`.
    pub fn prox(&self, y: &[f64], t: f64) -> Vec<f64> {
        match &self.prox {
            Some(h) => h.prox(y, t),
            None => y.to_vec(),
        }
    }

    pub fn describe(&self) -> String {
        match &self.prox {
            Some(h) => format!("{} + {}", self.smooth.describe(), h.describe()),
            None => self.smooth.describe(),
        }
    }
}

impl std::fmt::Debug for CompositeObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

/// `G_t(x) = (x - prox_{th}(x - t grad g(x))) / t`; equals `grad g(x)` when `h = 0`.
pub fn gradient_mapping(comp: &CompositeObjective, x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step length must be positive, got {t}"
        )));
    }
    let g = comp.smooth.gradient(x);
    if comp.prox.is_none() {
        return Ok(g);
    }
    let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
    let p = comp.prox(&y, t);
    Ok(x.iter().zip(&p).map(|(xi, pi)| (xi - pi) / t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::random_quadratic;
    use crate::vecops::{dist_sq, dot, norm_sq, sub};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prox_examples() {
        assert_eq!(prox_l1(&[2.0, -0.5, 0.0], 1.0), vec![1.0, 0.0, 0.0]);
        let x = [1.5, -2.0, 0.1];
        assert_eq!(prox_l1(&x, 0.0), x.to_vec());
        assert_eq!(prox_box(&[-3.0, 5.0], &[0.0, 0.0], &[1.0, 1.0]), vec![0.0, 1.0]);
        assert!(BoxIndicator::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn prox_maps_are_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bx = BoxIndicator::new(vec![-0.5; 4], vec![0.7; 4]).unwrap();
        let l1 = L1Norm { weight: 0.3 };
        for _ in 0..500 {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t = rng.random_range(0.0..2.0);
            for h in [&bx as &dyn ProxTerm, &l1] {
                let (pu, pv) = (h.prox(&u, t), h.prox(&v, t));
                assert!(dist_sq(&pu, &pv) <= dist_sq(&u, &v) + 1e-15);
                // firm nonexpansiveness
                assert!(dist_sq(&pu, &pv) <= dot(&sub(&pu, &pv), &sub(&u, &v)) + 1e-15);
            }
            // convexity of h along the segment
            let s = rng.random_range(0.0..1.0);
            let m: Vec<f64> = u.iter().zip(&v).map(|(a, b)| s * a + (1.0 - s) * b).collect();
            assert!(l1.value(&m) <= s * l1.value(&u) + (1.0 - s) * l1.value(&v) + 1e-12);
        }
    }

    #[test]
    fn gradient_mapping_reduces_to_gradient() {
        let g = Arc::new(random_quadratic(3, 1.0, 1.0, 0).unwrap());
        let (xstar, _) = g.known_minimum().unwrap();
        let comp = CompositeObjective::smooth_only(g.clone());
        let x = [0.4, -1.0, 2.0];
        assert_eq!(gradient_mapping(&comp, &x, 1.0).unwrap(), g.gradient(&x));
        // with f = ||x - x*||^2 / 2 and h = 0, G_1(x) = x - x*
        let gm = gradient_mapping(&comp, &x, 1.0).unwrap();
        for i in 0..3 {
            assert!((gm[i] - (x[i] - xstar[i])).abs() < 1e-15);
        }
        let zero_l1 = CompositeObjective::new(g.clone(), Arc::new(L1Norm { weight: 0.0 }));
        let gm = gradient_mapping(&zero_l1, &x, 0.5).unwrap();
        assert!(dist_sq(&gm, &g.gradient(&x)) < 1e-24);
        assert!(gradient_mapping(&comp, &x, 0.0).is_err());
    }

    #[test]
    fn gradient_mapping_lower_bound_inequality() {
        let g = Arc::new(random_quadratic(6, 1.0, 20.0, 4).unwrap());
        let (alpha, beta) = (g.alpha(), g.beta());
        let comp = CompositeObjective::new(g, Arc::new(L1Norm { weight: 0.3 }));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
            let t = rng.random_range(0.01..(1.0 / beta));
            let gm = gradient_mapping(&comp, &x, t).unwrap();
            let xp: Vec<f64> = x.iter().zip(&gm).map(|(a, b)| a - t * b).collect();
            let fxp = comp.value(&xp);
            for _ in 0..1000 {
                let y: Vec<f64> = (0..6).map(|_| rng.random_range(-4.0..4.0)).collect();
                let rhs = fxp
                    + dot(&gm, &sub(&y, &x))
                    + t * (1.0 - beta * t / 2.0) * norm_sq(&gm)
                    + alpha / 2.0 * dist_sq(&y, &x);
                assert!(comp.value(&y) >= rhs - 1e-10 * (1.0 + fxp.abs()));
            }
        }
    }
}
