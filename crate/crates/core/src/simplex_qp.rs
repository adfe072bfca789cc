//! Optimal averaging of several canonical quadratics.
//!
//! For quadratics `Q_i = v_i + (alpha/2)||x - c_i||^2` and weights `lambda`
//! in the simplex, the average is again canonical with center `C lambda`
//! and minimum
//!
//! ```text
//! v(lambda) = <(alpha/2) diag(C^T C) + v, lambda> - (alpha/2) ||C lambda||^2
//! ```
//!
//! which is concave in `lambda`. Maximizing it is a small QP over the
//! simplex that we solve with a primal active-set method on the cached Gram
//! matrix `C^T C`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::quadratic::{Ball, CanonicalQuadratic, CURVATURE_RTOL};
use crate::vecops::{dist_sq, dot, norm_sq};

/// Tolerance on `sum(lambda) = 1`.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    weights: Vec<f64>,
}

impl SimplexWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("negative or NaN entry {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::InvalidWeights(format!("entries sum to {sum}")));
        }
        Ok(Self { weights })
    }

    pub fn vertex(t: usize, i: usize) -> Self {
        let mut weights = vec![0.0; t];
        weights[i] = 1.0;
        Self { weights }
    }

    pub fn uniform(t: usize) -> Self {
        Self {
            weights: vec![1.0 / t as f64; t],
        }
    }

    /// Clamp negatives and renormalize; used to clean up solver output.
    fn from_raw(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if !(*w > 0.0) {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Self { weights }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Append a zero weight for a newly added member.
    pub fn padded(&self) -> Self {
        let mut weights = self.weights.clone();
        weights.push(0.0);
        Self { weights }
    }
}

/// A sliding window of at most `capacity` canonical quadratics sharing one
/// curvature, together with the Gram matrix of their centers.
///
/// Members live in fixed slots. Pushing into a full bundle overwrites the
/// slot of the oldest member, so only that slot's row and column of the Gram
/// matrix are recomputed.
#[derive(Debug, Clone)]
pub struct QuadraticBundle {
    dim: usize,
    curvature: f64,
    capacity: usize,
    slots: Vec<CanonicalQuadratic>,
    /// Gram matrix indexed by slot.
    gram: Vec<Vec<f64>>,
    /// Slot indices from oldest to newest.
    order: Vec<usize>,
}

impl QuadraticBundle {
    pub fn new(dim: usize, curvature: f64, capacity: usize) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(Error::NonPositiveCurvature(curvature));
        }
        if capacity == 0 {
            return Err(Error::InvalidParameter("bundle capacity must be at least 1".into()));
        }
        Ok(Self {
            dim,
            curvature,
            capacity,
            slots: Vec::with_capacity(capacity),
            gram: vec![vec![0.0; capacity]; capacity],
            order: Vec::with_capacity(capacity),
        })
    }

    /// Bundle holding `quadratics` in the given order, with capacity equal to their count.
    pub fn from_quadratics(quadratics: &[CanonicalQuadratic]) -> Result<Self> {
        let first = quadratics.first().ok_or(Error::EmptyBundle)?;
        let mut bundle = Self::new(first.dim(), first.curvature, quadratics.len())?;
        for q in quadratics {
            bundle.push_mut(q.clone())?;
        }
        Ok(bundle)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    /// The `i`-th member, oldest first.
    pub fn member(&self, i: usize) -> &CanonicalQuadratic {
        &self.slots[self.order[i]]
    }

    pub fn members(&self) -> impl Iterator<Item = &CanonicalQuadratic> {
        self.order.iter().map(move |&s| &self.slots[s])
    }

    pub fn min_values(&self) -> Vec<f64> {
        self.members().map(|q| q.min_value).collect()
    }

    /// Gram matrix in member order.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.order
            .iter()
            .map(|&si| self.order.iter().map(|&sj| self.gram[si][sj]).collect())
            .collect()
    }

    fn check_member(&self, q: &CanonicalQuadratic) -> Result<()> {
        check_dim(self.dim, q.dim())?;
        if (q.curvature - self.curvature).abs() > CURVATURE_RTOL * self.curvature {
            return Err(Error::CurvatureMismatch(self.curvature, q.curvature));
        }
        Ok(())
    }

    /// Append `q`, evicting the oldest member when full.
    pub fn push_mut(&mut self, q: CanonicalQuadratic) -> Result<()> {
        self.check_member(&q)?;
        let slot = if self.slots.len() < self.capacity {
            self.slots.push(q);
            self.slots.len() - 1
        } else {
            let slot = self.order.remove(0);
            self.slots[slot] = q;
            slot
        };
        self.order.push(slot);
        let c = &self.slots[slot].center;
        for &other in &self.order {
            let g = dot(c, &self.slots[other].center);
            self.gram[slot][other] = g;
            self.gram[other][slot] = g;
        }
        Ok(())
    }

    pub fn push(&self, q: CanonicalQuadratic) -> Result<Self> {
        let mut next = self.clone();
        next.push_mut(q)?;
        Ok(next)
    }

    /// A new bundle `[q, members...]` whose capacity is exactly its size.
    /// Costs `len + 1` inner products; the existing Gram block is reused.
    pub fn with_leading(&self, q: CanonicalQuadratic) -> Result<Self> {
        self.check_member(&q)?;
        let t = self.len() + 1;
        let mut slots = Vec::with_capacity(t);
        slots.push(q);
        slots.extend(self.members().cloned());
        let mut gram = vec![vec![0.0; t]; t];
        for (i, &si) in self.order.iter().enumerate() {
            for (j, &sj) in self.order.iter().enumerate() {
                gram[i + 1][j + 1] = self.gram[si][sj];
            }
        }
        for j in 0..t {
            let g = dot(&slots[0].center, &slots[j].center);
            gram[0][j] = g;
            gram[j][0] = g;
        }
        Ok(Self {
            dim: self.dim,
            curvature: self.curvature,
            capacity: t,
            slots,
            gram,
            order: (0..t).collect(),
        })
    }

    /// Coefficients `a_i = (alpha/2) G_ii + v_i` of the linear part of `v(lambda)`.
    fn linear_coefficients(&self) -> Vec<f64> {
        let half_alpha = 0.5 * self.curvature;
        self.order
            .iter()
            .map(|&s| half_alpha * self.gram[s][s] + self.slots[s].min_value)
            .collect()
    }

    fn value_from_gram(&self, gram: &[Vec<f64>], linear: &[f64], lambda: &[f64]) -> f64 {
        let quad: f64 = lambda
            .iter()
            .enumerate()
            .map(|(i, li)| li * dot(&gram[i], lambda))
            .sum();
        dot(linear, lambda) - 0.5 * self.curvature * quad
    }
}

/// Average of the bundle under `lambda`.
pub fn average_multi(bundle: &QuadraticBundle, lambda: &SimplexWeights) -> Result<CanonicalQuadratic> {
    check_dim(bundle.len(), lambda.len())?;
    let mut center = vec![0.0; bundle.dim];
    for (q, &w) in bundle.members().zip(lambda.as_slice()) {
        if w != 0.0 {
            for (ci, qi) in center.iter_mut().zip(&q.center) {
                *ci += w * qi;
            }
        }
    }
    let min_value = dot(&bundle.linear_coefficients(), lambda.as_slice()) - 0.5 * bundle.curvature * norm_sq(&center);
    Ok(CanonicalQuadratic {
        min_value,
        center,
        curvature: bundle.curvature,
    })
}

/// Diagnostics from the active-set solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpReport {
    pub active_set_changes: usize,
    pub kkt_residual: f64,
}

/// Maximizer of `v(lambda)` over the simplex and the resulting average.
pub fn optimal_average_multi(
    bundle: &QuadraticBundle,
    warm_start: Option<&SimplexWeights>,
) -> Result<(CanonicalQuadratic, SimplexWeights)> {
    optimal_average_multi_report(bundle, warm_start).map(|(q, w, _)| (q, w))
}

pub fn optimal_average_multi_report(
    bundle: &QuadraticBundle,
    warm_start: Option<&SimplexWeights>,
) -> Result<(CanonicalQuadratic, SimplexWeights, QpReport)> {
    optimal_average_multi_with_tol(bundle, warm_start, DEFAULT_QP_TOL)
}

/// Default multiplier tolerance, relative to the problem scale.
pub const DEFAULT_QP_TOL: f64 = 1e-14;

/// As [`optimal_average_multi_report`] with an explicit relative tolerance on
/// the multipliers that decide when an index enters the support.
pub fn optimal_average_multi_with_tol(
    bundle: &QuadraticBundle,
    warm_start: Option<&SimplexWeights>,
    rel_tol: f64,
) -> Result<(CanonicalQuadratic, SimplexWeights, QpReport)> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("qp tolerance {rel_tol}")));
    }
    let t = bundle.len();
    if t == 0 {
        return Err(Error::EmptyBundle);
    }
    let values = bundle.min_values();
    let best_single = argmax_lowest(&values);
    let trivial = QpReport {
        active_set_changes: 0,
        kkt_residual: 0.0,
    };
    if t == 1 {
        let w = SimplexWeights::vertex(1, 0);
        return Ok((bundle.member(0).clone(), w, trivial));
    }
    let first = &bundle.member(0).center;
    let spread = bundle.members().map(|q| dist_sq(&q.center, first)).fold(0.0, f64::max);
    if spread < crate::quadratic::COINCIDENT_RTOL * (1.0 + norm_sq(first)) {
        let w = SimplexWeights::vertex(t, best_single);
        return Ok((bundle.member(best_single).clone(), w, trivial));
    }

    // minimize 0.5 l^T G l - b^T l with b = diag(G)/2 + v/alpha
    let gram = bundle.gram();
    let alpha = bundle.curvature;
    let b: Vec<f64> = (0..t).map(|i| 0.5 * gram[i][i] + values[i] / alpha).collect();
    let start = match warm_start {
        Some(w) => {
            check_dim(t, w.len())?;
            w.as_slice().to_vec()
        }
        None => SimplexWeights::vertex(t, best_single).weights,
    };
    let (raw, report) = active_set(&gram, &b, start, rel_tol)?;
    let weights = SimplexWeights::from_raw(raw);
    let q = average_multi(bundle, &weights)?;
    Ok((q, weights, report))
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Solves `min 0.5 l^T G l - b^T l` over the simplex by a primal active-set
/// method starting from the feasible point `lambda`.
fn active_set(gram: &[Vec<f64>], b: &[f64], mut lambda: Vec<f64>, rel_tol: f64) -> Result<(Vec<f64>, QpReport)> {
    let t = b.len();
    let scale =
        1.0 + b.iter().fold(0.0f64, |m, x| m.max(x.abs())) + gram.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = rel_tol * scale;
    let max_changes = 100 * t;
    let mut working: Vec<usize> = (0..t).filter(|&i| lambda[i] > 0.0).collect();
    let mut changes = 0;
    let mut last_added: Option<usize> = None;

    loop {
        let (sol, mu) = match solve_equality_qp(gram, b, &working) {
            EqualityStep::Point(sol, mu) => (sol, mu),
            EqualityStep::Ray(d) => {
                follow_ray(gram, b, &mut lambda, &mut working, d, tol);
                last_added = None;
                changes += 1;
                if changes > max_changes {
                    return Err(Error::QpNotConverged {
                        iterations: changes,
                        best: SimplexWeights::from_raw(lambda).weights,
                    });
                }
                continue;
            }
        };
        let blocking = working
            .iter()
            .zip(&sol)
            .filter(|(_, &s)| s < 0.0)
            .map(|(&i, &s)| (i, lambda[i] / (lambda[i] - s)))
            .fold(None, |best: Option<(usize, f64)>, (i, step)| match best {
                Some((_, bs)) if bs <= step => best,
                _ => Some((i, step)),
            });

        match blocking {
            None => {
                lambda.iter_mut().for_each(|l| *l = 0.0);
                for (&i, &s) in working.iter().zip(&sol) {
                    lambda[i] = s;
                }
                let grad = gradient(gram, b, &lambda);
                let mut entering: Option<(usize, f64)> = None;
                for j in (0..t).filter(|j| !working.contains(j)) {
                    let nu = grad[j] - mu;
                    if nu < -tol && entering.is_none_or(|(_, best)| nu < best) {
                        entering = Some((j, nu));
                    }
                }
                match entering {
                    None => {
                        let residual = kkt_residual(gram, b, &lambda, &working, mu);
                        return Ok((
                            lambda,
                            QpReport {
                                active_set_changes: changes,
                                kkt_residual: residual,
                            },
                        ));
                    }
                    Some((j, _)) => {
                        working.push(j);
                        working.sort_unstable();
                        last_added = Some(j);
                    }
                }
            }
            Some((i, step)) => {
                if step <= 0.0 && last_added == Some(i) {
                    // The entering index cannot move off its bound: the
                    // reduced problem is degenerate and the current point is optimal.
                    working.retain(|&w| w != i);
                    let residual = kkt_residual(gram, b, &lambda, &working, mu);
                    return Ok((
                        lambda,
                        QpReport {
                            active_set_changes: changes,
                            kkt_residual: residual,
                        },
                    ));
                }
                for (&w, &s) in working.iter().zip(&sol) {
                    lambda[w] += step * (s - lambda[w]);
                }
                lambda[i] = 0.0;
                working.retain(|&w| w != i && lambda[w] > 0.0);
                last_added = None;
            }
        }
        changes += 1;
        if changes > max_changes {
            return Err(Error::QpNotConverged {
                iterations: changes,
                best: SimplexWeights::from_raw(lambda).weights,
            });
        }
    }
}

/// Moves along the flat direction `d` (descent side, or the side that can
/// move when the objective is constant) until a weight reaches zero, and
/// drops that index.
fn follow_ray(gram: &[Vec<f64>], b: &[f64], lambda: &mut [f64], working: &mut Vec<usize>, mut d: Vec<f64>, tol: f64) {
    let grad = gradient(gram, b, lambda);
    let slope: f64 = working.iter().zip(&d).map(|(&w, dw)| grad[w] * dw).sum();
    let stuck = |d: &[f64]| working.iter().zip(d).any(|(&w, &dw)| dw < 0.0 && lambda[w] <= 0.0);
    let flip = if slope.abs() > tol { slope > 0.0 } else { stuck(&d) };
    if flip {
        d.iter_mut().for_each(|x| *x = -*x);
    }
    let Some((i, tau)) = working
        .iter()
        .zip(&d)
        .filter(|(_, &dw)| dw < 0.0)
        .map(|(&w, &dw)| (w, lambda[w] / -dw))
        .fold(None, |best: Option<(usize, f64)>, (w, t)| match best {
            Some((_, bt)) if bt <= t => best,
            _ => Some((w, t)),
        })
    else {
        return;
    };
    for (&w, &dw) in working.iter().zip(&d) {
        lambda[w] = (lambda[w] + tau * dw).max(0.0);
    }
    lambda[i] = 0.0;
    working.retain(|&w| w != i);
}

fn gradient(gram: &[Vec<f64>], b: &[f64], lambda: &[f64]) -> Vec<f64> {
    gram.iter().zip(b).map(|(row, bi)| dot(row, lambda) - bi).collect()
}

/// Max violation of stationarity on the working set and dual feasibility off it.
fn kkt_residual(gram: &[Vec<f64>], b: &[f64], lambda: &[f64], working: &[usize], mu: f64) -> f64 {
    let grad = gradient(gram, b, lambda);
    let sum: f64 = lambda.iter().sum();
    let mut r = (sum - 1.0).abs();
    for (j, g) in grad.iter().enumerate() {
        if working.contains(&j) {
            r = r.max((g - mu).abs());
        } else {
            r = r.max((mu - g).max(0.0));
        }
    }
    r
}

enum EqualityStep {
    /// Minimizer on the affine hull of the working set and the multiplier
    /// of the sum constraint.
    Point(Vec<f64>, f64),
    /// Unit direction with zero sum along which the objective is linear.
    Ray(Vec<f64>),
}

/// Minimizer of the QP restricted to `working` with `sum = 1`, or a flat
/// direction when the reduced Hessian is singular.
fn solve_equality_qp(gram: &[Vec<f64>], b: &[f64], working: &[usize]) -> EqualityStep {
    let m = working.len();
    if m == 1 {
        let i = working[0];
        return EqualityStep::Point(vec![1.0], gram[i][i] - b[i]);
    }
    let g_w = DMatrix::from_fn(m, m, |r, c| gram[working[r]][working[c]]);
    // orthonormal basis of the zero-sum subspace
    let z = DMatrix::from_fn(m, m - 1, |r, c| {
        if r == c + 1 {
            1.0
        } else if r == 0 {
            -1.0
        } else {
            0.0
        }
    });
    let q = z.qr().q();
    let eig = (q.transpose() * &g_w * &q).symmetric_eigen();
    let (imin, lmin) =
        eig.eigenvalues.iter().copied().enumerate().fold(
            (0, f64::INFINITY),
            |best, (i, l)| if l < best.1 { (i, l) } else { best },
        );
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let ray = || EqualityStep::Ray((&q * eig.eigenvectors.column(imin)).iter().copied().collect());
    if lmin <= 1e-12 * lmax || lmax == 0.0 {
        return ray();
    }
    let kkt = DMatrix::from_fn(m + 1, m + 1, |r, c| match (r < m, c < m) {
        (true, true) => g_w[(r, c)],
        (true, false) => -1.0,
        (false, true) => 1.0,
        (false, false) => 0.0,
    });
    let rhs = DVector::from_fn(m + 1, |r, _| if r < m { b[working[r]] } else { 1.0 });
    match kkt.lu().solve(&rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => EqualityStep::Point(x.iter().take(m).copied().collect(), x[m]),
        _ => ray(),
    }
}

/// Best point of the grid `{k * h : sum k = 1/h}` on the simplex.
///
/// Along the last two coordinates the objective is a concave parabola, so the
/// grid maximum on that line is one of the two grid points bracketing the
/// continuous maximizer; the remaining coordinates are enumerated.
pub fn brute_force_lambda(bundle: &QuadraticBundle, resolution: f64) -> Result<SimplexWeights> {
    let t = bundle.len();
    if t == 0 {
        return Err(Error::EmptyBundle);
    }
    if t > 4 {
        return Err(Error::BundleTooLarge(t));
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::InvalidParameter(format!("grid resolution {resolution}")));
    }
    if t == 1 {
        return Ok(SimplexWeights::vertex(1, 0));
    }
    let m = (1.0 / resolution).round() as usize;
    let gram = bundle.gram();
    let linear = bundle.linear_coefficients();
    let eval = |counts: &[usize]| -> f64 {
        let mut lambda = [0.0; 4];
        for (l, &k) in lambda.iter_mut().zip(counts) {
            *l = k as f64 / m as f64;
        }
        bundle.value_from_gram(&gram, &linear, &lambda[..t])
    };
    let mut best_counts = vec![0usize; t];
    best_counts[0] = m;
    let mut best_value = eval(&best_counts);
    let mut prefix = vec![0usize; t];
    search_prefix(0, t, m, &mut prefix, &mut |counts: &mut Vec<usize>, rest: usize| {
        // Split `rest` between coordinates t-2 and t-1.
        let (i, j) = (t - 2, t - 1);
        counts[i] = 0;
        counts[j] = rest;
        let v0 = eval(counts);
        counts[i] = rest;
        counts[j] = 0;
        let v1 = eval(counts);
        let h = 1.0 / m as f64;
        let curv = bundle.curvature * (gram[i][i] - 2.0 * gram[i][j] + gram[j][j]) * h * h;
        // v(k) = v0 + s k - curv k^2 / 2 with v(rest) = v1, where k is the
        // count on coordinate i
        let mut best_here = if v1 > v0 { (rest, v1) } else { (0, v0) };
        if curv > 0.0 && rest > 0 {
            let r = rest as f64;
            let slope = (v1 - v0) / r + 0.5 * curv * r;
            let kstar = (slope / curv).clamp(0.0, r);
            for k in [kstar.floor() as usize, (kstar.ceil() as usize).min(rest)] {
                let kf = k as f64;
                let v = v0 + slope * kf - 0.5 * curv * kf * kf;
                if v > best_here.1 {
                    best_here = (k, v);
                }
            }
        }
        if best_here.1 > best_value {
            best_value = best_here.1;
            counts[i] = best_here.0;
            counts[j] = rest - best_here.0;
            best_counts.clone_from(counts);
        }
    });
    Ok(SimplexWeights::from_raw(
        best_counts.iter().map(|&k| k as f64 / m as f64).collect(),
    ))
}

fn search_prefix(
    depth: usize,
    t: usize,
    remaining: usize,
    counts: &mut Vec<usize>,
    leaf: &mut dyn FnMut(&mut Vec<usize>, usize),
) {
    if depth == t - 2 {
        leaf(counts, remaining);
        return;
    }
    for k in 0..=remaining {
        counts[depth] = k;
        search_prefix(depth + 1, t, remaining - k, counts, leaf);
    }
    counts[depth] = 0;
}

/// Why a multi-ball result falls outside the guaranteed regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MebWarning {
    /// More balls than `dim - 1`: the result encloses the intersection but
    /// need not be the smallest such ball.
    TooManyBalls { balls: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MebOutcome {
    pub ball: Ball,
    pub weights: SimplexWeights,
    pub warning: Option<MebWarning>,
}

/// Minimal enclosing ball of `∩ balls`, via optimal averaging of the
/// quadratics whose sublevel sets at a common level are the balls.
pub fn min_enclosing_ball_multi(balls: &[Ball], alpha: f64) -> Result<MebOutcome> {
    let first = balls.first().ok_or(Error::EmptyBundle)?;
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveCurvature(alpha));
    }
    let n = first.center.len();
    let level = alpha * balls.iter().map(|b| b.squared_radius).fold(0.0, f64::max);
    let quadratics = balls
        .iter()
        .map(|b| {
            check_dim(n, b.center.len())?;
            crate::quadratic::quadratic_from_ball(b, level, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    let bundle = QuadraticBundle::from_quadratics(&quadratics)?;
    let (q, weights) = optimal_average_multi(&bundle, None)?;
    let squared_radius = 2.0 / alpha * (level - q.min_value);
    if squared_radius < 0.0 {
        return Err(Error::EmptyIntersection(squared_radius));
    }
    let warning = (balls.len() + 1 > n).then_some(MebWarning::TooManyBalls {
        balls: balls.len(),
        dim: n,
    });
    Ok(MebOutcome {
        ball: Ball {
            center: q.center,
            squared_radius,
        },
        weights,
        warning,
    })
}
