//! The acceptance checks behind `quadavg verify`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    load_dataset, parse_csv_trace, relative_gap, write_compare_csv, write_csv_trace, ComparedRun, HarnessError,
    HarnessResult, EXIT_CONVERGED, EXIT_VERIFY_FAILED,
};
use crate::objectives::{
    gradient_mapping, logistic_loss, long_step, random_quadratic, worst_function, CompositeObjective, Dataset, L1Norm,
    Objective,
};
use crate::quadratic::{min_enclosing_ball_two, optimal_average_two, Ball, CanonicalQuadratic};
use crate::simplex_qp::{
    average_multi, brute_force_lambda, min_enclosing_ball_multi, optimal_average_multi, QuadraticBundle,
};
use crate::solvers::{
    geometric_descent_run, nesterov_exact_ls_run, nesterov_run, oqa_memory_run, oqa_run, prox_suboptimal_geo_run,
    suboptimal_geometric_descent_run, BoundKind, SolverConfig, SolverOutput, SolverTrace, StopReason,
};
use crate::vecops::{axpy, dist_sq, dot, norm, norm_sq, sub};

/// Bundled logistic instance with 200 rows and 30 features.
pub const SMALL_DATASET: &str = "logistic_200x30.svm";
/// Bundled logistic instance with 60 rows and 500 features.
pub const WIDE_DATASET: &str = "logistic_60x500.svm";

/// Generator parameters of the bundled files: `(name, rows, features, density, seed)`.
pub const BUNDLED: [(&str, usize, usize, f64, u64); 2] =
    [(SMALL_DATASET, 200, 30, 0.3, 2016), (WIDE_DATASET, 60, 500, 0.5, 62)];

pub fn default_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub data_dir: PathBuf,
    /// Where to write the traces produced along the way.
    pub trace_dir: Option<PathBuf>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            data_dir: default_data_dir(),
            trace_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Everything a verification pass produced.
pub struct Verification {
    pub reports: Vec<CriterionReport>,
    /// `(file name, contents)` of the emitted traces.
    pub traces: Vec<(String, Vec<u8>)>,
}

impl Verification {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

type Check = std::result::Result<String, String>;

fn e3(x: f64) -> String {
    format!("{x:.3e}")
}

fn rng_for(seed: u64, criterion: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(criterion);
    rng
}

fn within(start: Instant, limit: Duration, detail: String) -> Check {
    let took = start.elapsed();
    if took > limit {
        Err(format!(
            "{detail}; took {:.2}s, limit {}s",
            took.as_secs_f64(),
            limit.as_secs()
        ))
    } else {
        Ok(detail)
    }
}

fn csv_bytes(trace: &SolverTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv_trace(trace, &mut buf).expect("writing to memory");
    buf
}

fn exact_config(iterations: usize) -> SolverConfig {
    SolverConfig {
        max_iterations: iterations,
        gap_tolerance: f64::MIN_POSITIVE,
        ..SolverConfig::default()
    }
}

fn worst_oqa() -> std::result::Result<SolverOutput, String> {
    let f = worst_function(100.0, 50).map_err(|e| e.to_string())?;
    oqa_run(&f, &[0.0; 50], &exact_config(300)).map_err(|e| e.to_string())
}

fn check_rate_bound(out: &SolverOutput, elapsed: Duration) -> Check {
    let f = worst_function(100.0, 50).map_err(|e| e.to_string())?;
    let (_, fstar) = f.known_minimum().ok_or("no known minimum")?;
    let t = &out.trace;
    let q = 1.0 - 1.0 / f.condition_number().sqrt();
    let g0 = t.records[0].gap;
    let mut worst_ratio: f64 = 0.0;
    for r in &t.records {
        let bound = q.powi(r.k as i32) * g0;
        worst_ratio = worst_ratio.max(r.gap / bound);
        if r.gap > bound * (1.0 + 1e-8) {
            return Err(format!("k={}: gap {} above bound {}", r.k, e3(r.gap), e3(bound)));
        }
        if r.v > fstar + 1e-9 * t.scale || fstar > r.f_plus + 1e-9 * t.scale {
            return Err(format!("k={}: bracket v <= f* <= f(x+) violated", r.k));
        }
    }
    if elapsed > Duration::from_secs(1) {
        return Err(format!("took {:.2}s, limit 1s", elapsed.as_secs_f64()));
    }
    Ok(format!(
        "{} iterations ({}), max g_k / bound = {}",
        t.iterations(),
        t.stop_reason.map_or("-".into(), |s| s.to_string()),
        e3(worst_ratio)
    ))
}

fn check_contraction(out: &SolverOutput) -> Check {
    let kappa: f64 = 401.0;
    let q = 1.0 - 1.0 / kappa.sqrt();
    let t = &out.trace;
    let mut worst: f64 = 0.0;
    for w in t.records.windows(2) {
        let ratio = w[1].gap / w[0].gap;
        worst = worst.max(ratio);
        if ratio > q * (1.0 + 1e-8) {
            return Err(format!("k={}: g_k/g_(k-1) = {} > {}", w[1].k, ratio, q));
        }
    }
    Ok(format!(
        "max g_k/g_(k-1) = {} <= {} over {} steps",
        e3(worst),
        e3(q),
        t.iterations()
    ))
}

fn check_equivalence() -> std::result::Result<(String, SolverOutput), String> {
    let start = Instant::now();
    let f = random_quadratic(20, 1.0, 100.0, 7).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        record_centers: true,
        gap_floor: 0.0,
        ..exact_config(100)
    };
    let x0 = vec![0.0; 20];
    let a = oqa_run(&f, &x0, &cfg).map_err(|e| e.to_string())?;
    let b = geometric_descent_run(&f, &x0, &cfg).map_err(|e| e.to_string())?;
    let (ra, rb) = (&a.trace.records, &b.trace.records);
    if ra.len() != 101 || rb.len() != 101 {
        return Err(format!("runs stopped early: {} and {} records", ra.len(), rb.len()));
    }
    let scale = a.trace.scale;
    let mut worst_x: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    for (p, q) in ra.iter().zip(rb) {
        let (xa, xb) = (p.iterate.as_ref().unwrap(), q.iterate.as_ref().unwrap());
        let (ca, cb) = (p.center.as_ref().unwrap(), q.center.as_ref().unwrap());
        let dx = dist_sq(xa, xb).sqrt() / (1.0 + norm(xa));
        let dc = dist_sq(ca, cb).sqrt() / (1.0 + norm(ca));
        let r2 = q.squared_radius.ok_or("geometric run records no radius")?;
        let dv = (p.v - (q.f_plus - 0.5 * f.alpha() * r2)).abs() / scale;
        worst_x = worst_x.max(dx).max(dc);
        worst_v = worst_v.max(dv);
        if dx > 1e-8 || dc > 1e-8 || dv > 1e-8 {
            return Err(format!("k={}: dx {} dc {} dv {}", p.k, e3(dx), e3(dc), e3(dv)));
        }
    }
    let detail = within(
        start,
        Duration::from_secs(1),
        format!(
            "100 iterations, max relative point difference {}, max value difference {}",
            e3(worst_x),
            e3(worst_v)
        ),
    )?;
    Ok((detail, a))
}

fn check_gap_domination(traces: &[&SolverTrace], table: &[u8]) -> Check {
    let mut rows = 0;
    for t in traces {
        for r in &t.records {
            rows += 1;
            if r.gap > r.g_classical + 1e-12 * t.scale {
                return Err(format!("{} k={}: g_k {} > G_k {}", t.solver, r.k, r.gap, r.g_classical));
            }
            let rel = relative_gap(r);
            if !(0.0..=1.0).contains(&rel) {
                return Err(format!("{} k={}: relative gap {rel}", t.solver, r.k));
            }
        }
    }
    let text = std::str::from_utf8(table).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rel_cols: Vec<usize> = (0..header.len()).filter(|&i| header[i].ends_with("_relgap")).collect();
    if rel_cols.is_empty() {
        return Err("comparison table has no relative-gap column".into());
    }
    let mut cells = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        for &i in &rel_cols {
            if fields[i].is_empty() {
                continue;
            }
            let v: f64 = fields[i].parse().map_err(|_| format!("bad cell {:?}", fields[i]))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("emitted relative gap {v} outside [0, 1]"));
            }
            cells += 1;
        }
    }
    Ok(format!(
        "{rows} records over {} runs, {cells} emitted relative gaps in [0, 1]",
        traces.len()
    ))
}

fn random_bundle(rng: &mut ChaCha8Rng, t: usize, n: usize) -> QuadraticBundle {
    let alpha = rng.random_range(0.5..2.0);
    let qs: Vec<CanonicalQuadratic> = (0..t)
        .map(|_| {
            let c = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            CanonicalQuadratic::new(rng.random_range(-1.0..1.0), c, alpha).expect("positive curvature")
        })
        .collect();
    QuadraticBundle::from_quadratics(&qs).expect("compatible bundle")
}

fn bundle_scale(b: &QuadraticBundle) -> f64 {
    let mut s: f64 = 0.0;
    for i in 0..b.len() {
        s = s.max(b.member(i).min_value.abs());
        for j in 0..b.len() {
            s = s.max(b.curvature() * dist_sq(&b.member(i).center, &b.member(j).center));
        }
    }
    1.0 + s
}

fn check_qp_oracle(seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng_for(seed, 5);
    let (mut worst_grid, mut worst_pair, mut pairs): (f64, f64, usize) = (0.0, 0.0, 0);
    for trial in 0..200 {
        let t = rng.random_range(1..=4);
        let n = rng.random_range(1..=10);
        let bundle = random_bundle(&mut rng, t, n);
        let scale = bundle_scale(&bundle);
        let err = |e: crate::Error| format!("trial {trial}: {e}");
        let (q, _) = optimal_average_multi(&bundle, None).map_err(err)?;
        let grid = brute_force_lambda(&bundle, 1e-3).map_err(err)?;
        let v_grid = average_multi(&bundle, &grid).map_err(err)?.min_value;
        let d = (q.min_value - v_grid).abs() / scale;
        worst_grid = worst_grid.max(d);
        if d > 1e-2 {
            return Err(format!("trial {trial} (t={t}, n={n}): |v - v_grid| = {} scale", e3(d)));
        }
        if t == 2 {
            pairs += 1;
            let (closed, _) = optimal_average_two(bundle.member(0), bundle.member(1)).map_err(err)?;
            let d = (closed.min_value - q.min_value).abs();
            worst_pair = worst_pair.max(d);
            if d > 1e-10 {
                return Err(format!("trial {trial}: closed form differs by {}", e3(d)));
            }
        }
    }
    within(
        start,
        Duration::from_secs(10),
        format!(
            "200 bundles, max |v - v_grid| / scale {}, {pairs} pairs within {} of closed form",
            e3(worst_grid),
            e3(worst_pair)
        ),
    )
}

fn logistic(data: &Dataset, alpha: f64) -> std::result::Result<crate::objectives::LogisticLoss, String> {
    logistic_loss(data.clone(), alpha).map_err(|e| e.to_string())
}

fn memory_runs(data: &Dataset) -> std::result::Result<(SolverOutput, SolverOutput, Duration), String> {
    let start = Instant::now();
    let f = logistic(data, 1e-4)?;
    let cfg = |memory| SolverConfig {
        memory,
        gap_tolerance: 1e-6,
        max_iterations: 20_000,
        ..SolverConfig::default()
    };
    let x0 = vec![0.0; f.dimension()];
    let one = oqa_memory_run(&f, &x0, &cfg(1)).map_err(|e| e.to_string())?;
    let five = oqa_memory_run(&f, &x0, &cfg(5)).map_err(|e| e.to_string())?;
    Ok((one, five, start.elapsed()))
}

fn check_memory(one: &SolverOutput, five: &SolverOutput, elapsed: Duration) -> Check {
    let (i1, i5) = (one.trace.iterations(), five.trace.iterations());
    let detail = format!("memory 5: {i5} iterations, memory 1: {i1} iterations to gap 1e-6");
    if five.trace.stop_reason != Some(StopReason::GapTolerance) {
        return Err(format!("{detail}; memory 5 did not reach the tolerance"));
    }
    if i5 > i1 {
        return Err(detail);
    }
    if elapsed > Duration::from_secs(5) {
        return Err(format!("{detail}; took {:.2}s, limit 5s", elapsed.as_secs_f64()));
    }
    Ok(detail)
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&u);
        if l > 1e-6 {
            return u.iter().map(|x| x / l).collect();
        }
    }
}

/// Largest `s >= 0` with `p + s u` in every ball; `p` must lie in all of them.
fn max_step(balls: &[Ball], p: &[f64], u: &[f64]) -> f64 {
    balls
        .iter()
        .map(|b| {
            let w = sub(p, &b.center);
            let wu = dot(&w, u);
            let c = norm_sq(&w) - b.squared_radius;
            (-wu + (wu * wu - c).max(0.0).sqrt()).max(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_multi_ball(seed: u64) -> Check {
    let mut rng = rng_for(seed, 7);
    let mut worst: f64 = f64::NEG_INFINITY;
    for trial in 0..100 {
        let n = rng.random_range(2..=10);
        let t = rng.random_range(1..n);
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let balls: Vec<Ball> = (0..t)
            .map(|_| {
                let d = rng.random_range(0.2..1.5);
                let r = d + rng.random_range(0.05..1.0);
                Ball {
                    center: axpy(&p, d, &unit_vector(&mut rng, n)),
                    squared_radius: r * r,
                }
            })
            .collect();
        let out = min_enclosing_ball_multi(&balls, 1.0).map_err(|e| format!("trial {trial}: {e}"))?;
        if out.warning.is_some() {
            return Err(format!("trial {trial}: unexpected warning {:?}", out.warning));
        }
        for s in 0..10_000 {
            let u = unit_vector(&mut rng, n);
            let reach = max_step(&balls, &p, &u);
            let frac = if s % 2 == 0 { 1.0 } else { rng.random::<f64>() };
            let x = axpy(&p, frac * reach, &u);
            let excess = dist_sq(&x, &out.ball.center) - out.ball.squared_radius;
            worst = worst.max(excess);
            if excess > 1e-10 {
                return Err(format!("trial {trial}: sampled point outside by {}", e3(excess)));
            }
        }
    }
    let e = |i: usize| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let balls: Vec<Ball> = (0..3)
        .map(|i| Ball {
            center: e(i),
            squared_radius: 1.0,
        })
        .collect();
    let out = min_enclosing_ball_multi(&balls, 1.0).map_err(|e| e.to_string())?;
    let third = 1.0 / 3.0;
    let expected = [third, third, third, 0.0];
    if dist_sq(&out.ball.center, &expected).sqrt() > 1e-10 || (out.ball.squared_radius - third).abs() > 1e-10 {
        return Err(format!(
            "symmetric instance gave center {:?}, R^2 {}",
            out.ball.center, out.ball.squared_radius
        ));
    }
    Ok(format!(
        "100 instances x 10^4 samples, max excess {}; symmetric instance exact",
        e3(worst)
    ))
}

/// One random instance of the intersection lemma: returns
/// `R^2 - (1 - eps) R_0^2` for the enclosing ball of
/// `B(x, R_0^2) ∩ B(x + h, (1 - eps) ||h||^2)`, or `None` if it is empty.
pub fn intersection_lemma_slack(rng: &mut ChaCha8Rng) -> crate::Result<Option<f64>> {
    let n = rng.random_range(1..=10);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let r2: f64 = rng.random_range(0.1..4.0);
    let h = crate::vecops::scale(&unit_vector(rng, n), rng.random_range(0.01..3.0));
    let eps: f64 = rng.random_range(0.01..0.99);
    let b2 = (1.0 - eps) * norm_sq(&h);
    if norm(&h) > r2.sqrt() + b2.sqrt() {
        return Ok(None);
    }
    let ball = min_enclosing_ball_two(&Ball::new(x.clone(), r2)?, &Ball::new(axpy(&x, 1.0, &h), b2)?)?;
    Ok(Some(ball.squared_radius - (1.0 - eps) * r2))
}

/// One random instance of the two-ball shrinking lemma: returns
/// `R^2 - ((1 - sqrt(eps)) r_A^2 - delta)`, or `None` if the instance is
/// outside the hypotheses or the intersection is empty.
pub fn shrinking_lemma_slack(rng: &mut ChaCha8Rng) -> crate::Result<Option<f64>> {
    let n = rng.random_range(1..=10);
    let x_a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = rng.random_range(0.1..2.0);
    let x_b = axpy(&x_a, d, &unit_vector(rng, n));
    let rb2 = d * d * rng.random_range(0.05..1.0);
    let ra2 = rng.random_range(0.05..4.0);
    let eps: f64 = rng.random_range(0.01..0.99);
    let room = (ra2 - eps * rb2).min((1.0 - eps) * rb2);
    if room <= 0.0 {
        return Ok(None);
    }
    let delta = rng.random_range(0.0..0.9) * room;
    let (sa, sb) = (ra2 - eps * rb2 - delta, (1.0 - eps) * rb2 - delta);
    if d > sa.sqrt() + sb.sqrt() {
        return Ok(None);
    }
    let ball = min_enclosing_ball_two(&Ball::new(x_a, sa)?, &Ball::new(x_b, sb)?)?;
    Ok(Some(ball.squared_radius - ((1.0 - eps.sqrt()) * ra2 - delta)))
}

fn lemma_pass(
    rng: &mut ChaCha8Rng,
    name: &str,
    check: fn(&mut ChaCha8Rng) -> crate::Result<Option<f64>>,
) -> std::result::Result<f64, String> {
    let (mut done, mut tries) = (0, 0);
    let mut worst = f64::NEG_INFINITY;
    while done < 500 {
        tries += 1;
        if tries > 100_000 {
            return Err(format!("{name}: could not draw 500 valid instances"));
        }
        if let Some(slack) = check(rng).map_err(|e| format!("{name}: {e}"))? {
            done += 1;
            worst = worst.max(slack);
            if slack > 1e-10 {
                return Err(format!("{name}: radius exceeds the bound by {}", e3(slack)));
            }
        }
    }
    Ok(worst)
}

fn check_lemmas(seed: u64) -> Check {
    let mut rng = rng_for(seed, 8);
    let a = lemma_pass(&mut rng, "intersection", intersection_lemma_slack)?;
    let b = lemma_pass(&mut rng, "two balls", shrinking_lemma_slack)?;
    Ok(format!(
        "500 + 500 instances, max R^2 minus bound {} and {}",
        e3(a),
        e3(b)
    ))
}

fn nesterov_traces() -> std::result::Result<(SolverOutput, SolverOutput), String> {
    let f = worst_function(100.0, 50).map_err(|e| e.to_string())?;
    let x0 = vec![0.0; 50];
    let c0 = long_step(&f, &x0);
    let cfg = SolverConfig {
        gap_floor: 0.0,
        ..exact_config(300)
    };
    let a = nesterov_run(&f, &x0, &c0, f.alpha(), &cfg).map_err(|e| e.to_string())?;
    let b = nesterov_exact_ls_run(&f, &x0, &cfg).map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn check_nesterov(a: &SolverOutput, b: &SolverOutput) -> Check {
    let expected = 1.0 / 401f64.sqrt();
    let mut worst_l: f64 = 0.0;
    for out in [a, b] {
        let t = &out.trace;
        if t.records.len() != 301 {
            return Err(format!("{} stopped after {} iterations", t.solver, t.iterations()));
        }
        for s in &out.nesterov_states {
            worst_l = worst_l.max((s.lambda - expected).abs());
        }
        if worst_l > 1e-12 {
            return Err(format!("{}: lambda off by {}", t.solver, e3(worst_l)));
        }
        for r in &t.records {
            if r.f_plus > r.v + 1e-10 * t.scale {
                return Err(format!("{} k={}: f(x+) > v_k", t.solver, r.k));
            }
        }
    }
    Ok(format!(
        "both variants, 300 iterations, max |lambda_k - 1/sqrt(kappa)| {}",
        e3(worst_l)
    ))
}

/// Long proximal-gradient run at step `1/beta` from the origin.
pub fn proximal_gradient_reference(comp: &CompositeObjective, iterations: usize) -> crate::Result<Vec<f64>> {
    let t = 1.0 / comp.smooth.beta();
    let mut x = vec![0.0; comp.smooth.dimension()];
    for _ in 0..iterations {
        let g = gradient_mapping(comp, &x, t)?;
        x = axpy(&x, -t, &g);
    }
    Ok(x)
}

fn radius_contraction(out: &SolverOutput, kappa: f64, reference: Option<&[f64]>) -> std::result::Result<f64, String> {
    let t = &out.trace;
    let r0 = t.records[0].squared_radius.ok_or("no radius recorded")?;
    let q = 1.0 - 1.0 / kappa;
    let mut worst: f64 = 0.0;
    for r in &t.records {
        let r2 = r.squared_radius.ok_or("no radius recorded")?;
        let bound = q.powi(r.k as i32) * r0;
        worst = worst.max(r2 / bound);
        if r2 > bound * (1.0 + 1e-8) {
            return Err(format!("{} k={}: R^2 {} above {}", t.solver, r.k, e3(r2), e3(bound)));
        }
        if let (Some(xs), Some(c)) = (reference, r.center.as_ref()) {
            let d2 = dist_sq(c, xs);
            if d2 > r2 + 1e-8 * (1.0 + r0) {
                return Err(format!("{} k={}: reference minimizer outside the ball", t.solver, r.k));
            }
        }
    }
    Ok(worst)
}

fn check_suboptimal(seed: u64) -> Check {
    let mut rng = rng_for(seed, 10);
    let mut worst: f64 = 0.0;
    for kappa in [25.0, 100.0] {
        let f = random_quadratic(20, 1.0, kappa, rng.random()).map_err(|e| e.to_string())?;
        let x0: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cfg = SolverConfig {
            record_centers: true,
            ..exact_config(150)
        };
        let smooth = suboptimal_geometric_descent_run(&f, &x0, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(radius_contraction(&smooth, kappa, f.known_minimum().map(|m| m.0))?);

        let comp = CompositeObjective::new(Arc::new(f), Arc::new(L1Norm { weight: 0.1 }));
        let reference = proximal_gradient_reference(&comp, 20_000).map_err(|e| e.to_string())?;
        let prox = prox_suboptimal_geo_run(&comp, &x0, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(radius_contraction(&prox, kappa, Some(&reference))?);
    }
    Ok(format!(
        "kappa 25 and 100, smooth and 0.1*l1, max R_k^2 / bound {}",
        e3(worst)
    ))
}

fn check_gradient_mapping_inequality(seed: u64) -> Check {
    let mut rng = rng_for(seed, 11);
    let f = random_quadratic(10, 1.0, 50.0, rng.random()).map_err(|e| e.to_string())?;
    let (alpha, beta) = (f.alpha(), f.beta());
    let comp = CompositeObjective::new(Arc::new(f), Arc::new(L1Norm { weight: 0.1 }));
    let t = 1.0 / beta;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = gradient_mapping(&comp, &x, t).map_err(|e| e.to_string())?;
        let x_plus = axpy(&x, -t, &g);
        let (fx, fy) = (comp.value(&x), comp.value(&y));
        let rhs = comp.value(&x_plus)
            + dot(&g, &sub(&y, &x))
            + t * (1.0 - beta * t / 2.0) * norm_sq(&g)
            + 0.5 * alpha * dist_sq(&y, &x);
        let slack = (fy - rhs) / (1.0 + fx.abs() + fy.abs());
        worst = worst.min(slack);
        if slack < -1e-10 {
            return Err(format!("slack {} at a sampled pair", e3(slack)));
        }
    }
    Ok(format!("1000 pairs, min slack / scale {}", e3(worst)))
}

fn fd_error(obj: &dyn Objective, rng: &mut ChaCha8Rng, points: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x: Vec<f64> = (0..obj.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = obj.gradient(&x);
        let mut diff = 0.0;
        for i in 0..x.len() {
            let h = 1e-5 * (1.0 + x[i].abs());
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (xp[i] - xm[i]);
            diff += (fd - g[i]) * (fd - g[i]);
        }
        worst = worst.max(diff.sqrt() / norm(&g).max(1e-12));
    }
    worst
}

fn check_gradients(seed: u64, small: &Dataset, wide: &Dataset) -> Check {
    let mut rng = rng_for(seed, 12);
    let objectives: Vec<(&str, Box<dyn Objective>)> = vec![
        ("worst", Box::new(worst_function(100.0, 50).map_err(|e| e.to_string())?)),
        (
            "quadratic",
            Box::new(random_quadratic(20, 1.0, 100.0, rng.random()).map_err(|e| e.to_string())?),
        ),
        (SMALL_DATASET, Box::new(logistic(small, 1e-4)?)),
        (WIDE_DATASET, Box::new(logistic(wide, 1e-4)?)),
    ];
    let mut parts = Vec::new();
    for (name, obj) in &objectives {
        let err = fd_error(&**obj, &mut rng, 50);
        if err > 1e-5 {
            return Err(format!("{name}: relative error {}", e3(err)));
        }
        parts.push(format!("{name} {}", e3(err)));
    }
    Ok(format!("50 points each, max relative error: {}", parts.join(", ")))
}

fn report(id: u8, name: &'static str, check: Check) -> CriterionReport {
    let (passed, detail) = match check {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionReport {
        id,
        name,
        passed,
        detail,
    }
}

/// Reads the bundled datasets from `dir`.
pub fn load_bundled(dir: &Path) -> HarnessResult<(Dataset, Dataset)> {
    Ok((
        load_dataset(&dir.join(SMALL_DATASET))?,
        load_dataset(&dir.join(WIDE_DATASET))?,
    ))
}

/// Runs every criterion. Only missing or unreadable data is an error;
/// everything else is reported as a failure.
pub fn run_criteria(opts: &VerifyOptions) -> HarnessResult<Verification> {
    let (small, wide) = load_bundled(&opts.data_dir)?;
    let mut reports = Vec::new();
    let mut traces: Vec<(String, Vec<u8>)> = Vec::new();
    let mut oqa_traces: Vec<SolverTrace> = Vec::new();

    let start = Instant::now();
    match worst_oqa() {
        Ok(out) => {
            let elapsed = start.elapsed();
            reports.push(report(1, "rate bound", check_rate_bound(&out, elapsed)));
            reports.push(report(2, "per-step contraction", check_contraction(&out)));
            traces.push(("oqa_worst.csv".into(), csv_bytes(&out.trace)));
            oqa_traces.push(out.trace);
        }
        Err(e) => {
            reports.push(report(1, "rate bound", Err(e.clone())));
            reports.push(report(2, "per-step contraction", Err(e)));
        }
    }

    match check_equivalence() {
        Ok((detail, out)) => {
            reports.push(report(3, "iterate equivalence", Ok(detail)));
            traces.push(("oqa_quadratic.csv".into(), csv_bytes(&out.trace)));
            oqa_traces.push(out.trace);
        }
        Err(e) => reports.push(report(3, "iterate equivalence", Err(e))),
    }

    let memory = memory_runs(&small);
    let mut table = Vec::new();
    if let Ok((one, five, _)) = &memory {
        let runs = [
            ComparedRun {
                label: "oqa-mem:memory=1".into(),
                trace: one.trace.clone(),
                error: None,
            },
            ComparedRun {
                label: "oqa-mem:memory=5".into(),
                trace: five.trace.clone(),
                error: None,
            },
        ];
        write_compare_csv(&runs, &mut table).expect("writing to memory");
        traces.push(("oqa_mem1_logistic.csv".into(), csv_bytes(&one.trace)));
        traces.push(("oqa_mem5_logistic.csv".into(), csv_bytes(&five.trace)));
        traces.push(("compare_logistic.csv".into(), table.clone()));
        oqa_traces.push(one.trace.clone());
        oqa_traces.push(five.trace.clone());
    }
    let refs: Vec<&SolverTrace> = oqa_traces.iter().collect();
    let domination = match &memory {
        Ok(_) => check_gap_domination(&refs, &table),
        Err(e) => Err(e.clone()),
    };
    reports.push(report(4, "gap domination", domination));
    reports.push(report(5, "QP oracle equivalence", check_qp_oracle(opts.seed)));
    reports.push(report(
        6,
        "memory speedup",
        memory.and_then(|(one, five, elapsed)| check_memory(&one, &five, elapsed)),
    ));
    reports.push(report(7, "multi-ball enclosing", check_multi_ball(opts.seed)));
    reports.push(report(8, "shrinking lemmas", check_lemmas(opts.seed)));
    match nesterov_traces() {
        Ok((a, b)) => {
            reports.push(report(9, "Nesterov invariants", check_nesterov(&a, &b)));
            traces.push(("nesterov_worst.csv".into(), csv_bytes(&a.trace)));
            traces.push(("nesterov_ls_worst.csv".into(), csv_bytes(&b.trace)));
        }
        Err(e) => reports.push(report(9, "Nesterov invariants", Err(e))),
    }
    reports.push(report(10, "suboptimal rates", check_suboptimal(opts.seed)));
    reports.push(report(
        11,
        "gradient mapping inequality",
        check_gradient_mapping_inequality(opts.seed),
    ));
    reports.push(report(
        12,
        "gradient correctness",
        check_gradients(opts.seed, &small, &wide),
    ));
    reports.push(report(13, "determinism", check_determinism(&traces)));
    Ok(Verification { reports, traces })
}

/// Reruns the worst-function runs and compares the serialized traces, and
/// checks that every emitted trace parses back to the same bytes.
fn check_determinism(traces: &[(String, Vec<u8>)]) -> Check {
    let again = worst_oqa()?;
    let (a, b) = nesterov_traces()?;
    let reruns = [
        ("oqa_worst.csv", csv_bytes(&again.trace)),
        ("nesterov_worst.csv", csv_bytes(&a.trace)),
        ("nesterov_ls_worst.csv", csv_bytes(&b.trace)),
    ];
    for (name, bytes) in &reruns {
        match traces.iter().find(|(n, _)| n == name) {
            Some((_, first)) if first == bytes => {}
            Some(_) => return Err(format!("{name} differs between runs")),
            None => return Err(format!("{name} missing")),
        }
    }
    for (name, bytes) in traces {
        if name.starts_with("compare") {
            continue;
        }
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        let records = parse_csv_trace(text).map_err(|e| format!("{name}: {e}"))?;
        let mut t = SolverTrace::new(name, BoundKind::LowerBound);
        t.records = records;
        if csv_bytes(&t) != *bytes {
            return Err(format!("{name} does not round-trip"));
        }
    }
    Ok(format!(
        "{} reruns identical, {} traces round-trip",
        reruns.len(),
        traces.len()
    ))
}

/// Runs the checks, prints one line per criterion and writes the traces.
pub fn cmd_verify(opts: &VerifyOptions, out: &mut dyn Write) -> HarnessResult<i32> {
    let v = run_criteria(opts)?;
    if let Some(dir) = &opts.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::output(dir, e))?;
        for (name, bytes) in &v.traces {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| HarnessError::output(&path, e))?;
        }
    }
    for r in &v.reports {
        let _ = writeln!(out, "{r}");
    }
    let passed = v.reports.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} criteria passed (seed {})", v.reports.len(), opts.seed);
    Ok(if v.all_passed() {
        EXIT_CONVERGED
    } else {
        EXIT_VERIFY_FAILED
    })
}
