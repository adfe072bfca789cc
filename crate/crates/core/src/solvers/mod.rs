//! Iteration schemes and their traces.

mod geometric;
mod gradient;
mod nesterov;
mod oqa;
mod trace;

pub use geometric::{geometric_descent_run, prox_suboptimal_geo_run, suboptimal_geometric_descent_run, GeoState};
pub use gradient::gradient_descent_run;
pub use nesterov::{nesterov_exact_ls_run, nesterov_lambda_step, nesterov_run, NesterovState};
pub use oqa::{oqa_memory_run, oqa_run};
pub use trace::{BoundKind, IterationRecord, SolverFailure, SolverOutput, SolverResult, SolverTrace, StopReason};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linesearch::short_step_ls_with_gradient;
use crate::objectives::Objective;
use crate::vecops::axpy;

/// How `x^+` is produced from `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortStepRule {
    /// Minimize along the ray `x - s grad f(x)`; needs no `beta`.
    #[default]
    LineSearch,
    /// `x - grad f(x) / beta`.
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the reported gap is at most this.
    pub gap_tolerance: f64,
    pub line_search_tol: f64,
    /// Number of past lower models kept by the memory variant.
    pub memory: usize,
    /// Relative multiplier tolerance of the simplex QP.
    pub qp_tolerance: f64,
    /// Keep `c_k` and `x_k` in every record.
    pub record_centers: bool,
    /// Use an objective's closed-form segment minimizer when it has one.
    pub closed_form_line_search: bool,
    pub short_step: ShortStepRule,
    /// Fill `elapsed` with wall-clock seconds instead of zero.
    pub timing: bool,
    /// Gaps at most `gap_floor * scale` count as converged; below that the
    /// difference `f_plus - v` is dominated by rounding. Zero disables it.
    pub gap_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            gap_tolerance: 1e-8,
            line_search_tol: crate::linesearch::DEFAULT_TOL,
            memory: 1,
            qp_tolerance: crate::simplex_qp::DEFAULT_QP_TOL,
            record_centers: false,
            closed_form_line_search: true,
            short_step: ShortStepRule::LineSearch,
            timing: false,
            gap_floor: DEFAULT_GAP_FLOOR,
        }
    }
}

/// Default relative resolution of a certified gap.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-14;

impl SolverConfig {
    /// Effective absolute gap tolerance for a run with the given scale.
    pub fn effective_gap_tolerance(&self, scale: f64) -> f64 {
        self.gap_tolerance.max(self.gap_floor * scale)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gap_tolerance", self.gap_tolerance),
            ("line_search_tol", self.line_search_tol),
            ("qp_tolerance", self.qp_tolerance),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gap_floor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gap_floor must be nonnegative, got {}",
                self.gap_floor
            )));
        }
        if self.memory == 0 {
            return Err(Error::InvalidParameter("memory must be at least 1".into()));
        }
        Ok(())
    }
}

/// `x^+` and `f(x^+)` under the configured rule.
fn plus_step(obj: &dyn Objective, x: &[f64], g: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, f64)> {
    match cfg.short_step {
        ShortStepRule::LineSearch => {
            short_step_ls_with_gradient(obj, x, g, cfg.line_search_tol, cfg.closed_form_line_search)
        }
        ShortStepRule::Beta => {
            let p = axpy(x, -1.0 / obj.beta(), g);
            let fp = obj.value(&p);
            Ok((p, fp))
        }
    }
}

fn check_start(obj: &dyn Objective, x0: &[f64], cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    crate::error::check_dim(obj.dimension(), x0.len())?;
    if !crate::vecops::all_finite(x0) {
        return Err(Error::NonFinite("starting point".into()));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testing {
    use super::SolverTrace;
    use crate::objectives::{gradient_mapping, CompositeObjective};
    use crate::vecops::axpy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn random_start(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    /// Record invariants, monotone bounds and gap domination.
    pub fn assert_lower_bound_trace(t: &SolverTrace) {
        assert!(t.invariant_violations().is_empty(), "{:?}", t.invariant_violations());
        let s = t.scale;
        for w in t.records.windows(2) {
            assert!(w[1].v >= w[0].v - 1e-12 * s, "v decreased at k={}", w[1].k);
            assert!(
                w[1].f_plus <= w[0].f_plus + 1e-10 * s,
                "f_plus increased at k={}",
                w[1].k
            );
        }
        for r in &t.records {
            assert!(
                r.gap <= r.g_classical + 1e-12 * s,
                "gap above classical gap at k={}",
                r.k
            );
        }
    }

    /// Long proximal-gradient run at step `1/beta`.
    pub fn proximal_gradient_reference(comp: &CompositeObjective, iterations: usize) -> Vec<f64> {
        let t = 1.0 / comp.smooth.beta();
        let mut x = vec![0.0; comp.smooth.dimension()];
        for _ in 0..iterations {
            let g = gradient_mapping(comp, &x, t).unwrap();
            x = axpy(&x, -t, &g);
        }
        x
    }
}
