use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{GeoState, NesterovState, SolverConfig};
use crate::error::Error;
use crate::quadratic::CanonicalQuadratic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// `f(x_k^+)`.
    pub f_plus: f64,
    pub v: f64,
    /// `f_plus - v`.
    pub gap: f64,
    /// `||grad f(x_k)||^2 / (2 alpha)`.
    pub g_classical: f64,
    pub grad_norm: f64,
    pub elapsed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squared_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GradientZero,
    GapTolerance,
    MaxIterations,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::GradientZero => "gradient-zero",
            StopReason::GapTolerance => "gap-tolerance",
            StopReason::MaxIterations => "max-iterations",
        })
    }
}

/// What the `v` column means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `v_k <= f*`: the gap is a certified bound on suboptimality.
    LowerBound,
    /// Estimate-sequence minimum with `f(x_k^+) <= v_k`; not a bound on `f*`.
    EstimateSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub solver: String,
    pub bound: BoundKind,
    /// `1 + |f(x_0)| + |g_0|`.
    pub scale: f64,
    pub records: Vec<IterationRecord>,
    pub stop_reason: Option<StopReason>,
}

impl SolverTrace {
    pub fn new(solver: &str, bound: BoundKind) -> Self {
        Self {
            solver: solver.to_string(),
            bound,
            scale: 1.0,
            records: Vec::new(),
            stop_reason: None,
        }
    }

    /// Number of iterations after the initial record.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.last().map(|r| r.gap)
    }

    /// Violations of the per-record invariants.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.records {
            if (r.gap - (r.f_plus - r.v)).abs() > 1e-12 * self.scale {
                out.push(format!("k={}: gap {} != f_plus - v {}", r.k, r.gap, r.f_plus - r.v));
            }
            if self.bound == BoundKind::LowerBound && r.gap < -1e-10 * self.scale {
                out.push(format!("k={}: negative gap {}", r.k, r.gap));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub trace: SolverTrace,
    pub final_quadratic: Option<CanonicalQuadratic>,
    /// `x_K^+`, the best point found.
    pub final_iterate: Vec<f64>,
    pub geo_state: Option<GeoState>,
    /// One entry per iteration `k >= 1` for the accelerated schemes.
    pub nesterov_states: Vec<NesterovState>,
}

/// A failed run: the error and the records produced before it.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error} (after {} records)", partial.records.len())]
pub struct SolverFailure {
    pub error: Error,
    pub partial: SolverTrace,
}

pub type SolverResult = std::result::Result<SolverOutput, SolverFailure>;

/// Accumulates records and timing for one run.
pub(super) struct Recorder {
    pub trace: SolverTrace,
    alpha: f64,
    start: Option<Instant>,
    keep_points: bool,
}

impl Recorder {
    pub fn new(solver: &str, bound: BoundKind, alpha: f64, cfg: &SolverConfig) -> Self {
        Self {
            trace: SolverTrace::new(solver, bound),
            alpha,
            start: cfg.timing.then(Instant::now),
            keep_points: cfg.record_centers,
        }
    }

    pub fn set_scale(&mut self, f0: f64, gap0: f64) {
        self.trace.scale = 1.0 + f0.abs() + gap0.abs();
    }

    pub fn scale(&self) -> f64 {
        self.trace.scale
    }

    pub fn next_k(&self) -> usize {
        self.trace.records.len()
    }

    /// Appends the next record and returns its gap; non-finite values mean divergence.
    pub fn push(
        &mut self,
        f_plus: f64,
        v: f64,
        grad_sq: f64,
        center: &[f64],
        iterate: &[f64],
        squared_radius: Option<f64>,
    ) -> Result<f64, Error> {
        let k = self.next_k();
        if !(f_plus.is_finite() && v.is_finite() && grad_sq.is_finite()) {
            return Err(Error::Diverged(k));
        }
        let elapsed = self.start.map_or(0.0, |s| s.elapsed().as_secs_f64());
        self.trace.records.push(IterationRecord {
            k,
            f_plus,
            v,
            gap: f_plus - v,
            g_classical: grad_sq / (2.0 * self.alpha),
            grad_norm: grad_sq.sqrt(),
            elapsed,
            center: self.keep_points.then(|| center.to_vec()),
            iterate: self.keep_points.then(|| iterate.to_vec()),
            squared_radius,
        });
        Ok(f_plus - v)
    }

    pub fn fail(self, error: Error) -> SolverFailure {
        let error = match error {
            Error::NonFinite(_) => Error::Diverged(self.trace.records.len()),
            e => e,
        };
        SolverFailure {
            error,
            partial: self.trace,
        }
    }

    pub fn finish(mut self, reason: StopReason, final_iterate: Vec<f64>) -> SolverOutput {
        self.trace.stop_reason = Some(reason);
        SolverOutput {
            trace: self.trace,
            final_quadratic: None,
            final_iterate,
            geo_state: None,
            nesterov_states: Vec::new(),
        }
    }
}

/// `Err(e)` into a [`SolverFailure`] carrying the recorder's trace.
macro_rules! tryrec {
    ($rec:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Err($rec.fail(err.into())),
        }
    };
}
pub(super) use tryrec;
