//! Training loop: Adam warm-up followed by quasi-Newton refinement (dense
//! BFGS or two-loop L-BFGS) with a strong-Wolfe line search, run until the
//! loss tolerance is met or the iteration budget is exhausted.

mod adam;
mod qn;
mod wolfe;

pub use adam::adam_run;
pub use qn::quasinewton_run;
pub use wolfe::WolfeParams;

use serde::{Deserialize, Serialize};

use crate::{DcmError, Result};

/// A differentiable objective. Residual losses expose their collocation
/// points as stochastic terms so the Adam phase can mini-batch; quasi-Newton
/// always evaluates the full deterministic objective.
pub trait Objective: Sync {
    fn value_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)>;

    /// Number of stochastic terms, when the objective decomposes.
    fn n_terms(&self) -> Option<usize> {
        None
    }

    /// Objective restricted to a subset of terms (defaults to the full
    /// objective for monolithic losses).
    fn value_grad_terms(&self, theta: &[f64], terms: &[usize]) -> Result<(f64, Vec<f64>)> {
        let _ = terms;
        self.value_grad(theta)
    }
}

/// Wrap a plain closure as an [`Objective`].
pub struct FnObjective<F>(pub F);

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
{
    fn value_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        (self.0)(theta)
    }
}

/// Which quasi-Newton scheme refines after the Adam phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "memory")]
pub enum QuasiNewtonKind {
    /// Dense inverse-Hessian approximation (O(n^2) memory).
    Bfgs,
    /// Two-loop recursion over the given number of curvature pairs.
    Lbfgs(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub adam_lr: f64,
    pub adam_steps: usize,
    pub adam_betas: (f64, f64),
    pub adam_eps: f64,
    /// Mini-batch size for the Adam phase only; `None` = full batch.
    pub adam_batch: Option<usize>,
    pub qn_kind: QuasiNewtonKind,
    pub qn_max_iters: usize,
    /// Stop when the loss drops below this tolerance.
    pub tol: f64,
    /// Stop when the gradient 2-norm drops below this.
    pub grad_tol: f64,
    pub wolfe: WolfeParams,
    /// Rescale the initial inverse Hessian by s'y/y'y (Nocedal 6.20 for
    /// BFGS, the customary gamma for L-BFGS).
    pub qn_initial_scaling: bool,
    /// Seed for Adam mini-batch shuffling.
    pub batch_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            adam_lr: 1e-3,
            adam_steps: 2000,
            adam_betas: (0.9, 0.999),
            adam_eps: 1e-8,
            adam_batch: None,
            qn_kind: QuasiNewtonKind::Bfgs,
            qn_max_iters: 5000,
            tol: 1e-12,
            grad_tol: 1e-10,
            wolfe: WolfeParams::default(),
            qn_initial_scaling: true,
            batch_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.adam_lr > 0.0) {
            return Err(DcmError::Config("adam_lr must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(DcmError::Config("tol must be positive".into()));
        }
        self.wolfe.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Adam,
    Qn,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Adam => write!(f, "adam"),
            Phase::Qn => write!(f, "qn"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub phase: Phase,
    pub loss: f64,
    pub grad_norm: f64,
    pub seconds: f64,
}

/// Record of an accepted line-search step, kept so tests can assert the
/// strong Wolfe conditions on every accepted iterate.
#[derive(Clone, Copy, Debug)]
pub struct WolfeCheck {
    pub f0: f64,
    pub gtd0: f64,
    pub alpha: f64,
    pub f1: f64,
    pub gtd1: f64,
}

/// Per-iteration training history.
#[derive(Clone, Debug, Default)]
pub struct TrainTrace {
    pub rows: Vec<TraceRow>,
    pub wall_seconds: f64,
    /// Set when the line search could not satisfy the Wolfe conditions and
    /// the best-so-far parameters were returned instead.
    pub line_search_failed: bool,
    /// Set when a non-finite loss aborted the Adam phase.
    pub aborted_non_finite: bool,
    pub wolfe_checks: Vec<WolfeCheck>,
}

impl TrainTrace {
    pub fn push(&mut self, iter: usize, phase: Phase, loss: f64, grad_norm: f64, seconds: f64) {
        debug_assert!(loss.is_finite());
        debug_assert!(self.rows.last().map_or(true, |r| iter > r.iter));
        self.rows.push(TraceRow { iter, phase, loss, grad_norm, seconds });
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.rows.last().map(|r| r.loss)
    }

    pub fn best_loss(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.loss).fold(None, |acc, l| {
            Some(acc.map_or(l, |a: f64| a.min(l)))
        })
    }

    /// Append another trace, renumbering its iterations to continue ours.
    pub fn extend_from(&mut self, other: TrainTrace) {
        let offset = self.rows.last().map_or(0, |r| r.iter + 1);
        for mut row in other.rows {
            row.iter += offset;
            self.rows.push(row);
        }
        self.wall_seconds += other.wall_seconds;
        self.line_search_failed |= other.line_search_failed;
        self.aborted_non_finite |= other.aborted_non_finite;
        self.wolfe_checks.extend(other.wolfe_checks);
    }

    /// CSV with header `iter,phase,loss,grad_norm,seconds`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,phase,loss,grad_norm,seconds\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:.3}\n",
                r.iter, r.phase, r.loss, r.grad_norm, r.seconds
            ));
        }
        out
    }
}

/// Wall-clock stopwatch that reads zero on targets without a monotonic
/// clock (wasm32-unknown-unknown), where `std::time::Instant` panics.
#[derive(Clone, Copy)]
pub struct Stopwatch {
    #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch {
            #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
            start: std::time::Instant::now(),
        }
    }

    pub fn seconds(&self) -> f64 {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        {
            0.0
        }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full training pipeline: Adam warm-up, then quasi-Newton until the loss
/// tolerance is met. Returns the best-so-far parameters and the
/// concatenated trace.
pub fn train(
    obj: &dyn Objective,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, TrainTrace)> {
    cfg.validate()?;
    let (theta_adam, mut trace) = adam_run(obj, theta0, cfg)?;
    if let Some(loss) = trace.final_loss() {
        if loss < cfg.tol {
            return Ok((theta_adam, trace));
        }
    }
    let (theta_qn, trace_qn) = quasinewton_run(obj, &theta_adam, cfg)?;
    trace.extend_from(trace_qn);
    Ok((theta_qn, trace))
}
