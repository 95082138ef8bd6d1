//! Adam with bias-corrected moments, used as a warm-up before quasi-Newton.

use super::{norm2, Objective, OptimizerConfig, Phase, TrainTrace};
use crate::rng::Rng;
use crate::{DcmError, Result};

/// Run `cfg.adam_steps` Adam updates from `theta0`.
///
/// A non-finite loss aborts the phase and returns the last finite state with
/// `aborted_non_finite` set. With `cfg.adam_batch` and an objective exposing
/// stochastic terms, each step evaluates a deterministic shuffled mini-batch.
pub fn adam_run(
    obj: &dyn Objective,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, TrainTrace)> {
    let start = super::Stopwatch::start();
    let n = theta0.len();
    let mut theta = theta0.to_vec();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (b1, b2) = cfg.adam_betas;
    let mut trace = TrainTrace::default();

    let mut batcher = Batcher::new(obj.n_terms(), cfg.adam_batch, cfg.batch_seed);

    for step in 0..cfg.adam_steps {
        let eval = match batcher.as_mut() {
            Some(b) => obj.value_grad_terms(&theta, b.next()),
            None => obj.value_grad(&theta),
        };
        let (f, g) = match eval {
            Ok(fg) => fg,
            Err(DcmError::NonFinite { .. }) => {
                trace.aborted_non_finite = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !f.is_finite() {
            trace.aborted_non_finite = true;
            break;
        }
        trace.push(step, Phase::Adam, f, norm2(&g), start.seconds());

        let t = (step + 1) as f64;
        let bc1 = 1.0 - b1.powf(t);
        let bc2 = 1.0 - b2.powf(t);
        for i in 0..n {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m[i] / bc1;
            let vh = v[i] / bc2;
            theta[i] -= cfg.adam_lr * mh / (vh.sqrt() + cfg.adam_eps);
        }
    }

    trace.wall_seconds = start.seconds();
    Ok((theta, trace))
}

/// Deterministic shuffled cycling over term indices.
struct Batcher {
    order: Vec<usize>,
    at: usize,
    batch: usize,
    rng: Rng,
    current: Vec<usize>,
}

impl Batcher {
    fn new(n_terms: Option<usize>, batch: Option<usize>, seed: u64) -> Option<Self> {
        let n = n_terms?;
        let batch = batch?;
        if batch == 0 || batch >= n {
            return None;
        }
        Some(Batcher {
            order: (0..n).collect(),
            at: n, // force reshuffle on first use
            batch,
            rng: Rng::seed_from(seed),
            current: Vec::with_capacity(batch),
        })
    }

    fn next(&mut self) -> &[usize] {
        self.current.clear();
        for _ in 0..self.batch {
            if self.at >= self.order.len() {
                // Fisher-Yates reshuffle
                for i in (1..self.order.len()).rev() {
                    let j = (self.rng.next_u64() % (i as u64 + 1)) as usize;
                    self.order.swap(i, j);
                }
                self.at = 0;
            }
            self.current.push(self.order[self.at]);
            self.at += 1;
        }
        &self.current
    }
}
