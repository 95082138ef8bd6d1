//! BFGS and L-BFGS with strong-Wolfe steps.

use std::collections::VecDeque;
use super::wolfe::strong_wolfe;
use super::{dot, norm2, Objective, OptimizerConfig, Phase, QuasiNewtonKind, TrainTrace, WolfeCheck};
use crate::Result;

/// Relative curvature threshold below which an (s, y) pair is skipped.
const CURVATURE_SKIP: f64 = 1e-12;

enum InverseHessian {
    Dense { h: Vec<f64>, n: usize, scaled: bool },
    Lbfgs {
        m: usize,
        s: VecDeque<Vec<f64>>,
        y: VecDeque<Vec<f64>>,
        rho: VecDeque<f64>,
        gamma: f64,
    },
}

impl InverseHessian {
    fn new(kind: QuasiNewtonKind, n: usize) -> Self {
        match kind {
            QuasiNewtonKind::Bfgs => {
                let mut h = vec![0.0; n * n];
                for i in 0..n {
                    h[i * n + i] = 1.0;
                }
                InverseHessian::Dense { h, n, scaled: false }
            }
            QuasiNewtonKind::Lbfgs(m) => InverseHessian::Lbfgs {
                m: m.max(1),
                s: VecDeque::new(),
                y: VecDeque::new(),
                rho: VecDeque::new(),
                gamma: 1.0,
            },
        }
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        match self {
            InverseHessian::Dense { h, n, .. } => {
                let mut d = vec![0.0; *n];
                for i in 0..*n {
                    let row = &h[i * n..(i + 1) * n];
                    d[i] = -dot(row, g);
                }
                d
            }
            InverseHessian::Lbfgs { s, y, rho, gamma, .. } => {
                let k = s.len();
                let mut q = g.to_vec();
                let mut alpha = vec![0.0; k];
                for i in (0..k).rev() {
                    alpha[i] = rho[i] * dot(&s[i], &q);
                    for (qj, yj) in q.iter_mut().zip(&y[i]) {
                        *qj -= alpha[i] * yj;
                    }
                }
                for qj in q.iter_mut() {
                    *qj *= *gamma;
                }
                for i in 0..k {
                    let beta = rho[i] * dot(&y[i], &q);
                    for (qj, sj) in q.iter_mut().zip(&s[i]) {
                        *qj += (alpha[i] - beta) * sj;
                    }
                }
                q.iter_mut().for_each(|v| *v = -*v);
                q
            }
        }
    }

    fn update(&mut self, s_vec: &[f64], y_vec: &[f64], use_scaling: bool) {
        let sty = dot(s_vec, y_vec);
        if sty <= CURVATURE_SKIP * norm2(s_vec) * norm2(y_vec) {
            return;
        }
        match self {
            InverseHessian::Dense { h, n, scaled } => {
                let n = *n;
                if !*scaled && use_scaling {
                    // H0 = (s'y / y'y) I before the first update
                    let g = sty / dot(y_vec, y_vec);
                    for i in 0..n {
                        for j in 0..n {
                            h[i * n + j] = if i == j { g } else { 0.0 };
                        }
                    }
                }
                *scaled = true;
                let rho = 1.0 / sty;
                // hy = H y, yty_h = y' H y
                let mut hy = vec![0.0; n];
                for i in 0..n {
                    hy[i] = dot(&h[i * n..(i + 1) * n], y_vec);
                }
                let ythy = dot(y_vec, &hy);
                let c = rho * rho * ythy + rho;
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] += c * s_vec[i] * s_vec[j]
                            - rho * (s_vec[i] * hy[j] + hy[i] * s_vec[j]);
                    }
                }
            }
            InverseHessian::Lbfgs { m, s, y, rho, gamma } => {
                if s.len() == *m {
                    s.pop_front();
                    y.pop_front();
                    rho.pop_front();
                }
                *gamma = if use_scaling { sty / dot(y_vec, y_vec) } else { 1.0 };
                s.push_back(s_vec.to_vec());
                y.push_back(y_vec.to_vec());
                rho.push_back(1.0 / sty);
            }
        }
    }
}

/// Descend from `theta0` until `loss < cfg.tol`, the gradient norm drops
/// below `cfg.grad_tol`, or `cfg.qn_max_iters` accepted steps. A failed line
/// search returns the best-so-far parameters with the trace flagged.
pub fn quasinewton_run(
    obj: &dyn Objective,
    theta0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, TrainTrace)> {
    let start = super::Stopwatch::start();
    let n = theta0.len();
    let mut theta = theta0.to_vec();
    let mut trace = TrainTrace::default();

    let (mut f, mut g) = obj.value_grad(&theta)?;
    let mut gnorm = norm2(&g);
    trace.push(0, Phase::Qn, f, gnorm, start.seconds());
    let mut best = (f, theta.clone());

    if f < cfg.tol || gnorm < cfg.grad_tol {
        trace.wall_seconds = start.seconds();
        return Ok((theta, trace));
    }

    let mut hess = InverseHessian::new(cfg.qn_kind, n);

    for k in 0..cfg.qn_max_iters {
        let mut d = hess.direction(&g);
        let mut gtd = dot(&g, &d);
        if !(gtd < 0.0) {
            // Not a descent direction (stale curvature); restart from
            // steepest descent.
            hess = InverseHessian::new(cfg.qn_kind, n);
            d = g.iter().map(|x| -x).collect();
            gtd = -gnorm * gnorm;
            if !(gtd < 0.0) {
                break;
            }
        }

        let alpha0 = if k == 0 { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let hit = match strong_wolfe(obj, &theta, &d, f, gtd, alpha0, &cfg.wolfe)? {
            Some(h) if h.wolfe_satisfied => h,
            other => {
                // Keep any plain decrease the search found, then stop:
                // accepted steps must carry a Wolfe certificate.
                if let Some(h) = other {
                    if h.f < best.0 {
                        best = (h.f, theta.iter().zip(&d).map(|(t, di)| t + h.alpha * di).collect());
                    }
                }
                trace.line_search_failed = true;
                break;
            }
        };

        trace.wolfe_checks.push(WolfeCheck { f0: f, gtd0: gtd, alpha: hit.alpha, f1: hit.f, gtd1: hit.gtd });

        let s_vec: Vec<f64> = d.iter().map(|di| hit.alpha * di).collect();
        let y_vec: Vec<f64> = hit.grad.iter().zip(&g).map(|(gn, go)| gn - go).collect();
        for (t, s) in theta.iter_mut().zip(&s_vec) {
            *t += s;
        }
        f = hit.f;
        g = hit.grad;
        gnorm = norm2(&g);
        trace.push(k + 1, Phase::Qn, f, gnorm, start.seconds());
        if f < best.0 {
            best = (f, theta.clone());
        }

        if f < cfg.tol || gnorm < cfg.grad_tol {
            break;
        }
        hess.update(&s_vec, &y_vec, cfg.qn_initial_scaling);
    }

    trace.wall_seconds = start.seconds();
    let theta_out = if best.0 < f { best.1 } else { theta };
    Ok((theta_out, trace))
}
