//! Browser demo bindings: explore NURBS boundary geometry, collocation
//! sampling, and live deep-collocation training with goal-error estimation,
//! all running in wasm on a static page.

use wasm_bindgen::prelude::*;

use dcm_core::autodiff::Activation;
use dcm_core::geometry::{sample_collocation, Domain, NurbsCurve};
use dcm_core::goals::{evaluate, functional_derivative, GoalContext, GoalFunctional, GoalKind, Weight};
use dcm_core::network::{BiasInit, Mlp};
use dcm_core::optimize::{quasinewton_run, Objective, OptimizerConfig};
use dcm_core::problems::{poisson_disc, ProblemSpec, ResidualLoss};

fn err_to_js(e: dcm_core::DcmError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn domain_by_name(kind: &str) -> dcm_core::Result<Domain> {
    match kind {
        "quarter_disc_pair" => Ok(Domain::quarter_disc_pair()),
        "unit_disc" => Ok(Domain::unit_disc()),
        "ns_frame" => Ok(Domain::ns_frame()),
        other => Err(dcm_core::DcmError::Config(format!("unknown domain '{other}'"))),
    }
}

/// Evaluate the rational quadratic unit circle after scaling one control
/// weight and inserting a knot; returns curve samples, the control net, and
/// the worst radius deviation as JSON.
#[wasm_bindgen]
pub fn nurbs_circle_demo(weight_scale: f64, insert_at: f64, samples: usize) -> Result<String, JsValue> {
    nurbs_circle_impl(weight_scale, insert_at, samples).map_err(err_to_js)
}

fn nurbs_circle_impl(weight_scale: f64, insert_at: f64, samples: usize) -> dcm_core::Result<String> {
    let mut curve = NurbsCurve::unit_circle();
    if weight_scale > 0.0 && (weight_scale - 1.0).abs() > 1e-12 {
        // perturb the first middle weight: the curve leaves the circle
        curve.weights[1] *= weight_scale;
    }
    let inserted = if insert_at > 0.0 && insert_at < 1.0 {
        curve.knot_insert(insert_at).ok()
    } else {
        None
    };
    let eval_curve = inserted.as_ref().unwrap_or(&curve);
    let n = samples.clamp(16, 4096);
    let mut pts = Vec::with_capacity(n + 1);
    let mut max_radius_err: f64 = 0.0;
    for i in 0..=n {
        let u = i as f64 / n as f64;
        let p = eval_curve.eval(u)?;
        max_radius_err = max_radius_err.max(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs());
        pts.push(p);
    }
    let json = serde_json::json!({
        "curve": pts,
        "ctrl": eval_curve.ctrl,
        "weights": eval_curve.weights,
        "n_ctrl": eval_curve.ctrl.len(),
        "max_radius_err": max_radius_err,
    });
    Ok(json.to_string())
}

/// Sample a collocation set on one of the example domains; returns interior
/// points and boundary points with outward normals and BC tags as JSON.
#[wasm_bindgen]
pub fn sample_domain_demo(kind: &str, nx: usize, ny: usize) -> Result<String, JsValue> {
    sample_domain_impl(kind, nx, ny).map_err(err_to_js)
}

fn sample_domain_impl(kind: &str, nx: usize, ny: usize) -> dcm_core::Result<String> {
    let domain = domain_by_name(kind)?;
    let set = sample_collocation(&domain, nx.clamp(2, 200), ny.clamp(2, 200), None)?;
    let boundary: Vec<serde_json::Value> = set
        .boundary
        .iter()
        .map(|bp| {
            serde_json::json!({
                "p": bp.point,
                "n": bp.normal,
                "tag": format!("{:?}", bp.tag),
            })
        })
        .collect();
    let json = serde_json::json!({
        "interior": set.interior,
        "boundary": boundary,
        "n_int": set.n_int(),
        "n_bnd": set.n_bnd(),
    });
    Ok(json.to_string())
}

/// Live trainer: Poisson on the unit disc (source 12xy, exact solution
/// xy(1 - r^2)) with a small network, stepped from the page.
#[wasm_bindgen]
pub struct TrainerDemo {
    problem: ProblemSpec,
    net: Mlp,
    theta: Vec<f64>,
    colloc: dcm_core::geometry::CollocationSet,
    // persistent Adam state
    m: Vec<f64>,
    v: Vec<f64>,
    t: usize,
    last_loss: f64,
}

#[wasm_bindgen]
impl TrainerDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, grid: usize, width: usize) -> Result<TrainerDemo, JsValue> {
        let problem = poisson_disc();
        let (lb, ub) = problem.domain.bbox();
        let w = width.clamp(4, 64);
        let net = Mlp::uniform(vec![2, w, w, 1], Activation::Tanh, lb, ub).map_err(err_to_js)?;
        let g = grid.clamp(5, 64);
        let colloc = sample_collocation(&problem.domain, g, g, None).map_err(err_to_js)?;
        let theta = net.xavier_init(seed as u64, BiasInit::Zero).values;
        let n = theta.len();
        Ok(TrainerDemo {
            problem,
            net,
            theta,
            colloc,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            last_loss: f64::NAN,
        })
    }

    pub fn n_int(&self) -> usize {
        self.colloc.n_int()
    }

    pub fn n_bnd(&self) -> usize {
        self.colloc.n_bnd()
    }

    pub fn iterations(&self) -> usize {
        self.t
    }

    pub fn loss(&self) -> f64 {
        self.last_loss
    }

    /// Run `n` Adam steps (persistent moments); returns the latest loss.
    pub fn step_adam(&mut self, n: usize, lr: f64) -> Result<f64, JsValue> {
        let loss = ResidualLoss::new(&self.problem, &self.net, &self.colloc).map_err(err_to_js)?;
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        for _ in 0..n.clamp(1, 2000) {
            let (f, g) = loss.value_grad(&self.theta).map_err(err_to_js)?;
            self.last_loss = f;
            self.t += 1;
            let tf = self.t as f64;
            for i in 0..self.theta.len() {
                self.m[i] = b1 * self.m[i] + (1.0 - b1) * g[i];
                self.v[i] = b2 * self.v[i] + (1.0 - b2) * g[i] * g[i];
                let mh = self.m[i] / (1.0 - b1.powf(tf));
                let vh = self.v[i] / (1.0 - b2.powf(tf));
                self.theta[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        Ok(self.last_loss)
    }

    /// Polish with BFGS for up to `n` iterations; returns the final loss.
    pub fn polish(&mut self, n: usize) -> Result<f64, JsValue> {
        let loss = ResidualLoss::new(&self.problem, &self.net, &self.colloc).map_err(err_to_js)?;
        let cfg = OptimizerConfig {
            adam_steps: 0,
            qn_max_iters: n.clamp(1, 3000),
            tol: 1e-13,
            ..Default::default()
        };
        let (theta, trace) = quasinewton_run(&loss, &self.theta, &cfg).map_err(err_to_js)?;
        self.theta = theta;
        self.t += trace.rows.len();
        self.last_loss = loss.value(&self.theta).map_err(err_to_js)?;
        Ok(self.last_loss)
    }

    /// Field values on an `n x n` bounding-box grid, row-major; NaN outside
    /// the domain (for heatmap rendering).
    pub fn field(&self, n: usize) -> Vec<f64> {
        let n = n.clamp(8, 256);
        let (lb, ub) = self.problem.domain.bbox();
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = lb[0] + (ub[0] - lb[0]) * i as f64 / (n - 1) as f64;
                let y = lb[1] + (ub[1] - lb[1]) * j as f64 / (n - 1) as f64;
                if self.problem.domain.inside([x, y]) {
                    out.push(self.net.value(&self.theta, [x, y])[0]);
                } else {
                    out.push(f64::NAN);
                }
            }
        }
        out
    }

    /// Pointwise |u_theta - U| on the same grid.
    pub fn error_field(&self, n: usize) -> Vec<f64> {
        let n = n.clamp(8, 256);
        let (lb, ub) = self.problem.domain.bbox();
        let exact = self.problem.exact.clone().expect("demo problem has an exact solution");
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let x = lb[0] + (ub[0] - lb[0]) * i as f64 / (n - 1) as f64;
                let y = lb[1] + (ub[1] - lb[1]) * j as f64 / (n - 1) as f64;
                if self.problem.domain.inside([x, y]) {
                    let v = self.net.value(&self.theta, [x, y])[0];
                    out.push((v - exact([x, y])[0].v).abs());
                } else {
                    out.push(f64::NAN);
                }
            }
        }
        out
    }

    /// Goal-error estimation for J(u) = int u dx: train a small adjoint,
    /// assemble eta, and compare with the true error; returns JSON with
    /// J values, eta, e, and the effectivity index.
    pub fn estimate(&self, adjoint_iters: usize) -> Result<String, JsValue> {
        let ctx = GoalContext::new(&self.problem.domain, 24);
        let goal = GoalFunctional::new(
            "J_omega",
            GoalKind::DomainIntegral { weight: Weight::One, subdomain: None, field: 0 },
        );
        let field = dcm_core::dwr::frozen_field(&self.net, &self.theta);
        let j_theta = evaluate(&goal, &field, &ctx).map_err(err_to_js)?;
        let exact = self.problem.exact.clone().unwrap();
        let j_exact = evaluate(&goal, &exact, &ctx).map_err(err_to_js)?;

        let rhs = functional_derivative(&goal, &field, &ctx, 1).map_err(err_to_js)?;
        let adjoint = dcm_core::dwr::assemble_adjoint_problem(&self.problem, field, rhs)
            .map_err(err_to_js)?;
        let (lb, ub) = self.problem.domain.bbox();
        let net_z = Mlp::uniform(vec![2, 16, 16, 1], Activation::Tanh, lb, ub).map_err(err_to_js)?;
        let theta0 = net_z.xavier_init(17, BiasInit::Zero);
        let cfg = OptimizerConfig {
            adam_steps: 100,
            qn_max_iters: adjoint_iters.clamp(50, 2000),
            tol: 1e-12,
            ..Default::default()
        };
        let (theta_z, _) = dcm_core::dwr::solve_adjoint(&adjoint, &net_z, &theta0.values, &cfg, &self.colloc)
            .map_err(err_to_js)?;
        let eta = dcm_core::dwr::estimate_eta(
            &self.problem,
            &self.net,
            &self.theta,
            &net_z,
            &theta_z,
            &self.colloc,
            &Default::default(),
        )
        .map_err(err_to_js)?;
        let e = j_exact - j_theta;
        let i_eff = if e.abs() > 1e-14 { Some(eta / e) } else { None };
        Ok(serde_json::json!({
            "j_theta": j_theta,
            "j_exact": j_exact,
            "eta": eta,
            "true_error": e,
            "i_eff": i_eff,
        })
        .to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nurbs_demo_reports_exact_circle_for_unit_weights() {
        let json = nurbs_circle_impl(1.0, 0.0, 128).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["max_radius_err"].as_f64().unwrap() < 1e-12);
        assert_eq!(v["n_ctrl"].as_u64().unwrap(), 9);
        // knot insertion adds a control point without leaving the circle
        let json = nurbs_circle_impl(1.0, 0.4, 128).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["max_radius_err"].as_f64().unwrap() < 1e-10);
        assert_eq!(v["n_ctrl"].as_u64().unwrap(), 10);
        // perturbing a weight bends the curve off the circle
        let json = nurbs_circle_impl(1.4, 0.0, 128).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["max_radius_err"].as_f64().unwrap() > 1e-3);
    }

    #[test]
    fn sample_demo_counts_match_core_sampling() {
        let json = sample_domain_impl("quarter_disc_pair", 20, 20).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let d = Domain::quarter_disc_pair();
        let set = sample_collocation(&d, 20, 20, None).unwrap();
        assert_eq!(v["n_int"].as_u64().unwrap() as usize, set.n_int());
        assert_eq!(v["n_bnd"].as_u64().unwrap() as usize, set.n_bnd());
        assert!(sample_domain_impl("bogus", 10, 10).is_err());
    }

    #[test]
    fn trainer_demo_descends_and_estimates() {
        let mut t = TrainerDemo::new(3, 13, 12).unwrap();
        let f0 = t.step_adam(5, 1e-3).unwrap();
        let f1 = t.step_adam(120, 1e-3).unwrap();
        assert!(f1 < f0, "{f1} < {f0}");
        let f2 = t.polish(80).unwrap();
        assert!(f2 <= f1);
        let grid = t.field(32);
        assert_eq!(grid.len(), 32 * 32);
        assert!(grid.iter().any(|v| v.is_nan()));
        assert!(grid.iter().any(|v| v.is_finite()));
        let est = t.estimate(150).unwrap();
        let v: serde_json::Value = serde_json::from_str(&est).unwrap();
        assert!(v["eta"].as_f64().unwrap().is_finite());
        assert!(v["true_error"].as_f64().unwrap().is_finite());
    }
}
