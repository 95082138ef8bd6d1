//! Dual-weighted-residual estimation: solve the primal problem, assemble and
//! solve the adjoint problem for a (combined) goal functional, evaluate the
//! pointwise error estimator `eta = rho(u_theta)(z_theta)`, and report
//! effectivity indices over a refinement schedule.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::autodiff::{Activation, Jet2};
use crate::geometry::{sample_collocation, BcTag, CollocationSet};
use crate::goals::{
    combine_weights, combined_value, evaluate, functional_derivative, AdjointRhs,
    CombinedFunctional, GoalContext, SignSource,
};
use crate::network::{BiasInit, Mlp};
use crate::optimize::{train, OptimizerConfig, TrainTrace};
use crate::problems::{
    relative_l2, residual_error_metric, JetFieldFn, ProblemSpec, ResidualLoss, ResidualOp,
    SegmentBc,
};
use crate::{DcmError, Result};

/// How the pointwise sums of the estimator weight their points.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaWeighting {
    /// Collocation points carry measure weights (|Omega|/N_int interior,
    /// segment length / segment count on the boundary), so the sums are
    /// quasi-Monte-Carlo estimates of the residual-adjoint pairing and the
    /// error identity holds up to sampling error.
    #[default]
    MeasureWeighted,
    /// The literal printed form: a plain 1/(N_int + N_bnd) average of
    /// residual times adjoint values.
    PaperMean,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EtaOptions {
    pub weighting: EtaWeighting,
    /// Include the boundary-residual terms in the sums.
    pub include_boundary: bool,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions { weighting: EtaWeighting::MeasureWeighted, include_boundary: true }
    }
}

/// Per-level outcome of the estimation pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub level: usize,
    pub n_int: usize,
    pub n_bnd: usize,
    pub j_names: Vec<String>,
    pub j_values_theta: Vec<f64>,
    pub j_values_reference: Option<Vec<f64>>,
    pub omega: Vec<f64>,
    pub j_c_theta: f64,
    pub eta: f64,
    pub true_error: Option<f64>,
    pub i_eff: Option<f64>,
    pub loss_primal: f64,
    pub loss_adjoint: f64,
    pub rel_l2: Option<f64>,
    pub adjoint_r_err: Option<f64>,
    pub seed: u64,
    pub net_primal: Vec<usize>,
    pub net_adjoint: Vec<usize>,
    pub seconds: f64,
    pub notes: Vec<String>,
    /// Training traces (primal, then adjoint); not part of the JSON report.
    #[serde(skip)]
    pub traces: Vec<TrainTrace>,
    #[serde(skip)]
    pub checkpoint_primal: Option<crate::network::Checkpoint>,
    #[serde(skip)]
    pub checkpoint_adjoint: Option<crate::network::Checkpoint>,
}

/// Train the primal network on the problem's residual loss.
pub fn solve_primal(
    problem: &ProblemSpec,
    net: &Mlp,
    theta0: &[f64],
    cfg: &OptimizerConfig,
    colloc: &CollocationSet,
) -> Result<(Vec<f64>, TrainTrace)> {
    let loss = ResidualLoss::new(problem, net, colloc)?;
    train(&loss, theta0, cfg)
}

/// Train the adjoint network; identical machinery on the adjoint problem.
pub fn solve_adjoint(
    adjoint: &ProblemSpec,
    net: &Mlp,
    theta0: &[f64],
    cfg: &OptimizerConfig,
    colloc: &CollocationSet,
) -> Result<(Vec<f64>, TrainTrace)> {
    let loss = ResidualLoss::new(adjoint, net, colloc)?;
    train(&loss, theta0, cfg)
}

/// Freeze a trained network as a jet field.
pub fn frozen_field(net: &Mlp, theta: &[f64]) -> JetFieldFn {
    let net = net.clone();
    let theta = theta.to_vec();
    Arc::new(move |x| net.jets(&theta, x))
}

/// Build the adjoint problem `N'(u_theta) z = J'(u_theta)`: the linearized
/// operator against the derivative densities, homogeneous Dirichlet data on
/// primal-Dirichlet segments plus the functional's boundary shift, and
/// zero-flux data on primal-Neumann segments.
pub fn assemble_adjoint_problem(
    problem: &ProblemSpec,
    primal: JetFieldFn,
    rhs: AdjointRhs,
) -> Result<ProblemSpec> {
    let op = match &problem.op {
        ResidualOp::PLaplace { params, .. } => {
            let dom = rhs.domain.clone();
            ResidualOp::PLaplaceAdjoint {
                params: *params,
                primal: primal.clone(),
                rhs: Arc::new(move |x| dom(x)[0]),
            }
        }
        ResidualOp::NavierStokes { params, .. } => {
            let dom = rhs.domain.clone();
            ResidualOp::NavierStokesAdjoint {
                params: *params,
                primal: primal.clone(),
                rhs: Arc::new(move |x| {
                    let v = dom(x);
                    [v[0], v[1], v[2]]
                }),
            }
        }
        _ => {
            return Err(DcmError::Config(
                "cannot assemble the adjoint of an adjoint problem".into(),
            ))
        }
    };
    let n_bc_fields = problem.bc_fields.len();
    let bc = problem
        .domain
        .segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let shift = rhs.boundary_shift[i].clone();
            SegmentBc {
                tag: seg.tag,
                data: match (seg.tag, shift) {
                    // adjoint Dirichlet data = the functional's boundary shift
                    (BcTag::Dirichlet, Some(shift)) => Arc::new(move |x: [f64; 2]| {
                        let mut v = shift(x);
                        v.resize(n_bc_fields, 0.0);
                        v
                    }) as crate::problems::VectorField,
                    // homogeneous data elsewhere (zero-flux on Neumann parts)
                    _ => Arc::new(move |_| vec![0.0; n_bc_fields.max(1)]),
                },
            }
        })
        .collect();
    Ok(ProblemSpec {
        name: format!("adjoint({})", problem.name),
        domain: problem.domain.clone(),
        op,
        bc,
        bc_fields: problem.bc_fields.clone(),
        exact: None,
    })
}

/// Flux of the linearized scalar operator at the frozen primal state:
/// `q^a dz/dn + (p-2) q^(a-1) (grad u . grad z)(grad u . n)`,
/// which reduces to dz/dn for the Poisson case.
fn adjoint_flux_scalar(
    params: &crate::problems::PLaplaceParams,
    u: &Jet2,
    z: &Jet2,
    n: [f64; 2],
) -> f64 {
    let dzdn = z.gx * n[0] + z.gy * n[1];
    if params.p == 2.0 {
        return dzdn;
    }
    let q = params.delta * params.delta + u.grad_norm_sq();
    if q < 1e-150 {
        return 0.0;
    }
    let a = 0.5 * (params.p - 2.0);
    let qa = q.powf(a);
    let s = u.gx * z.gx + u.gy * z.gy;
    let un = u.gx * n[0] + u.gy * n[1];
    qa * dzdn + (params.p - 2.0) * (qa / q) * s * un
}

/// The error estimator assembled pointwise over the training collocation
/// set: `eta = sum_i w_i rho(u_theta)(x_i) . z_theta(x_i)` with
/// `rho = f - N(u_theta)` in the interior; boundary points contribute their
/// boundary residual paired with the adjoint (Dirichlet residuals against
/// the linearized adjoint flux, Neumann residuals against the adjoint
/// value).
pub fn estimate_eta(
    problem: &ProblemSpec,
    net_u: &Mlp,
    theta_u: &[f64],
    net_z: &Mlp,
    theta_z: &[f64],
    colloc: &CollocationSet,
    opts: &EtaOptions,
) -> Result<f64> {
    estimate_eta_fields(
        problem,
        &frozen_field(net_u, theta_u),
        &frozen_field(net_z, theta_z),
        colloc,
        opts,
    )
}

/// [`estimate_eta`] over arbitrary jet fields; lets oracles substitute an
/// analytically known adjoint for the trained one.
pub fn estimate_eta_fields(
    problem: &ProblemSpec,
    field_u: &JetFieldFn,
    field_z: &JetFieldFn,
    colloc: &CollocationSet,
    opts: &EtaOptions,
) -> Result<f64> {
    if colloc.n_int() == 0 {
        return Err(DcmError::CollocationMismatch("empty collocation set".into()));
    }
    let n_total = (colloc.n_int() + colloc.n_bnd()) as f64;
    let area = problem.domain.area()?;
    let w_int = match opts.weighting {
        EtaWeighting::MeasureWeighted => area / colloc.n_int() as f64,
        EtaWeighting::PaperMean => 1.0 / n_total,
    };

    let mut eta = 0.0;
    for &x in &colloc.interior {
        let ju = field_u(x);
        let jz = field_z(x);
        let rows = problem.op.eval(x, &ju);
        let mut dot = 0.0;
        for (k, r) in rows.iter().enumerate() {
            // rho = -(residual row); pair row-wise with the adjoint fields
            dot += -r.v * jz[k.min(jz.len() - 1)].v;
        }
        eta += w_int * dot;
    }

    if opts.include_boundary && colloc.n_bnd() > 0 {
        // per-segment point counts for the boundary measure weights
        let mut seg_counts = vec![0usize; problem.domain.segments.len()];
        for bp in &colloc.boundary {
            seg_counts[bp.segment] += 1;
        }
        for bp in &colloc.boundary {
            let ju = field_u(bp.point);
            let jz = field_z(bp.point);
            let rows = problem.boundary_residuals(&ju, bp);
            let w = match opts.weighting {
                EtaWeighting::MeasureWeighted => {
                    let seg = &problem.domain.segments[bp.segment];
                    seg.length() / seg_counts[bp.segment] as f64
                }
                EtaWeighting::PaperMean => 1.0 / n_total,
            };
            let mut term = 0.0;
            match (bp.tag, opts.weighting) {
                // paper form: residual times adjoint value
                (_, EtaWeighting::PaperMean) => {
                    for (i, r) in rows.iter().enumerate() {
                        let k = problem.bc_fields.get(i).copied().unwrap_or(0);
                        term += -r.v * jz[k].v;
                    }
                }
                (BcTag::Dirichlet, _) => {
                    // -int rho_b (adjoint flux), rho_b = g - u_theta = -row
                    for (i, r) in rows.iter().enumerate() {
                        let k = problem.bc_fields.get(i).copied().unwrap_or(0);
                        let flux = match &problem.op {
                            ResidualOp::PLaplace { params, .. }
                            | ResidualOp::PLaplaceAdjoint { params, .. } => {
                                adjoint_flux_scalar(params, &ju[0], &jz[0], bp.normal)
                            }
                            ResidualOp::NavierStokes { params, .. }
                            | ResidualOp::NavierStokesAdjoint { params, .. } => {
                                // viscous adjoint flux minus adjoint pressure
                                params.nu
                                    * (jz[k].gx * bp.normal[0] + jz[k].gy * bp.normal[1])
                                    - jz[2].v * bp.normal[k.min(1)]
                            }
                        };
                        term += -(-r.v) * flux;
                    }
                }
                (BcTag::NeumannX | BcTag::NeumannY, _) => {
                    // + int rho_b z
                    term += -rows[0].v * jz[0].v;
                }
            }
            eta += w * term;
        }
    }
    Ok(eta)
}

/// Effectivity index `I_eff = eta / e`; undefined for vanishing true error.
pub fn effectivity(eta: f64, e: f64) -> Result<f64> {
    if e.abs() <= 1e-14 {
        return Err(DcmError::Goal(format!("effectivity undefined: |e| = {:e} <= 1e-14", e.abs())));
    }
    Ok(eta / e)
}

/// One experiment: problem, goals, network shapes, optimizer settings, and a
/// collocation refinement schedule.
#[derive(Clone)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub goals: CombinedFunctional,
    pub primal_shape: Vec<usize>,
    pub primal_activations: Vec<Activation>,
    pub adjoint_shape: Vec<usize>,
    pub adjoint_activations: Vec<Activation>,
    pub bias_init: BiasInit,
    pub opt_primal: OptimizerConfig,
    pub opt_adjoint: OptimizerConfig,
    /// Collocation levels (N_x, N_y).
    pub schedule: Vec<(usize, usize)>,
    pub quad_order: usize,
    pub seed: u64,
    pub eta: EtaOptions,
    /// Stop refining once I_eff lands in this band.
    pub i_eff_band: (f64, f64),
    /// Fields entering the reported relative L2 error.
    pub rel_l2_fields: Vec<usize>,
    /// Width of mollified point sources as a multiple of the collocation
    /// grid spacing.
    pub moll_scale: f64,
}

impl Experiment {
    pub fn nets(&self) -> Result<(Mlp, Mlp)> {
        let (lb, ub) = self.problem.domain.bbox();
        let primal = Mlp::new(self.primal_shape.clone(), self.primal_activations.clone(), lb, ub)?;
        let adjoint =
            Mlp::new(self.adjoint_shape.clone(), self.adjoint_activations.clone(), lb, ub)?;
        Ok((primal, adjoint))
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.goals.validate(&self.problem.domain)?;
        if self.schedule.is_empty() {
            return Err(DcmError::Config("empty collocation schedule".into()));
        }
        let (primal, adjoint) = self.nets()?;
        if primal.out_dim() != self.problem.n_fields() || adjoint.out_dim() != self.problem.n_fields()
        {
            return Err(DcmError::ShapeMismatch(
                "network output width must match the problem field count".into(),
            ));
        }
        self.opt_primal.validate()?;
        self.opt_adjoint.validate()
    }
}

/// A 100x100 bounding-box grid masked by the domain predicate, for error
/// reporting.
pub fn test_grid(problem: &ProblemSpec, n: usize) -> Vec<[f64; 2]> {
    let (lb, ub) = problem.domain.bbox();
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = lb[0] + (ub[0] - lb[0]) * i as f64 / (n - 1) as f64;
            let y = lb[1] + (ub[1] - lb[1]) * j as f64 / (n - 1) as f64;
            if problem.domain.inside([x, y]) {
                pts.push([x, y]);
            }
        }
    }
    pts
}

/// Reference values for the goal functionals: explicit numbers when the sign
/// source carries them, otherwise evaluated on the exact solution when one
/// is shipped.
pub fn reference_values(exp: &Experiment, ctx: &GoalContext) -> Result<Option<Vec<f64>>> {
    if let SignSource::ReferenceValues(v) = &exp.goals.sign_source {
        return Ok(Some(v.clone()));
    }
    if let Some(exact) = &exp.problem.exact {
        let mut refs = Vec::new();
        for (g, _) in &exp.goals.parts {
            refs.push(evaluate(g, exact, ctx)?);
        }
        return Ok(Some(refs));
    }
    Ok(None)
}

/// Cheap per-functional adjoint pass for the estimated sign mode: a small
/// adjoint network per functional, trained briefly; the sign of its error
/// estimate is the sign of `J_n(u) - J_n(u_theta)`.
fn estimate_signs(
    exp: &Experiment,
    primal_field: &JetFieldFn,
    net_u: &Mlp,
    theta_u: &[f64],
    colloc: &CollocationSet,
    ctx: &GoalContext,
) -> Result<Vec<f64>> {
    let n_rows = match exp.problem.op {
        ResidualOp::NavierStokes { .. } => 3,
        _ => 1,
    };
    let (lb, ub) = exp.problem.domain.bbox();
    let mut signs = Vec::new();
    let cheap = OptimizerConfig {
        adam_steps: 200,
        qn_max_iters: 300,
        tol: 1e-10,
        ..OptimizerConfig::default()
    };
    for (i, (goal, _)) in exp.goals.parts.iter().enumerate() {
        let rhs = functional_derivative(goal, primal_field, ctx, n_rows)?;
        let adjoint = assemble_adjoint_problem(&exp.problem, primal_field.clone(), rhs)?;
        let width = 16.max(exp.problem.n_fields() * 8);
        let net_z = Mlp::uniform(
            vec![2, width, width, exp.problem.n_fields()],
            Activation::Tanh,
            lb,
            ub,
        )?;
        let theta0 = net_z.xavier_init(exp.seed ^ (0x5151 + i as u64), BiasInit::Zero);
        let (theta_z, _) = solve_adjoint(&adjoint, &net_z, &theta0.values, &cheap, colloc)?;
        let eta_n =
            estimate_eta(&exp.problem, net_u, theta_u, &net_z, &theta_z, colloc, &exp.eta)?;
        signs.push(if eta_n >= 0.0 { 1.0 } else { -1.0 });
    }
    Ok(signs)
}

/// The outer estimation loop: per refinement level, train the primal
/// network, evaluate the goal functionals and combination weights, solve the
/// adjoint of the combined functional, assemble `eta`, and compare against
/// the true error when references exist. Refinement proceeds to the next
/// collocation level until `I_eff` lands in the configured band; a level
/// failure is recorded in its report and the loop continues.
pub fn run_algorithm1(exp: &Experiment) -> Result<Vec<EstimateReport>> {
    exp.validate()?;
    let mut reports = Vec::new();
    for (level, &(nx, ny)) in exp.schedule.iter().enumerate() {
        match run_level(exp, level, nx, ny) {
            Ok(report) => {
                let stop = report
                    .i_eff
                    .map(|i| i >= exp.i_eff_band.0 && i <= exp.i_eff_band.1)
                    .unwrap_or(false);
                reports.push(report);
                if stop && level + 1 < exp.schedule.len() {
                    break;
                }
            }
            Err(e) => {
                let mut report = empty_report(exp, level);
                report.notes.push(format!("level failed: {e}"));
                reports.push(report);
            }
        }
    }
    Ok(reports)
}

fn empty_report(exp: &Experiment, level: usize) -> EstimateReport {
    EstimateReport {
        level,
        n_int: 0,
        n_bnd: 0,
        j_names: exp.goals.parts.iter().map(|(g, _)| g.name.clone()).collect(),
        j_values_theta: vec![],
        j_values_reference: None,
        omega: vec![],
        j_c_theta: 0.0,
        eta: 0.0,
        true_error: None,
        i_eff: None,
        loss_primal: f64::NAN,
        loss_adjoint: f64::NAN,
        rel_l2: None,
        adjoint_r_err: None,
        seed: exp.seed,
        net_primal: exp.primal_shape.clone(),
        net_adjoint: exp.adjoint_shape.clone(),
        seconds: 0.0,
        notes: vec![],
        traces: vec![],
        checkpoint_primal: None,
        checkpoint_adjoint: None,
    }
}

fn run_level(exp: &Experiment, level: usize, nx: usize, ny: usize) -> Result<EstimateReport> {
    let t0 = crate::optimize::Stopwatch::start();
    let problem = &exp.problem;
    let colloc = sample_collocation(&problem.domain, nx, ny, None)?;
    let (net_u, net_z) = exp.nets()?;

    // primal solve
    let theta0_u = net_u.xavier_init(exp.seed.wrapping_add(2 * level as u64), exp.bias_init);
    let (theta_u, trace_u) = solve_primal(problem, &net_u, &theta0_u.values, &exp.opt_primal, &colloc)?;
    let loss_primal = ResidualLoss::new(problem, &net_u, &colloc)?.value(&theta_u)?;

    // goal functionals at the trained state
    let (lb, ub) = problem.domain.bbox();
    let h = ((ub[0] - lb[0]) / (nx - 1) as f64).min((ub[1] - lb[1]) / (ny - 1) as f64);
    let mut ctx = GoalContext::new(&problem.domain, exp.quad_order);
    ctx.moll_width = exp.moll_scale * h;
    let primal_field = frozen_field(&net_u, &theta_u);
    let mut j_theta = Vec::new();
    for (g, _) in &exp.goals.parts {
        j_theta.push(evaluate(g, &primal_field, &ctx)?);
    }

    // combination weights
    let refs = reference_values(exp, &ctx)?;
    let omega = match (&exp.goals.sign_source, &refs) {
        (SignSource::Estimated, _) => {
            let signs = estimate_signs(exp, &primal_field, &net_u, &theta_u, &colloc, &ctx)?;
            combine_weights(&exp.goals, &j_theta, Some(&signs))?
        }
        (SignSource::Auto, Some(r)) => {
            // an exact solution supplies the signs, so the no-cancellation
            // property holds in reports
            let jc = CombinedFunctional {
                parts: exp.goals.parts.clone(),
                sign_source: SignSource::ReferenceValues(r.clone()),
            };
            combine_weights(&jc, &j_theta, None)?
        }
        _ => combine_weights(&exp.goals, &j_theta, None)?,
    };

    // adjoint of the combined functional
    let n_rows = match problem.op {
        ResidualOp::NavierStokes { .. } => 3,
        _ => 1,
    };
    let mut parts = Vec::new();
    for ((g, _), &o) in exp.goals.parts.iter().zip(&omega) {
        parts.push((o, functional_derivative(g, &primal_field, &ctx, n_rows)?));
    }
    let rhs = AdjointRhs::scaled_sum(parts);
    let adjoint = assemble_adjoint_problem(problem, primal_field.clone(), rhs)?;
    let theta0_z =
        net_z.xavier_init(exp.seed.wrapping_add(2 * level as u64 + 1), exp.bias_init);
    let (theta_z, trace_z) =
        solve_adjoint(&adjoint, &net_z, &theta0_z.values, &exp.opt_adjoint, &colloc)?;
    let loss_adjoint = ResidualLoss::new(&adjoint, &net_z, &colloc)?.value(&theta_z)?;

    // estimator, true error, effectivity
    let eta = estimate_eta(problem, &net_u, &theta_u, &net_z, &theta_z, &colloc, &exp.eta)?;
    let j_c_theta = combined_value(&omega, &j_theta);
    let (true_error, i_eff) = match &refs {
        Some(r) => {
            let e: f64 = omega.iter().zip(r.iter().zip(&j_theta)).map(|(o, (jr, jt))| o * (jr - jt)).sum();
            let ie = effectivity(eta, e).ok();
            (Some(e), ie)
        }
        None => (None, None),
    };

    // reporting metrics
    let grid = test_grid(problem, 100);
    let rel_l2 = problem
        .exact
        .as_ref()
        .map(|exact| relative_l2(&net_u, &theta_u, exact, &grid, &exp.rel_l2_fields));
    // the residual-error metric is evaluated where the adjoint residual is
    // enforced; mollified point sources are under-resolved between
    // collocation points, so a dense grid would measure sampling density
    // rather than solve quality
    let adjoint_r_err = Some(residual_error_metric(&adjoint, &net_z, &theta_z, &colloc.interior));

    let mut notes = Vec::new();
    if trace_u.line_search_failed {
        notes.push("primal line search returned best-so-far".into());
    }
    if trace_z.line_search_failed {
        notes.push("adjoint line search returned best-so-far".into());
    }

    Ok(EstimateReport {
        level,
        n_int: colloc.n_int(),
        n_bnd: colloc.n_bnd(),
        j_names: exp.goals.parts.iter().map(|(g, _)| g.name.clone()).collect(),
        j_values_theta: j_theta,
        j_values_reference: refs,
        omega,
        j_c_theta,
        eta,
        true_error,
        i_eff,
        loss_primal,
        loss_adjoint,
        rel_l2,
        adjoint_r_err,
        seed: exp.seed,
        net_primal: exp.primal_shape.clone(),
        net_adjoint: exp.adjoint_shape.clone(),
        seconds: t0.seconds(),
        notes,
        checkpoint_primal: Some(crate::network::Checkpoint::new(&net_u, &theta_u)),
        checkpoint_adjoint: Some(crate::network::Checkpoint::new(&net_z, &theta_z)),
        traces: vec![trace_u, trace_z],
    })
}
