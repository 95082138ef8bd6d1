//! Dev harness: Case II adjoint-solve convergence for different mollifier
//! widths, optimizer budgets, and functional subsets.
use std::sync::Arc;

use dcm_core::autodiff::Activation;
use dcm_core::dwr::{assemble_adjoint_problem, frozen_field, solve_adjoint, solve_primal};
use dcm_core::geometry::sample_collocation;
use dcm_core::goals::*;
use dcm_core::network::{BiasInit, Checkpoint, Mlp};
use dcm_core::optimize::{OptimizerConfig, QuasiNewtonKind, WolfeParams};
use dcm_core::problems::{plaplace_case2, residual_error_metric, ResidualLoss};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let moll_mult: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3.0);
    let qn_iters: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(16000);
    let subset: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0); // bitmask: 0 = all
    let adam: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let problem = plaplace_case2();
    let (lb, ub) = problem.domain.bbox();
    let acts = vec![Activation::Swish, Activation::Swish, Activation::Swish, Activation::Tanh];
    let net = Mlp::new(vec![2, 30, 30, 30, 20, 1], acts.clone(), lb, ub).unwrap();
    let colloc = sample_collocation(&problem.domain, 42, 35, None).unwrap();
    eprintln!("n_int={} n_bnd={}", colloc.n_int(), colloc.n_bnd());

    // cache the primal so adjoint experiments are cheap
    let ck_path = std::path::Path::new("/tmp/case2_primal.json");
    let theta_u = if ck_path.exists() {
        Checkpoint::load(ck_path).unwrap().into_parts().unwrap().1
    } else {
        let cfg = OptimizerConfig {
            adam_steps: 2000,
            qn_max_iters: 20000,
            tol: 2e-9,
            wolfe: WolfeParams { c2: 0.5, ..Default::default() },
            ..Default::default()
        };
        let theta0 = net.xavier_init(1, BiasInit::Zero);
        let t0 = std::time::Instant::now();
        let (theta, _) = solve_primal(&problem, &net, &theta0.values, &cfg, &colloc).unwrap();
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap().value(&theta).unwrap();
        eprintln!("primal loss {loss:.3e} in {:.0}s", t0.elapsed().as_secs_f64());
        Checkpoint::new(&net, &theta).save(ck_path).unwrap();
        theta
    };

    let h = 2.0 / 41.0;
    let mut ctx = GoalContext::new(&problem.domain, 32);
    ctx.moll_width = moll_mult * h;
    let field = frozen_field(&net, &theta_u);

    let mut parts: Vec<(GoalFunctional, f64)> = vec![
        (GoalFunctional::new("J1", GoalKind::PointValue { points: vec![[0.5, -0.5]], field: 0 }), 0.5),
        (GoalFunctional::new("J2", GoalKind::DomainIntegral { weight: Weight::One, subdomain: None, field: 0 }), 0.25),
        (GoalFunctional::new("J3", GoalKind::BoundaryFlux { segments: vec![], field: 0 }), 1.0),
    ];
    if subset > 0 {
        parts = parts.into_iter().enumerate().filter(|(i, _)| subset & (1 << i) != 0).map(|(_, p)| p).collect();
    }
    eprintln!("functionals: {:?}, moll width {:.3}", parts.iter().map(|(g, _)| g.name.clone()).collect::<Vec<_>>(), ctx.moll_width);

    let exact = problem.exact.clone().unwrap();
    let mut j_theta = Vec::new();
    let mut refs = Vec::new();
    for (g, _) in &parts {
        j_theta.push(evaluate(g, &field, &ctx).unwrap());
        refs.push(evaluate(g, &exact, &ctx).unwrap());
    }
    let jc = CombinedFunctional { parts: parts.clone(), sign_source: SignSource::ReferenceValues(refs.clone()) };
    let omega = combine_weights(&jc, &j_theta, None).unwrap();
    eprintln!("omega = {omega:?}");

    let mut rhs_parts = Vec::new();
    for ((g, _), &o) in parts.iter().zip(&omega) {
        rhs_parts.push((o, functional_derivative(g, &field, &ctx, 1).unwrap()));
    }
    let rhs = AdjointRhs::scaled_sum(rhs_parts);
    let adjoint = assemble_adjoint_problem(&problem, field, rhs).unwrap();

    let zw: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(0);
    let net_z = if zw == 0 {
        Mlp::new(vec![2, 30, 30, 30, 20, 1], acts, lb, ub).unwrap()
    } else {
        Mlp::uniform(vec![2, zw, zw, 1], Activation::Tanh, lb, ub).unwrap()
    };
    eprintln!("adjoint net: {:?} ({} params)", net_z.layer_sizes, net_z.n_params());
    let theta0 = net_z.xavier_init(2, BiasInit::Zero);
    let cfg = OptimizerConfig {
        adam_steps: adam,
        qn_max_iters: qn_iters,
        qn_kind: QuasiNewtonKind::Bfgs,
        tol: 5e-10,
        wolfe: WolfeParams { c2: 0.5, ..Default::default() },
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let (theta_z, trace) = solve_adjoint(&adjoint, &net_z, &theta0.values, &cfg, &colloc).unwrap();
    let loss_z = ResidualLoss::new(&adjoint, &net_z, &colloc).unwrap().value(&theta_z).unwrap();
    let r_err = residual_error_metric(&adjoint, &net_z, &theta_z, &colloc.interior);
    eprintln!(
        "adjoint: loss {loss_z:.3e}, R_err(colloc) {r_err:.3e}, {} iters, {:.0}s, ls_failed={}",
        trace.rows.len(),
        t0.elapsed().as_secs_f64(),
        trace.line_search_failed
    );
    for target in [1e-4_f64, 1e-6, 1e-8, 1e-9] {
        if let Some(row) = trace.rows.iter().find(|r| r.loss < target) {
            eprintln!("  loss < {target:.0e} at iter {} ({:.0}s)", row.iter, row.seconds);
        }
    }
    let _ = Arc::strong_count(&exact);
}
