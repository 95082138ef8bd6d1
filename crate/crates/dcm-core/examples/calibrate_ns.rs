//! Dev harness: Navier-Stokes desk-scale training feasibility.
use dcm_core::autodiff::Activation;
use dcm_core::dwr::{solve_primal, test_grid};
use dcm_core::geometry::sample_collocation;
use dcm_core::network::{BiasInit, Mlp};
use dcm_core::optimize::{OptimizerConfig, QuasiNewtonKind, WolfeParams};
use dcm_core::problems::{ns_kovasznay_like, relative_l2, ResidualLoss};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nx: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(28);
    let ny: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(25);
    let adam: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let qn: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(4000);

    let problem = ns_kovasznay_like();
    let (lb, ub) = problem.domain.bbox();
    let net = Mlp::new(
        vec![2, 40, 40, 40, 3],
        vec![Activation::Swish, Activation::Swish, Activation::Tanh],
        lb,
        ub,
    )
    .unwrap();
    let colloc = sample_collocation(&problem.domain, nx, ny, None).unwrap();
    eprintln!("({nx},{ny}): n_int={} n_bnd={} params={}", colloc.n_int(), colloc.n_bnd(), net.n_params());
    let cfg = OptimizerConfig {
        adam_steps: adam,
        qn_max_iters: qn,
        qn_kind: QuasiNewtonKind::Lbfgs(50),
        tol: 1e-12,
        wolfe: WolfeParams { c2: 0.5, ..Default::default() },
        ..Default::default()
    };
    let theta0 = net.xavier_init(1, BiasInit::StandardNormal);
    let t0 = std::time::Instant::now();
    let (theta, trace) = solve_primal(&problem, &net, &theta0.values, &cfg, &colloc).unwrap();
    let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap().value(&theta).unwrap();
    let grid = test_grid(&problem, 100);
    let exact = problem.exact.clone().unwrap();
    let rel = relative_l2(&net, &theta, &exact, &grid, &[0, 1]);
    eprintln!(
        "loss {loss:.3e}, rel L2(u,v) {rel:.3e}, {} iters, {:.0}s, ls_failed={}",
        trace.rows.len(),
        t0.elapsed().as_secs_f64(),
        trace.line_search_failed
    );
}
