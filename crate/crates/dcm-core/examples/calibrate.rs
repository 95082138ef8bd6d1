//! Dev harness: timing and convergence of the Case I primal solve.
use dcm_core::autodiff::Activation;
use dcm_core::geometry::sample_collocation;
use dcm_core::network::{BiasInit, Mlp};
use dcm_core::optimize::{train, Objective, OptimizerConfig, QuasiNewtonKind};
use dcm_core::problems::{poisson_case1, ResidualLoss};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let qn_iters: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let adam_steps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let problem = poisson_case1();
    let (lb, ub) = problem.domain.bbox();
    let net = Mlp::uniform(vec![2, 30, 30, 20, 1], Activation::Swish, lb, ub).unwrap();
    let colloc = sample_collocation(&problem.domain, 35, 30, None).unwrap();
    eprintln!("n_int={} n_bnd={} n_params={}", colloc.n_int(), colloc.n_bnd(), net.n_params());

    let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
    let theta0 = net.xavier_init(seed, BiasInit::Zero);

    let t0 = std::time::Instant::now();
    let (f, _) = loss.value_grad(&theta0.values).unwrap();
    eprintln!("one value_grad: {:.1} ms, f0 = {f:.3e}", t0.elapsed().as_secs_f64() * 1000.0);

    let c2: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.9);
    let wolfe = dcm_core::optimize::WolfeParams { c2, ..Default::default() };
    let cfg = OptimizerConfig {
        adam_steps,
        qn_max_iters: qn_iters,
        qn_kind: QuasiNewtonKind::Bfgs,
        tol: 1e-12,
        wolfe,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let (theta, trace) = train(&loss, &theta0.values, &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let fin = loss.value(&theta).unwrap();
    let n_rows = trace.rows.len();
    eprintln!(
        "seed {seed}: final loss {fin:.3e} after {n_rows} iters in {secs:.1}s (ls_failed={})",
        trace.line_search_failed
    );
    for r in trace.rows.iter().rev().take(3) {
        eprintln!("  iter {} {} loss {:.3e} |g| {:.3e} t={:.1}s", r.iter, r.phase, r.loss, r.grad_norm, r.seconds);
    }
    // loss milestones
    for target in [1e-4, 1e-6, 1e-8, 1e-10] {
        if let Some(row) = trace.rows.iter().find(|r| r.loss < target) {
            eprintln!("  loss < {target:.0e} at iter {} ({:.1}s)", row.iter, row.seconds);
        }
    }
}
