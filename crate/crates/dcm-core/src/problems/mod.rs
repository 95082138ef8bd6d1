//! Strong-form PDE problems: residual operators, boundary operators with
//! their data, manufactured exact solutions, and the pointwise residual loss
//! over a collocation set.

mod navier_stokes;
mod plaplace;

pub use navier_stokes::{exact_fields, exact_forcing, ns_adjoint_residual, ns_residual, NsParams};
pub use plaplace::{
    case1_exact, case2_source, case3_source, plaplace_frechet, plaplace_residual,
    radial_bump_exact, PLaplaceParams,
};

use std::sync::Arc;

use crate::autodiff::{Jet2, JetScalar, Tape};
use crate::geometry::{BcTag, BoundaryPoint, CollocationSet, Domain};
use crate::network::Mlp;
use crate::optimize::Objective;
use crate::{DcmError, Result};

/// Pointwise scalar data (sources, boundary data, adjoint right-hand sides).
pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
/// Pointwise vector data.
pub type VectorField = Arc<dyn Fn([f64; 2]) -> Vec<f64> + Send + Sync>;
/// A frozen field evaluated as jets (exact solutions, trained networks).
pub type JetFieldFn = Arc<dyn Fn([f64; 2]) -> Vec<Jet2> + Send + Sync>;

/// The interior residual operator of a problem.
#[derive(Clone)]
pub enum ResidualOp {
    /// `-A_{d,p}(u) - f`.
    PLaplace { params: PLaplaceParams, source: ScalarField },
    /// Linearized adjoint `A'_{d,p}(u_theta)(z) - j` with frozen primal jets.
    PLaplaceAdjoint { params: PLaplaceParams, primal: JetFieldFn, rhs: ScalarField },
    /// Momentum + continuity rows with forcing by substitution.
    NavierStokes { params: NsParams, forcing: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync> },
    /// The printed strong-form adjoint with frozen primal jets.
    NavierStokesAdjoint {
        params: NsParams,
        primal: JetFieldFn,
        rhs: Arc<dyn Fn([f64; 2]) -> [f64; 3] + Send + Sync>,
    },
}

impl ResidualOp {
    pub fn n_fields(&self) -> usize {
        match self {
            ResidualOp::PLaplace { .. } | ResidualOp::PLaplaceAdjoint { .. } => 1,
            ResidualOp::NavierStokes { .. } | ResidualOp::NavierStokesAdjoint { .. } => 3,
        }
    }

    /// Interior residual rows at `x` for the given field jets.
    pub fn eval<J: JetScalar>(&self, x: [f64; 2], fields: &[J]) -> Vec<J> {
        match self {
            ResidualOp::PLaplace { params, source } => {
                vec![plaplace_residual(fields[0], params, source(x))]
            }
            ResidualOp::PLaplaceAdjoint { params, primal, rhs } => {
                // the primal problem is -A(u) = f, so the linearized adjoint
                // equation reads -A'(u_theta)(z) = j
                let u = fields[0].lit_jet(primal(x)[0]);
                vec![-plaplace_frechet(u, fields[0], params) - rhs(x)]
            }
            ResidualOp::NavierStokes { params, forcing } => {
                let jets = [fields[0], fields[1], fields[2]];
                ns_residual(&jets, params, forcing(x)).to_vec()
            }
            ResidualOp::NavierStokesAdjoint { params, primal, rhs } => {
                let p = primal(x);
                let prim = [p[0], p[1], p[2]];
                let jets = [fields[0], fields[1], fields[2]];
                ns_adjoint_residual(&jets, &prim, params, rhs(x)).to_vec()
            }
        }
    }
}

/// Boundary operator data for one segment; the operator kind follows the
/// segment's tag.
#[derive(Clone)]
pub struct SegmentBc {
    pub tag: BcTag,
    /// Dirichlet: one value per constrained field; Neumann: one value.
    pub data: VectorField,
}

/// A boundary-value problem on a domain: interior operator, per-segment
/// boundary data, and (when available) the exact solution as jets.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Domain,
    pub op: ResidualOp,
    pub bc: Vec<SegmentBc>,
    /// Fields constrained by Dirichlet boundaries (all for scalars, the
    /// velocity components for Navier-Stokes).
    pub bc_fields: Vec<usize>,
    pub exact: Option<JetFieldFn>,
}

impl ProblemSpec {
    pub fn n_fields(&self) -> usize {
        self.op.n_fields()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bc.len() != self.domain.segments.len() {
            return Err(DcmError::Config(format!(
                "problem '{}' has {} boundary conditions for {} segments",
                self.name,
                self.bc.len(),
                self.domain.segments.len()
            )));
        }
        for (seg, bc) in self.domain.segments.iter().zip(&self.bc) {
            if seg.tag != bc.tag {
                return Err(DcmError::Config(format!(
                    "segment '{}' tag does not match its boundary data",
                    seg.name
                )));
            }
        }
        Ok(())
    }

    /// Boundary residual rows at a collocation boundary point.
    pub fn boundary_residuals<J: JetScalar>(&self, fields: &[J], bp: &BoundaryPoint) -> Vec<J> {
        let bc = &self.bc[bp.segment];
        let data = (bc.data)(bp.point);
        match bc.tag {
            BcTag::Dirichlet => self
                .bc_fields
                .iter()
                .enumerate()
                .map(|(i, &k)| fields[k].v() - data[i])
                .collect(),
            BcTag::NeumannX => vec![fields[0].dx() - data[0]],
            BcTag::NeumannY => vec![fields[0].dy() - data[0]],
        }
    }

    pub fn exact_values(&self, x: [f64; 2]) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(x).iter().map(|j| j.v).collect())
    }
}

/// Run chunked work either on the rayon pool or sequentially; results come
/// back in chunk order either way, so reductions are bit-deterministic and
/// independent of the thread count.
pub(crate) fn map_chunks<T: Send, F>(n: usize, chunk: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(std::ops::Range<usize>) -> Result<T> + Send + Sync,
{
    let ranges: Vec<std::ops::Range<usize>> =
        (0..n.div_ceil(chunk)).map(|c| (c * chunk)..((c * chunk + chunk).min(n))).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ranges.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().map(f).collect()
    }
}

const LOSS_CHUNK: usize = 32;

/// The collocation loss in Eq.-(1) form, exposing exact gradients to the
/// optimizer: mean squared interior residual rows plus mean squared boundary
/// mismatches. Point index space: interior points first, then boundary.
pub struct ResidualLoss<'a> {
    pub problem: &'a ProblemSpec,
    pub net: &'a Mlp,
    pub colloc: &'a CollocationSet,
}

impl<'a> ResidualLoss<'a> {
    pub fn new(problem: &'a ProblemSpec, net: &'a Mlp, colloc: &'a CollocationSet) -> Result<Self> {
        problem.validate()?;
        if net.out_dim() != problem.n_fields() {
            return Err(DcmError::ShapeMismatch(format!(
                "network has {} outputs, problem '{}' needs {}",
                net.out_dim(),
                problem.name,
                problem.n_fields()
            )));
        }
        if colloc.n_int() == 0 || colloc.n_bnd() == 0 {
            return Err(DcmError::Config(
                "collocation set must contain interior and boundary points".into(),
            ));
        }
        Ok(ResidualLoss { problem, net, colloc })
    }

    /// Squared residual sum recorded on a tape for one point index.
    fn point_term<'t>(
        &self,
        tape: &'t Tape,
        theta: &[f64],
        idx: usize,
    ) -> crate::autodiff::TJet<'t> {
        let n_int = self.colloc.n_int();
        let rows = if idx < n_int {
            let x = self.colloc.interior[idx];
            let fields = self.net.tape_jets(tape, theta, x);
            self.problem.op.eval(x, &fields)
        } else {
            let bp = &self.colloc.boundary[idx - n_int];
            let fields = self.net.tape_jets(tape, theta, bp.point);
            self.problem.boundary_residuals(&fields, bp)
        };
        let mut acc = rows[0] * rows[0];
        for r in &rows[1..] {
            acc = acc + *r * *r;
        }
        acc
    }

    fn eval_indices(&self, theta: &[f64], indices: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
        let n_int = self.colloc.n_int();
        let total = n_int + self.colloc.n_bnd();
        let owned: Vec<usize>;
        let idxs: &[usize] = match indices {
            Some(s) => s,
            None => {
                owned = (0..total).collect();
                &owned
            }
        };
        let ci = idxs.iter().filter(|&&i| i < n_int).count();
        let cb = idxs.len() - ci;
        let w_int = if ci > 0 { 1.0 / ci as f64 } else { 0.0 };
        let w_bnd = if cb > 0 { 1.0 / cb as f64 } else { 0.0 };

        let partials = map_chunks(idxs.len(), LOSS_CHUNK, |range| {
            let tape = Tape::with_capacity(4096);
            let mut grad = vec![0.0; theta.len()];
            let mut loss = 0.0;
            for k in range {
                let idx = idxs[k];
                tape.clear();
                let term = self.point_term(&tape, theta, idx);
                let v = term.jet().v;
                if !v.is_finite() {
                    return Err(DcmError::NonFinite {
                        point: idx,
                        context: format!("residual loss of '{}'", self.problem.name),
                    });
                }
                let coeff = if idx < n_int { w_int } else { w_bnd };
                loss += coeff * v;
                tape.backward_seeded(theta, term, coeff, &mut grad);
            }
            Ok((loss, grad))
        })?;

        let mut loss = 0.0;
        let mut grad = vec![0.0; theta.len()];
        for (l, g) in partials {
            loss += l;
            for (gi, pi) in grad.iter_mut().zip(&g) {
                *gi += pi;
            }
        }
        Ok((loss, grad))
    }

    /// Loss value only (plain jets, no tape).
    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        let n_int = self.colloc.n_int();
        let n_bnd = self.colloc.n_bnd();
        let sums = map_chunks(n_int + n_bnd, 2 * LOSS_CHUNK, |range| {
            let mut acc = 0.0;
            for idx in range {
                let rows = if idx < n_int {
                    let x = self.colloc.interior[idx];
                    self.problem.op.eval(x, &self.net.jets(theta, x))
                } else {
                    let bp = &self.colloc.boundary[idx - n_int];
                    self.problem.boundary_residuals(&self.net.jets(theta, bp.point), bp)
                };
                let term: f64 = rows.iter().map(|r| r.v * r.v).sum();
                if !term.is_finite() {
                    return Err(DcmError::NonFinite {
                        point: idx,
                        context: format!("residual loss of '{}'", self.problem.name),
                    });
                }
                acc += term * if idx < n_int { 1.0 / n_int as f64 } else { 1.0 / n_bnd as f64 };
            }
            Ok(acc)
        })?;
        Ok(sums.iter().sum())
    }
}

impl Objective for ResidualLoss<'_> {
    fn value_grad(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.eval_indices(theta, None)
    }

    fn n_terms(&self) -> Option<usize> {
        Some(self.colloc.n_int() + self.colloc.n_bnd())
    }

    fn value_grad_terms(&self, theta: &[f64], terms: &[usize]) -> Result<(f64, Vec<f64>)> {
        self.eval_indices(theta, Some(terms))
    }
}

/// Relative L2 error over test points:
/// `sqrt(sum |u_err|^2) / sqrt(sum |U|^2)`, restricted to `fields`.
pub fn relative_l2(
    net: &Mlp,
    theta: &[f64],
    exact: &JetFieldFn,
    points: &[[f64; 2]],
    fields: &[usize],
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in points {
        let got = net.value(theta, x);
        let want = exact(x);
        for &k in fields {
            let e = want[k].v - got[k];
            num += e * e;
            den += want[k].v * want[k].v;
        }
    }
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}

/// Residual-error metric of an (adjoint) problem on test points: the mean
/// over points of the squared interior residual rows.
pub fn residual_error_metric(
    problem: &ProblemSpec,
    net: &Mlp,
    theta: &[f64],
    points: &[[f64; 2]],
) -> f64 {
    let mut acc = 0.0;
    for &x in points {
        let rows = problem.op.eval(x, &net.jets(theta, x));
        acc += rows.iter().map(|r| r.v * r.v).sum::<f64>();
    }
    acc / points.len() as f64
}

fn dirichlet_zero(domain: &Domain) -> Vec<SegmentBc> {
    domain
        .segments
        .iter()
        .map(|seg| SegmentBc { tag: seg.tag, data: Arc::new(|_| vec![0.0, 0.0, 0.0]) })
        .collect()
}

/// Case I: Poisson `-lap u = 12xy` on the two-quarter-disc domain with
/// homogeneous Dirichlet data; exact solution `xy(1 - x^2 - y^2)`.
pub fn poisson_case1() -> ProblemSpec {
    let domain = Domain::quarter_disc_pair();
    let bc = dirichlet_zero(&domain);
    ProblemSpec {
        name: "poisson_case1".into(),
        op: ResidualOp::PLaplace {
            params: PLaplaceParams::poisson(),
            source: Arc::new(|x| 12.0 * x[0] * x[1]),
        },
        bc,
        bc_fields: vec![0],
        exact: Some(Arc::new(|x| vec![case1_exact(x)])),
        domain,
    }
}

/// Same Poisson problem posed on the unit disc (the exact solution also
/// vanishes on the unit circle); the linear oracle for the error estimator.
pub fn poisson_disc() -> ProblemSpec {
    let domain = Domain::unit_disc();
    let bc = dirichlet_zero(&domain);
    ProblemSpec {
        name: "poisson_disc".into(),
        op: ResidualOp::PLaplace {
            params: PLaplaceParams::poisson(),
            source: Arc::new(|x| 12.0 * x[0] * x[1]),
        },
        bc,
        bc_fields: vec![0],
        exact: Some(Arc::new(|x| vec![case1_exact(x)])),
        domain,
    }
}

fn mixed_bc_domain() -> Domain {
    let mut domain = Domain::quarter_disc_pair();
    domain.set_bc("arc", BcTag::Dirichlet).unwrap();
    domain.set_bc("x", BcTag::NeumannX).unwrap();
    domain.set_bc("y", BcTag::NeumannY).unwrap();
    domain
}

fn mixed_bc_data(domain: &Domain) -> Vec<SegmentBc> {
    domain
        .segments
        .iter()
        .map(|seg| SegmentBc {
            tag: seg.tag,
            data: match seg.tag {
                // U = 1 - r^2 vanishes on the arcs
                BcTag::Dirichlet => Arc::new(|_: [f64; 2]| vec![0.0]) as VectorField,
                // dU/dx = -2x on y = 0
                BcTag::NeumannX => Arc::new(|x: [f64; 2]| vec![-2.0 * x[0]]),
                // dU/dy = -2y on x = 0
                BcTag::NeumannY => Arc::new(|x: [f64; 2]| vec![-2.0 * x[1]]),
            },
        })
        .collect()
}

/// Case II: the regularized p-Laplacian (p = 2.5, delta = 0.05) with mixed
/// boundary conditions, exact solution `1 - x^2 - y^2`.
pub fn plaplace_case2() -> ProblemSpec {
    let domain = mixed_bc_domain();
    let params = PLaplaceParams::new(2.5, 0.05).unwrap();
    ProblemSpec {
        name: "plaplace_case2".into(),
        bc: mixed_bc_data(&domain),
        op: ResidualOp::PLaplace { params, source: Arc::new(move |x| case2_source(&params, x)) },
        bc_fields: vec![0],
        exact: Some(Arc::new(|x| vec![radial_bump_exact(x)])),
        domain,
    }
}

/// Case III: the (p, delta) sweep with the source and boundary data chosen
/// so the exact solution stays `1 - x^2 - y^2`.
pub fn plaplace_case3(p: f64, delta: f64) -> Result<ProblemSpec> {
    let params = PLaplaceParams::new(p, delta)?;
    let domain = mixed_bc_domain();
    Ok(ProblemSpec {
        name: format!("plaplace_case3(p={p},delta={delta})"),
        bc: mixed_bc_data(&domain),
        op: ResidualOp::PLaplace { params, source: Arc::new(move |x| case3_source(&params, x)) },
        bc_fields: vec![0],
        exact: Some(Arc::new(|x| vec![radial_bump_exact(x)])),
        domain,
    })
}

/// Stationary Navier-Stokes on the frame domain with the Kovasznay-like
/// manufactured solution; velocity Dirichlet data everywhere.
pub fn ns_kovasznay_like() -> ProblemSpec {
    let domain = Domain::ns_frame();
    let params = NsParams::example();
    let bc = domain
        .segments
        .iter()
        .map(|seg| SegmentBc {
            tag: seg.tag,
            data: Arc::new(|x: [f64; 2]| {
                let f = exact_fields(x);
                vec![f[0].v, f[1].v]
            }) as VectorField,
        })
        .collect();
    ProblemSpec {
        name: "ns_kovasznay_like".into(),
        bc,
        op: ResidualOp::NavierStokes {
            params,
            forcing: Arc::new(move |x| exact_forcing(&params, x)),
        },
        bc_fields: vec![0, 1],
        exact: Some(Arc::new(|x| exact_fields(x).to_vec())),
        domain,
    }
}

/// The frame-domain problem carrying the subdomain goal functionals; the
/// source text never states its equation, so the regularized p-Laplacian of
/// the surrounding examples (p = 2.5, delta = 0.05) with homogeneous
/// Dirichlet data is used. No exact solution is shipped.
pub fn subdomain_functionals() -> ProblemSpec {
    let domain = Domain::ns_frame();
    let bc = dirichlet_zero(&domain);
    let params = PLaplaceParams::new(2.5, 0.05).unwrap();
    ProblemSpec {
        name: "subdomain_functionals".into(),
        bc,
        op: ResidualOp::PLaplace { params, source: Arc::new(move |x| case2_source(&params, x)) },
        bc_fields: vec![0],
        exact: None,
        domain,
    }
}

/// Look up a shipped problem by its config name.
pub fn by_name(name: &str, p: Option<f64>, delta: Option<f64>) -> Result<ProblemSpec> {
    match name {
        "poisson_case1" => Ok(poisson_case1()),
        "poisson_disc" => Ok(poisson_disc()),
        "plaplace_case2" => Ok(plaplace_case2()),
        "plaplace_case3" => {
            let p = p.ok_or_else(|| DcmError::Config("plaplace_case3 needs p".into()))?;
            let d = delta.ok_or_else(|| DcmError::Config("plaplace_case3 needs delta".into()))?;
            plaplace_case3(p, d)
        }
        "ns_kovasznay_like" => Ok(ns_kovasznay_like()),
        "subdomain_functionals" => Ok(subdomain_functionals()),
        other => Err(DcmError::Config(format!("unknown problem '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_collocation;
    use crate::network::{BiasInit, Mlp};
    use approx::assert_relative_eq;

    fn small_setup() -> (ProblemSpec, Mlp, CollocationSet) {
        let problem = poisson_case1();
        let (lb, ub) = problem.domain.bbox();
        let net = Mlp::uniform(vec![2, 8, 1], crate::autodiff::Activation::Tanh, lb, ub).unwrap();
        let colloc = sample_collocation(&problem.domain, 9, 9, None).unwrap();
        (problem, net, colloc)
    }

    #[test]
    fn manufactured_solutions_zero_every_shipped_residual() {
        let problems = vec![
            poisson_case1(),
            poisson_disc(),
            plaplace_case2(),
            plaplace_case3(3.0, 0.25).unwrap(),
            ns_kovasznay_like(),
        ];
        for prob in problems {
            let exact = prob.exact.clone().expect("shipped exact");
            let colloc = sample_collocation(&prob.domain, 21, 21, None).unwrap();
            for &x in &colloc.interior {
                let rows = prob.op.eval(x, &exact(x));
                for r in rows {
                    assert!(r.v.abs() < 1e-10, "{}: interior residual {} at {x:?}", prob.name, r.v);
                }
            }
            for bp in &colloc.boundary {
                let rows = prob.boundary_residuals(&exact(bp.point), bp);
                for r in rows {
                    assert!(
                        r.v.abs() < 1e-10,
                        "{}: boundary residual {} at {:?}",
                        prob.name,
                        r.v,
                        bp.point
                    );
                }
            }
        }
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let (problem, net, colloc) = small_setup();
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
        let p = net.xavier_init(3, BiasInit::Zero);
        let (f0, grad) = loss.value_grad(&p.values).unwrap();
        assert!(f0 > 0.0);
        let h = 1e-5;
        let mut checked = 0;
        for i in (0..p.values.len()).step_by(7) {
            let mut tp = p.values.clone();
            let mut tm = p.values.clone();
            tp[i] += h;
            tm[i] -= h;
            let fp = loss.value_grad(&tp).unwrap().0;
            let fm = loss.value_grad(&tm).unwrap().0;
            let fd = (fp - fm) / (2.0 * h);
            assert_relative_eq!(grad[i], fd, max_relative = 1e-6, epsilon = 1e-9);
            checked += 1;
        }
        assert!(checked > 3);
    }

    #[test]
    fn loss_value_paths_agree() {
        let (problem, net, colloc) = small_setup();
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
        let p = net.xavier_init(11, BiasInit::Zero);
        let (via_grad, _) = loss.value_grad(&p.values).unwrap();
        let plain = loss.value(&p.values).unwrap();
        assert_relative_eq!(via_grad, plain, max_relative = 1e-12);
    }

    #[test]
    fn single_interior_point_loss_is_squared_residual() {
        let (problem, net, _) = small_setup();
        let mut colloc = CollocationSet::default();
        colloc.interior.push([0.5, -0.5]);
        colloc.boundary.push(BoundaryPoint {
            point: [1.0, 0.0],
            normal: [1.0, 0.0],
            tag: BcTag::Dirichlet,
            segment: 0,
        });
        let p = net.xavier_init(5, BiasInit::Zero);
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
        let total = loss.value(&p.values).unwrap();
        let jet = net.jets(&p.values, [0.5, -0.5]);
        let r = problem.op.eval([0.5, -0.5], &jet)[0].v;
        let b = net.value(&p.values, [1.0, 0.0])[0];
        assert_relative_eq!(total, r * r + b * b, max_relative = 1e-12);
    }

    #[test]
    fn loss_is_permutation_invariant_up_to_roundoff() {
        let (problem, net, colloc) = small_setup();
        let mut shuffled = colloc.clone();
        shuffled.interior.reverse();
        shuffled.boundary.reverse();
        let p = net.xavier_init(9, BiasInit::Zero);
        let a = ResidualLoss::new(&problem, &net, &colloc).unwrap().value(&p.values).unwrap();
        let b = ResidualLoss::new(&problem, &net, &shuffled).unwrap().value(&p.values).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn loss_is_deterministic_bitwise() {
        let (problem, net, colloc) = small_setup();
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
        let p = net.xavier_init(13, BiasInit::Zero);
        let (f1, g1) = loss.value_grad(&p.values).unwrap();
        let (f2, g2) = loss.value_grad(&p.values).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn relative_l2_limits() {
        let problem = poisson_case1();
        let exact = problem.exact.clone().unwrap();
        let colloc = sample_collocation(&problem.domain, 15, 15, None).unwrap();
        let net =
            Mlp::uniform(vec![2, 4, 1], crate::autodiff::Activation::Tanh, [-1.0, -1.0], [1.0, 1.0])
                .unwrap();
        // net == 0 -> ratio 1
        let zero = vec![0.0; net.n_params()];
        let r = relative_l2(&net, &zero, &exact, &colloc.interior, &[0]);
        assert_relative_eq!(r, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn mismatched_network_shape_is_rejected() {
        let problem = ns_kovasznay_like();
        let net =
            Mlp::uniform(vec![2, 8, 1], crate::autodiff::Activation::Tanh, [-1.0, -1.0], [1.0, 1.0])
                .unwrap();
        let colloc = sample_collocation(&problem.domain, 9, 9, None).unwrap();
        assert!(matches!(
            ResidualLoss::new(&problem, &net, &colloc),
            Err(DcmError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn by_name_covers_the_registry() {
        assert!(by_name("poisson_case1", None, None).is_ok());
        assert!(by_name("plaplace_case2", None, None).is_ok());
        assert!(by_name("plaplace_case3", Some(3.0), Some(0.25)).is_ok());
        assert!(by_name("plaplace_case3", None, None).is_err());
        assert!(by_name("ns_kovasznay_like", None, None).is_ok());
        assert!(by_name("subdomain_functionals", None, None).is_ok());
        assert!(by_name("bogus", None, None).is_err());
    }

    #[test]
    fn ns_loss_gradient_matches_finite_differences() {
        let problem = ns_kovasznay_like();
        let (lb, ub) = problem.domain.bbox();
        let net = Mlp::uniform(vec![2, 6, 3], crate::autodiff::Activation::Swish, lb, ub).unwrap();
        let colloc = sample_collocation(&problem.domain, 7, 7, None).unwrap();
        let loss = ResidualLoss::new(&problem, &net, &colloc).unwrap();
        let p = net.xavier_init(21, BiasInit::Zero);
        let (_, grad) = loss.value_grad(&p.values).unwrap();
        let h = 1e-6;
        for i in (0..p.values.len()).step_by(11) {
            let mut tp = p.values.clone();
            let mut tm = p.values.clone();
            tp[i] += h;
            tm[i] -= h;
            let fp = loss.value(&tp).unwrap();
            let fm = loss.value(&tm).unwrap();
            assert_relative_eq!(grad[i], (fp - fm) / (2.0 * h), max_relative = 1e-5, epsilon = 1e-8);
        }
    }
}
