//! Stationary incompressible Navier-Stokes: residuals, the strong-form
//! adjoint operator, and the manufactured solution used on the frame domain
//! (a Kovasznay-like exponential/trigonometric field, with the forcing
//! obtained by substitution).

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, JetScalar, UnaryKind};
use crate::{DcmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsParams {
    /// Dynamic viscosity.
    pub nu: f64,
    /// Reynolds number for the drag/lift scale.
    pub re: f64,
    /// 1 / (nu * Re).
    pub c_re: f64,
}

impl NsParams {
    pub fn new(nu: f64, re: f64) -> Result<Self> {
        if !(nu > 0.0) || !(re > 0.0) {
            return Err(DcmError::Config(format!("need nu > 0 and Re > 0, got {nu}, {re}")));
        }
        Ok(NsParams { nu, re, c_re: 1.0 / (nu * re) })
    }

    /// The paper's example values: nu = 0.05, Re = 100.
    pub fn example() -> Self {
        NsParams::new(0.05, 100.0).unwrap()
    }
}

/// Exact velocity/pressure fields:
/// u = 1 - e^{-x/2} sin(2 pi y),
/// v = (1/4pi) e^{-x/2} cos(2 pi y),
/// p = 1 - e^{-(x+y)/2}; div(u, v) = 0.
pub fn exact_fields(x: [f64; 2]) -> [Jet2; 3] {
    let xj = Jet2::seed_x(x[0]);
    let yj = Jet2::seed_y(x[1]);
    let two_pi = 2.0 * std::f64::consts::PI;
    let ex = (xj * (-0.5)).apply_unary(UnaryKind::Exp);
    let sin_y = (yj * two_pi).apply_unary(UnaryKind::Sin);
    let cos_y = (yj * two_pi).apply_unary(UnaryKind::Cos);
    let u = -(ex * sin_y) + 1.0;
    let v = ex * cos_y * (1.0 / (4.0 * std::f64::consts::PI));
    let p = -((xj + yj) * (-0.5)).apply_unary(UnaryKind::Exp) + 1.0;
    [u, v, p]
}

/// Momentum forcing from substituting the exact fields into the equations:
/// `f = -nu lap u + (u . grad) u + grad p`.
pub fn exact_forcing(prm: &NsParams, x: [f64; 2]) -> [f64; 2] {
    let [u, v, p] = exact_fields(x);
    [
        -prm.nu * u.laplacian() + u.v * u.gx + v.v * u.gy + p.gx,
        -prm.nu * v.laplacian() + u.v * v.gx + v.v * v.gy + p.gy,
    ]
}

/// Strong-form residuals at one point: two momentum rows
/// `-nu lap u + (u . grad) u + grad p - f` and the continuity row
/// `div u`. The continuity component never touches the pressure jet.
pub fn ns_residual<J: JetScalar>(jets: &[J; 3], prm: &NsParams, f_at_x: [f64; 2]) -> [J; 3] {
    let (u, v, p) = (jets[0], jets[1], jets[2]);
    let (uv, vv) = (u.v(), v.v());
    let mom_x = -u.lap() * prm.nu + uv * u.dx() + vv * u.dy() + p.dx() - f_at_x[0];
    let mom_y = -v.lap() * prm.nu + uv * v.dx() + vv * v.dy() + p.dy() - f_at_x[1];
    let cont = u.dx() + v.dy();
    [mom_x, mom_y, cont]
}

/// Strong-form adjoint operator, exactly as printed:
/// `-nu lap z - u . grad z - (div u) z + (grad u) z + grad pi = rhs`,
/// plus adjoint incompressibility `div z = rhs_p`. The primal jets are
/// frozen data. Some references transpose the `(grad u) z` term; this
/// implementation keeps the paper's form.
pub fn ns_adjoint_residual<J: JetScalar>(
    z_jets: &[J; 3],
    primal: &[Jet2; 3],
    prm: &NsParams,
    rhs: [f64; 3],
) -> [J; 3] {
    let (z1, z2, pi) = (z_jets[0], z_jets[1], z_jets[2]);
    let (z1v, z2v) = (z1.v(), z2.v());
    let [u, v, _] = *primal;
    let div_u = u.gx + v.gy;
    let adj_x = -z1.lap() * prm.nu - (z1.dx() * u.v + z1.dy() * v.v) - z1v * div_u
        + (z1v * u.gx + z2v * u.gy)
        + pi.dx()
        - rhs[0];
    let adj_y = -z2.lap() * prm.nu - (z2.dx() * u.v + z2.dy() * v.v) - z2v * div_u
        + (z1v * v.gx + z2v * v.gy)
        + pi.dy()
        - rhs[1];
    let cont = z1.dx() + z2.dy() - rhs[2];
    [adj_x, adj_y, cont]
}
