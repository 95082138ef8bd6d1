//! The regularized p-Laplacian family
//! `A_{d,p}(u) = div((d^2 + |grad u|^2)^((p-2)/2) grad u)` with p >= 2,
//! d >= 0, its Gateaux linearization, and the example problems on the
//! two-quarter-disc domain (Poisson for p = 2, d = 0).

use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, JetScalar};
use crate::{DcmError, Result};

/// Below this |grad u|^2 with d = 0, the singular factor is cut to zero
/// (removable limit for p > 2).
const DEGENERATE_GRAD: f64 = 1e-150;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLaplaceParams {
    pub p: f64,
    pub delta: f64,
}

impl PLaplaceParams {
    pub fn new(p: f64, delta: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(DcmError::Config(format!("p-Laplacian needs p >= 2, got {p}")));
        }
        if !(delta >= 0.0) {
            return Err(DcmError::Config(format!("p-Laplacian needs delta >= 0, got {delta}")));
        }
        Ok(PLaplaceParams { p, delta })
    }

    pub fn poisson() -> Self {
        PLaplaceParams { p: 2.0, delta: 0.0 }
    }

    fn alpha(&self) -> f64 {
        0.5 * (self.p - 2.0)
    }

    fn is_poisson(&self) -> bool {
        self.p == 2.0
    }
}

/// Strong-form residual `-A_{d,p}(u) - f` at one point, expanded as
/// `-[(d^2+|g|^2)^a lap u + (p-2)(d^2+|g|^2)^(a-1) g'Hg] - f`, a = (p-2)/2.
///
/// The second term is evaluated as `(q^a / q) * g'Hg` with q = d^2 + |g|^2
/// and returns 0 when d = 0 and the gradient degenerates.
pub fn plaplace_residual<J: JetScalar>(u: J, prm: &PLaplaceParams, f_at_x: f64) -> J {
    if prm.is_poisson() {
        return -u.lap() - f_at_x;
    }
    let gx = u.dx();
    let gy = u.dy();
    let g2 = gx * gx + gy * gy;
    let q = g2 + prm.delta * prm.delta;
    if prm.delta == 0.0 && q.val() < DEGENERATE_GRAD {
        // A(u) -> 0 as grad u -> 0 for p > 2
        return u.lit(0.0) - f_at_x;
    }
    let a = q.powf(prm.alpha());
    // g' H g
    let hxx = u.dxx();
    let hxy = u.dxy();
    let hyy = u.dyy();
    let quad = gx * (hxx * gx + hxy * gy) + gy * (hxy * gx + hyy * gy);
    let div = a * u.lap() + quad * (a / q) * (prm.p - 2.0);
    -div - f_at_x
}

/// Gateaux derivative `A'_{d,p}(u)(z)` at the frozen linearization point
/// `u`, expanded through both Hessians:
///
/// `A'(u)(z) = div(q^a grad z + (p-2) q^(a-1) (grad u . grad z) grad u)`
///  = q^a lap z + a q^(a-1) (grad q . grad z)
///  + (p-2) [ (a-1) q^(a-2) (grad q . grad u) S + q^(a-1) (grad S . grad u)
///            + q^(a-1) S lap u ]
/// with q = d^2 + |grad u|^2 and S = grad u . grad z.
pub fn plaplace_frechet<J: JetScalar>(u: J, z: J, prm: &PLaplaceParams) -> J {
    if prm.is_poisson() {
        return z.lap();
    }
    let (ux, uy) = (u.dx(), u.dy());
    let (zx, zy) = (z.dx(), z.dy());
    let (uxx, uxy, uyy) = (u.dxx(), u.dxy(), u.dyy());
    let (zxx, zxy, zyy) = (z.dxx(), z.dxy(), z.dyy());
    let g2 = ux * ux + uy * uy;
    let q = g2 + prm.delta * prm.delta;
    if prm.delta == 0.0 && q.val() < DEGENERATE_GRAD {
        // all coupling terms vanish with grad u; for p > 2 so does q^a lap z
        return z.lit(0.0);
    }
    let a_exp = prm.alpha();
    let qa = q.powf(a_exp);
    // grad q = 2 (H_u grad u)
    let qx = (uxx * ux + uxy * uy) * 2.0;
    let qy = (uxy * ux + uyy * uy) * 2.0;
    let s = ux * zx + uy * zy;
    let sx = uxx * zx + ux * zxx + uxy * zy + uy * zxy;
    let sy = uxy * zx + ux * zxy + uyy * zy + uy * zyy;

    let t1 = qa * z.lap() + (qa / q) * (qx * zx + qy * zy) * a_exp;
    let t2 = ((qa / (q * q)) * (qx * ux + qy * uy) * s * (a_exp - 1.0)
        + (qa / q) * (sx * ux + sy * uy)
        + (qa / q) * s * u.lap())
        * (prm.p - 2.0);
    t1 + t2
}

/// Reference solution of Cases II/III: `U = 1 - x^2 - y^2` as a jet.
pub fn radial_bump_exact(x: [f64; 2]) -> Jet2 {
    let xj = Jet2::seed_x(x[0]);
    let yj = Jet2::seed_y(x[1]);
    -(xj * xj) - yj * yj + 1.0
}

/// Reference solution of Case I: `U = xy(1 - x^2 - y^2)` as a jet.
pub fn case1_exact(x: [f64; 2]) -> Jet2 {
    let xj = Jet2::seed_x(x[0]);
    let yj = Jet2::seed_y(x[1]);
    xj * yj * (-(xj * xj) - yj * yj + 1.0)
}

/// Case II source (p = 2.5, d = 0.05):
/// `f = (4 d^2 + 20 (x^2+y^2)) / (d^2 + 4 (x^2+y^2))^{3/4}`.
pub fn case2_source(prm: &PLaplaceParams, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let d2 = prm.delta * prm.delta;
    (4.0 * d2 + 20.0 * r2) / (d2 + 4.0 * r2).powf(0.75)
}

/// Case III source for arbitrary (p, d): `f = -A_{d,p}(U)` generated by
/// substituting the fixed exact solution `U = 1 - x^2 - y^2` through the
/// operator with exact jets.
pub fn case3_source(prm: &PLaplaceParams, x: [f64; 2]) -> f64 {
    plaplace_residual(radial_bump_exact(x), prm, 0.0).val()
}
