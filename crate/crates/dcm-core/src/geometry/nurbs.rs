//! NURBS curves and tensor-product surfaces.
//!
//! Rational basis `R_{k,p} = w_k N_{k,p} / sum_i w_i N_{i,p}` over B-spline
//! bases with strictly positive weights; quadratic rational arcs represent
//! circles exactly, and knot insertion refines a curve without changing its
//! geometry.

use serde::{Deserialize, Serialize};

use super::bspline::{bspline_basis, bspline_basis_ders, find_span};
use crate::{DcmError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NurbsCurve {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub ctrl: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl NurbsCurve {
    pub fn new(degree: usize, knots: Vec<f64>, ctrl: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        let n = ctrl.len();
        if weights.len() != n {
            return Err(DcmError::Geometry(format!(
                "{} weights for {} control points",
                weights.len(),
                n
            )));
        }
        if knots.len() != n + degree + 1 {
            return Err(DcmError::Geometry(format!(
                "knot vector length {} != n + p + 1 = {}",
                knots.len(),
                n + degree + 1
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(DcmError::Geometry("knots must be nondecreasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(DcmError::Geometry("weights must be strictly positive".into()));
        }
        Ok(NurbsCurve { degree, knots, ctrl, weights })
    }

    /// Valid parameter range `[Xi_p, Xi_n]`.
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[self.degree], self.knots[self.ctrl.len()])
    }

    fn check_param(&self, u: f64) -> Result<()> {
        let (a, b) = self.domain();
        if u < a - 1e-12 || u > b + 1e-12 {
            return Err(DcmError::Geometry(format!("parameter {u} outside [{a}, {b}]")));
        }
        Ok(())
    }

    /// Point on the curve: `sum_k R_{k,p}(u) * ctrl_k`.
    pub fn eval(&self, u: f64) -> Result<[f64; 2]> {
        self.check_param(u)?;
        let (a, b) = self.domain();
        let u = u.clamp(a, b);
        let span = find_span(&self.knots, self.degree, self.ctrl.len(), u);
        let basis = bspline_basis(&self.knots, self.degree, span, u);
        let (mut x, mut y, mut w) = (0.0, 0.0, 0.0);
        for (j, bj) in basis.iter().enumerate() {
            let k = span - self.degree + j;
            let wk = self.weights[k] * bj;
            x += wk * self.ctrl[k][0];
            y += wk * self.ctrl[k][1];
            w += wk;
        }
        Ok([x / w, y / w])
    }

    /// Point and first derivative with respect to the parameter.
    pub fn eval_with_derivative(&self, u: f64) -> Result<([f64; 2], [f64; 2])> {
        self.check_param(u)?;
        let (a, b) = self.domain();
        let u = u.clamp(a, b);
        let span = find_span(&self.knots, self.degree, self.ctrl.len(), u);
        let ders = bspline_basis_ders(&self.knots, self.degree, span, u, 1);
        let (mut aw, mut adw) = ([0.0f64; 3], [0.0f64; 3]); // homogeneous (wx, wy, w)
        for j in 0..=self.degree {
            let k = span - self.degree + j;
            let wk = self.weights[k];
            let p = self.ctrl[k];
            aw[0] += ders[0][j] * wk * p[0];
            aw[1] += ders[0][j] * wk * p[1];
            aw[2] += ders[0][j] * wk;
            adw[0] += ders[1][j] * wk * p[0];
            adw[1] += ders[1][j] * wk * p[1];
            adw[2] += ders[1][j] * wk;
        }
        let point = [aw[0] / aw[2], aw[1] / aw[2]];
        let deriv = [
            (adw[0] - point[0] * adw[2]) / aw[2],
            (adw[1] - point[1] * adw[2]) / aw[2],
        ];
        Ok((point, deriv))
    }

    /// Insert `u` once (Boehm's algorithm in homogeneous coordinates); the
    /// returned curve has one more control point and identical geometry.
    pub fn knot_insert(&self, u: f64) -> Result<NurbsCurve> {
        let (a, b) = self.domain();
        if u <= a || u >= b {
            return Err(DcmError::Geometry(format!("insertion point {u} outside ({a}, {b})")));
        }
        let p = self.degree;
        let mult = self.knots.iter().filter(|&&k| (k - u).abs() < 1e-14).count();
        if mult >= p {
            return Err(DcmError::Geometry(format!(
                "knot {u} already has multiplicity {mult} = degree"
            )));
        }
        let span = find_span(&self.knots, p, self.ctrl.len(), u);

        let mut knots = Vec::with_capacity(self.knots.len() + 1);
        knots.extend_from_slice(&self.knots[..=span]);
        knots.push(u);
        knots.extend_from_slice(&self.knots[span + 1..]);

        let hw = |k: usize| -> [f64; 3] {
            let w = self.weights[k];
            [w * self.ctrl[k][0], w * self.ctrl[k][1], w]
        };
        let mut ctrl = Vec::with_capacity(self.ctrl.len() + 1);
        let mut weights = Vec::with_capacity(self.ctrl.len() + 1);
        for i in 0..=self.ctrl.len() {
            let hp = if i <= span - p {
                hw(i)
            } else if i > span {
                hw(i - 1)
            } else {
                let alpha = (u - self.knots[i]) / (self.knots[i + p] - self.knots[i]);
                let (q0, q1) = (hw(i - 1), hw(i));
                [
                    (1.0 - alpha) * q0[0] + alpha * q1[0],
                    (1.0 - alpha) * q0[1] + alpha * q1[1],
                    (1.0 - alpha) * q0[2] + alpha * q1[2],
                ]
            };
            ctrl.push([hp[0] / hp[2], hp[1] / hp[2]]);
            weights.push(hp[2]);
        }
        NurbsCurve::new(p, knots, ctrl, weights)
    }

    /// The standard 9-control-point quadratic rational unit circle
    /// (four 90-degree arcs, middle weights sqrt(2)/2).
    pub fn unit_circle() -> NurbsCurve {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ctrl = vec![
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [-1.0, 1.0],
            [-1.0, 0.0],
            [-1.0, -1.0],
            [0.0, -1.0],
            [1.0, -1.0],
            [1.0, 0.0],
        ];
        let weights = vec![1.0, s, 1.0, s, 1.0, s, 1.0, s, 1.0];
        let knots = vec![0.0, 0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0];
        NurbsCurve::new(2, knots, ctrl, weights).expect("circle data is valid")
    }
}

/// Tensor-product NURBS surface with a rectangular control net.
/// Control points and weights are stored row-major over (u, v):
/// index `(i, j) -> i * size_v + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NurbsSurface {
    pub degree_u: usize,
    pub degree_v: usize,
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub size_u: usize,
    pub size_v: usize,
    pub ctrl: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl NurbsSurface {
    pub fn new(
        degree_u: usize,
        degree_v: usize,
        knots_u: Vec<f64>,
        knots_v: Vec<f64>,
        size_u: usize,
        size_v: usize,
        ctrl: Vec<[f64; 2]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if ctrl.len() != size_u * size_v || weights.len() != ctrl.len() {
            return Err(DcmError::Geometry("control net size mismatch".into()));
        }
        if knots_u.len() != size_u + degree_u + 1 || knots_v.len() != size_v + degree_v + 1 {
            return Err(DcmError::Geometry("surface knot vector length mismatch".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(DcmError::Geometry("weights must be strictly positive".into()));
        }
        if knots_u.windows(2).any(|w| w[1] < w[0]) || knots_v.windows(2).any(|w| w[1] < w[0]) {
            return Err(DcmError::Geometry("knots must be nondecreasing".into()));
        }
        Ok(NurbsSurface { degree_u, degree_v, knots_u, knots_v, size_u, size_v, ctrl, weights })
    }

    pub fn domain(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.knots_u[self.degree_u], self.knots_u[self.size_u]),
            (self.knots_v[self.degree_v], self.knots_v[self.size_v]),
        )
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        let (p, d) = self.eval_with_jacobian(u, v)?;
        let _ = d;
        Ok(p)
    }

    /// Point and the 2x2 Jacobian [dS/du, dS/dv].
    pub fn eval_with_jacobian(&self, u: f64, v: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let ((ua, ub), (va, vb)) = self.domain();
        if u < ua - 1e-12 || u > ub + 1e-12 || v < va - 1e-12 || v > vb + 1e-12 {
            return Err(DcmError::Geometry(format!("surface parameter ({u}, {v}) out of range")));
        }
        let u = u.clamp(ua, ub);
        let v = v.clamp(va, vb);
        let su = find_span(&self.knots_u, self.degree_u, self.size_u, u);
        let sv = find_span(&self.knots_v, self.degree_v, self.size_v, v);
        let du = bspline_basis_ders(&self.knots_u, self.degree_u, su, u, 1);
        let dv = bspline_basis_ders(&self.knots_v, self.degree_v, sv, v, 1);

        // homogeneous sums: value, d/du, d/dv of (w*x, w*y, w)
        let mut a = [[0.0f64; 3]; 3];
        for i in 0..=self.degree_u {
            let iu = su - self.degree_u + i;
            for j in 0..=self.degree_v {
                let jv = sv - self.degree_v + j;
                let k = iu * self.size_v + jv;
                let w = self.weights[k];
                let p = self.ctrl[k];
                let terms = [du[0][i] * dv[0][j], du[1][i] * dv[0][j], du[0][i] * dv[1][j]];
                for (row, t) in terms.iter().enumerate() {
                    a[row][0] += t * w * p[0];
                    a[row][1] += t * w * p[1];
                    a[row][2] += t * w;
                }
            }
        }
        let w = a[0][2];
        let point = [a[0][0] / w, a[0][1] / w];
        let d_u = [(a[1][0] - point[0] * a[1][2]) / w, (a[1][1] - point[1] * a[1][2]) / w];
        let d_v = [(a[2][0] - point[0] * a[2][2]) / w, (a[2][1] - point[1] * a[2][2]) / w];
        Ok((point, [d_u, d_v]))
    }

    /// |det J| at (u, v); the area scale of the parameterization.
    pub fn jacobian_det(&self, u: f64, v: f64) -> Result<f64> {
        let (_, j) = self.eval_with_jacobian(u, v)?;
        Ok((j[0][0] * j[1][1] - j[0][1] * j[1][0]).abs())
    }

    /// Exact quarter ring r in [r0, r1], angle in [0, pi/2]: rational
    /// quadratic in u (angular), linear in v (radial).
    pub fn quarter_annulus(r0: f64, r1: f64) -> NurbsSurface {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let arc = [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let wts = [1.0, s, 1.0];
        let mut ctrl = Vec::new();
        let mut weights = Vec::new();
        for (a, w) in arc.iter().zip(wts.iter()) {
            for r in [r0, r1] {
                ctrl.push([a[0] * r, a[1] * r]);
                weights.push(*w);
            }
        }
        NurbsSurface::new(
            2,
            1,
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
            3,
            2,
            ctrl,
            weights,
        )
        .expect("ring data is valid")
    }
}

/// JSON description of a NURBS geometry, mirroring the geomdl-style fields:
/// degrees, control-net sizes, flattened control points, weights, and knot
/// vectors. A curve omits the `_v` entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NurbsJson {
    pub degree_u: usize,
    #[serde(default)]
    pub degree_v: Option<usize>,
    #[serde(default)]
    pub ctrlpts_size_u: Option<usize>,
    #[serde(default)]
    pub ctrlpts_size_v: Option<usize>,
    pub ctrlpts: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub knotvector_u: Vec<f64>,
    #[serde(default)]
    pub knotvector_v: Option<Vec<f64>>,
}

impl NurbsJson {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_curve(self) -> Result<NurbsCurve> {
        NurbsCurve::new(self.degree_u, self.knotvector_u, self.ctrlpts, self.weights)
    }

    pub fn into_surface(self) -> Result<NurbsSurface> {
        let degree_v = self
            .degree_v
            .ok_or_else(|| DcmError::Geometry("surface needs degree_v".into()))?;
        let size_u = self
            .ctrlpts_size_u
            .ok_or_else(|| DcmError::Geometry("surface needs ctrlpts_size_u".into()))?;
        let size_v = self
            .ctrlpts_size_v
            .ok_or_else(|| DcmError::Geometry("surface needs ctrlpts_size_v".into()))?;
        let knots_v = self
            .knotvector_v
            .ok_or_else(|| DcmError::Geometry("surface needs knotvector_v".into()))?;
        NurbsSurface::new(
            self.degree_u,
            degree_v,
            self.knotvector_u,
            knots_v,
            size_u,
            size_v,
            self.ctrlpts,
            self.weights,
        )
    }
}
