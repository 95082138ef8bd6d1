//! Second-order spatial jets.
//!
//! A [`Jet2`] carries a value together with both first derivatives and the
//! symmetric spatial Hessian with respect to the two domain coordinates.
//! Arithmetic propagates all six lanes by the chain rule, so evaluating a
//! composite expression on seeded jets yields exact derivatives up to second
//! order. The same unary derivative tables drive the reverse sweep of the
//! parameter tape, keeping both differentiation paths consistent.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Hidden-layer activation functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Swish,
}

/// Registered scalar primitives with analytic derivatives up to third order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnaryKind {
    Tanh,
    Sigmoid,
    Swish,
    /// t^c for constant exponent c (t > 0 in all uses).
    PowF(f64),
    /// sqrt(t^2 + eps^2), the smoothed absolute value.
    SmoothAbs(f64),
    Recip,
    Exp,
    Sin,
    Cos,
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Value and first three derivatives of a registered primitive at `t`.
pub fn unary_derivs(kind: UnaryKind, t: f64) -> [f64; 4] {
    match kind {
        UnaryKind::Tanh => {
            let y = t.tanh();
            let d1 = 1.0 - y * y;
            let d2 = -2.0 * y * d1;
            let d3 = -2.0 * (d1 * d1 + y * d2);
            [y, d1, d2, d3]
        }
        UnaryKind::Sigmoid => {
            let s = sigmoid(t);
            let d1 = s * (1.0 - s);
            let d2 = d1 * (1.0 - 2.0 * s);
            let d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
            [s, d1, d2, d3]
        }
        UnaryKind::Swish => {
            let s = sigmoid(t);
            let s1 = s * (1.0 - s);
            let s2 = s1 * (1.0 - 2.0 * s);
            let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
            [t * s, s + t * s1, 2.0 * s1 + t * s2, 3.0 * s2 + t * s3]
        }
        UnaryKind::PowF(c) => {
            let f = t.powf(c);
            let d1 = c * t.powf(c - 1.0);
            let d2 = c * (c - 1.0) * t.powf(c - 2.0);
            let d3 = c * (c - 1.0) * (c - 2.0) * t.powf(c - 3.0);
            [f, d1, d2, d3]
        }
        UnaryKind::SmoothAbs(eps) => {
            let f = (t * t + eps * eps).sqrt();
            let d1 = t / f;
            let d2 = eps * eps / (f * f * f);
            let d3 = -3.0 * t * eps * eps / (f * f * f * f * f);
            [f, d1, d2, d3]
        }
        UnaryKind::Recip => {
            let r = 1.0 / t;
            [r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]
        }
        UnaryKind::Exp => {
            let e = t.exp();
            [e, e, e, e]
        }
        UnaryKind::Sin => [t.sin(), t.cos(), -t.sin(), -t.cos()],
        UnaryKind::Cos => [t.cos(), -t.sin(), -t.cos(), t.sin()],
    }
}

/// Value, spatial gradient, and symmetric spatial Hessian at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 { v: 0.0, gx: 0.0, gy: 0.0, hxx: 0.0, hxy: 0.0, hyy: 0.0 };

    /// Constant: all derivative lanes are exactly zero.
    #[inline]
    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Jet2::ZERO }
    }

    /// Seed for the first coordinate (d/dx = 1).
    #[inline]
    pub fn seed_x(v: f64) -> Self {
        Jet2 { v, gx: 1.0, ..Jet2::ZERO }
    }

    /// Seed for the second coordinate (d/dy = 1).
    #[inline]
    pub fn seed_y(v: f64) -> Self {
        Jet2 { v, gy: 1.0, ..Jet2::ZERO }
    }

    #[inline]
    pub fn grad(&self) -> [f64; 2] {
        [self.gx, self.gy]
    }

    /// Full symmetric Hessian, `[[hxx, hxy], [hxy, hyy]]`.
    #[inline]
    pub fn hess(&self) -> [[f64; 2]; 2] {
        [[self.hxx, self.hxy], [self.hxy, self.hyy]]
    }

    #[inline]
    pub fn laplacian(&self) -> f64 {
        self.hxx + self.hyy
    }

    #[inline]
    pub fn grad_norm_sq(&self) -> f64 {
        self.gx * self.gx + self.gy * self.gy
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.gx.is_finite()
            && self.gy.is_finite()
            && self.hxx.is_finite()
            && self.hxy.is_finite()
            && self.hyy.is_finite()
    }

    /// Chain rule through a scalar primitive with derivatives `f`, `f'`, `f''`.
    pub fn apply_unary(self, kind: UnaryKind) -> Self {
        let [f, d1, d2, _] = unary_derivs(kind, self.v);
        Jet2 {
            v: f,
            gx: d1 * self.gx,
            gy: d1 * self.gy,
            hxx: d1 * self.hxx + d2 * self.gx * self.gx,
            hxy: d1 * self.hxy + d2 * self.gx * self.gy,
            hyy: d1 * self.hyy + d2 * self.gy * self.gy,
        }
    }

    #[inline]
    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            v: c * self.v,
            gx: c * self.gx,
            gy: c * self.gy,
            hxx: c * self.hxx,
            hxy: c * self.hxy,
            hyy: c * self.hyy,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            gx: self.gx + o.gx,
            gy: self.gy + o.gy,
            hxx: self.hxx + o.hxx,
            hxy: self.hxy + o.hxy,
            hyy: self.hyy + o.hyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            gx: self.gx - o.gx,
            gy: self.gy - o.gy,
            hxx: self.hxx - o.hxx,
            hxy: self.hxy - o.hxy,
            hyy: self.hyy - o.hyy,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    /// Product rule through second order.
    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            gx: self.gx * o.v + self.v * o.gx,
            gy: self.gy * o.v + self.v * o.gy,
            hxx: self.hxx * o.v + 2.0 * self.gx * o.gx + self.v * o.hxx,
            hxy: self.hxy * o.v + self.gx * o.gy + self.gy * o.gx + self.v * o.hxy,
            hyy: self.hyy * o.v + 2.0 * self.gy * o.gy + self.v * o.hyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.apply_unary(UnaryKind::Recip)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, c: f64) -> Jet2 {
        self.scale(1.0 / c)
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    #[inline]
    fn add(self, j: Jet2) -> Jet2 {
        j + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    #[inline]
    fn sub(self, j: Jet2) -> Jet2 {
        -j + self
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    #[inline]
    fn mul(self, j: Jet2) -> Jet2 {
        j.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(x: Jet2, y: Jet2) -> Jet2 {
        // u = x*y*(1 - x^2 - y^2)
        x * y * (-(x * x) - y * y + 1.0)
    }

    #[test]
    fn polynomial_jet_matches_hand_derivatives() {
        let (x, y) = (0.3, -0.7);
        let j = poly(Jet2::seed_x(x), Jet2::seed_y(y));
        assert_relative_eq!(j.v, x * y * (1.0 - x * x - y * y), max_relative = 1e-14);
        assert_relative_eq!(j.gx, y - 3.0 * x * x * y - y * y * y, max_relative = 1e-13);
        assert_relative_eq!(j.gy, x - x * x * x - 3.0 * x * y * y, max_relative = 1e-13);
        assert_relative_eq!(j.hxx, -6.0 * x * y, max_relative = 1e-13);
        assert_relative_eq!(j.hyy, -6.0 * x * y, max_relative = 1e-13);
        assert_relative_eq!(j.hxy, 1.0 - 3.0 * x * x - 3.0 * y * y, max_relative = 1e-13);
    }

    #[test]
    fn constant_jet_has_zero_derivatives() {
        let c = Jet2::constant(3.5);
        let r = (c * c).apply_unary(UnaryKind::Tanh) * c;
        assert_eq!(r.gx, 0.0);
        assert_eq!(r.gy, 0.0);
        assert_eq!(r.hxx, 0.0);
        assert_eq!(r.hxy, 0.0);
        assert_eq!(r.hyy, 0.0);
    }

    #[test]
    fn hessian_is_symmetric_by_construction() {
        let x = Jet2::seed_x(0.4);
        let y = Jet2::seed_y(0.9);
        let j = (x * y + x).apply_unary(UnaryKind::Swish) * (y - x * 0.25);
        let h = j.hess();
        assert_eq!(h[0][1], h[1][0]);
    }

    #[test]
    fn linearity_is_exact() {
        let x = Jet2::seed_x(0.2);
        let y = Jet2::seed_y(0.5);
        let u = (x * y).apply_unary(UnaryKind::Sin);
        let v = (x + y).apply_unary(UnaryKind::Exp);
        let lhs = u.scale(2.5) + v.scale(-1.25);
        let rhs = u * 2.5 + v * (-1.25);
        assert_eq!(lhs, rhs);
    }

    /// Central finite differences of a scalar function of (x, y).
    fn fd_check(f: impl Fn(f64, f64) -> f64, jet: impl Fn(f64, f64) -> Jet2, x: f64, y: f64) {
        let h = 1e-5;
        let j = jet(x, y);
        let gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let hxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let hyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let hxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        assert_relative_eq!(j.gx, gx, max_relative = 1e-7, epsilon = 1e-9);
        assert_relative_eq!(j.gy, gy, max_relative = 1e-7, epsilon = 1e-9);
        assert_relative_eq!(j.hxx, hxx, max_relative = 1e-4, epsilon = 1e-6);
        assert_relative_eq!(j.hyy, hyy, max_relative = 1e-4, epsilon = 1e-6);
        assert_relative_eq!(j.hxy, hxy, max_relative = 1e-4, epsilon = 1e-6);
    }

    #[test]
    fn transcendental_jets_match_finite_differences() {
        let f = |x: f64, y: f64| (x * y).sin() * (0.5 * x + y).exp() / (1.0 + x * x);
        let jet = |x: f64, y: f64| {
            let xj = Jet2::seed_x(x);
            let yj = Jet2::seed_y(y);
            (xj * yj).apply_unary(UnaryKind::Sin) * (xj * 0.5 + yj).apply_unary(UnaryKind::Exp)
                / (xj * xj + 1.0)
        };
        fd_check(f, jet, 0.37, -0.81);
        fd_check(f, jet, -1.2, 0.33);
    }

    #[test]
    fn unary_tables_match_finite_differences() {
        let kinds = [
            UnaryKind::Tanh,
            UnaryKind::Sigmoid,
            UnaryKind::Swish,
            UnaryKind::PowF(0.25),
            UnaryKind::PowF(-0.75),
            UnaryKind::SmoothAbs(1e-2),
            UnaryKind::Recip,
            UnaryKind::Exp,
            UnaryKind::Sin,
            UnaryKind::Cos,
        ];
        for kind in kinds {
            for &t in &[0.4, 1.3, 2.1] {
                let h = 1e-5;
                let [_, d1, d2, d3] = unary_derivs(kind, t);
                let fp = unary_derivs(kind, t + h);
                let fm = unary_derivs(kind, t - h);
                assert_relative_eq!(d1, (fp[0] - fm[0]) / (2.0 * h), max_relative = 1e-7, epsilon = 1e-10);
                assert_relative_eq!(d2, (fp[1] - fm[1]) / (2.0 * h), max_relative = 1e-7, epsilon = 1e-9);
                assert_relative_eq!(d3, (fp[2] - fm[2]) / (2.0 * h), max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sigmoid_is_stable_for_large_arguments() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(sigmoid(-800.0).is_finite());
        assert!(sigmoid(-800.0) >= 0.0);
        let [f, d1, d2, d3] = unary_derivs(UnaryKind::Swish, 750.0);
        assert!(f.is_finite() && d1.is_finite() && d2.is_finite() && d3.is_finite());
    }
}
