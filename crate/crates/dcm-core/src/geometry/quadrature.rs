//! Gaussian quadrature on the example domains.
//!
//! Interior rules are tensor Gauss-Legendre in a parametric rectangle mapped
//! through the domain parameterization: polar maps for disc sectors (weight
//! r), plain rectangles for the frame, and the NURBS map with |det J| for
//! NURBS-described patches. Goal-functional integrals always use these
//! rules, never the training grid.
//!
//! Subdomain restrictions Omega ∩ {ax > by} cut along a line through the
//! origin: polar patches split the angular range exactly, rectangle patches
//! are clipped to polygons and triangulated, so straddling cells never occur.

use super::gauss::{gauss_legendre, gauss_legendre_on};
use super::{Domain, DomainKind};
use crate::{DcmError, Result};

/// Interior quadrature: nodes in physical coordinates with positive weights
/// summing to the domain area.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        let mut acc = 0.0;
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(*p);
        }
        acc
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Boundary (1D) quadrature along a segment: nodes, outward unit normals,
/// arc-length weights summing to the segment length.
#[derive(Clone, Debug)]
pub struct BoundaryRule {
    pub nodes: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl BoundaryRule {
    pub fn integrate(&self, mut f: impl FnMut([f64; 2], [f64; 2]) -> f64) -> f64 {
        let mut acc = 0.0;
        for ((p, n), w) in self.nodes.iter().zip(&self.normals).zip(&self.weights) {
            acc += w * f(*p, *n);
        }
        acc
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn concat(mut self, other: BoundaryRule) -> BoundaryRule {
        self.nodes.extend(other.nodes);
        self.normals.extend(other.normals);
        self.weights.extend(other.weights);
        self
    }
}

fn push_polar_patch(
    rule: &mut QuadratureRule,
    phi0: f64,
    phi1: f64,
    r1: f64,
    n_phi: usize,
    n_r: usize,
) {
    let (phis, wps) = gauss_legendre_on(n_phi, phi0, phi1);
    let (rs, wrs) = gauss_legendre_on(n_r, 0.0, r1);
    for (phi, wp) in phis.iter().zip(&wps) {
        let (c, s) = (phi.cos(), phi.sin());
        for (r, wr) in rs.iter().zip(&wrs) {
            rule.nodes.push([r * c, r * s]);
            rule.weights.push(wp * wr * r);
        }
    }
}

fn push_rect_patch(rule: &mut QuadratureRule, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) {
    let (xs, wxs) = gauss_legendre_on(n, x0, x1);
    let (ys, wys) = gauss_legendre_on(n, y0, y1);
    for (x, wx) in xs.iter().zip(&wxs) {
        for (y, wy) in ys.iter().zip(&wys) {
            rule.nodes.push([*x, *y]);
            rule.weights.push(wx * wy);
        }
    }
}

/// Map the unit square onto triangle (a, b, c) via the Duffy-style collapse
/// P(u, v) = a + u (b - a) + u v (c - b); |J| = 2 u Area.
fn push_triangle_patch(rule: &mut QuadratureRule, a: [f64; 2], b: [f64; 2], c: [f64; 2], n: usize) {
    let area2 = ((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])).abs();
    if area2 < 1e-30 {
        return;
    }
    let (us, wus) = gauss_legendre_on(n, 0.0, 1.0);
    let (vs, wvs) = gauss_legendre_on(n, 0.0, 1.0);
    for (u, wu) in us.iter().zip(&wus) {
        for (v, wv) in vs.iter().zip(&wvs) {
            let x = a[0] + u * (b[0] - a[0]) + u * v * (c[0] - b[0]);
            let y = a[1] + u * (b[1] - a[1]) + u * v * (c[1] - b[1]);
            rule.nodes.push([x, y]);
            rule.weights.push(wu * wv * u * area2);
        }
    }
}

/// Keep the part of a convex polygon with `a x - b y > 0`
/// (Sutherland-Hodgman against one halfplane).
pub(super) fn clip_polygon_halfplane(poly: &[[f64; 2]], a: f64, b: f64) -> Vec<[f64; 2]> {
    let side = |p: [f64; 2]| a * p[0] - b * p[1];
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn push_polygon_patch(rule: &mut QuadratureRule, poly: &[[f64; 2]], n: usize) {
    if poly.len() < 3 {
        return;
    }
    for i in 1..poly.len() - 1 {
        push_triangle_patch(rule, poly[0], poly[i], poly[i + 1], n);
    }
}

/// Angular intervals (within one period) on which `a cos phi - b sin phi > 0`,
/// intersected with `[phi0, phi1]`. The halfplane {ax > by} is exactly
/// {cos(phi - phi_c) > 0} with phi_c = atan2(-b, a), independent of r.
fn cut_phi_ranges(phi0: f64, phi1: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
    let pi = std::f64::consts::PI;
    let phi_c = (-b).atan2(a);
    let mut out = Vec::new();
    // allowed band (phi_c - pi/2, phi_c + pi/2) shifted by 2 pi k
    for k in -2..=2 {
        let lo = phi_c - 0.5 * pi + 2.0 * pi * k as f64;
        let hi = phi_c + 0.5 * pi + 2.0 * pi * k as f64;
        let l = lo.max(phi0);
        let h = hi.min(phi1);
        if h > l + 1e-14 {
            out.push((l, h));
        }
    }
    out
}

const FRAME_RECTS: [[f64; 4]; 4] = [
    [-1.0, -0.5, -1.0, 1.0], // left band [x0, x1, y0, y1]
    [0.5, 1.0, -1.0, 1.0],   // right band
    [-0.5, 0.5, 0.5, 1.0],   // top middle
    [-0.5, 0.5, -1.0, -0.5], // bottom middle
];

/// Angular patches (phi0, phi1) of the polar-parameterized domains.
fn polar_patches(kind: &DomainKind) -> Option<Vec<(f64, f64)>> {
    let pi = std::f64::consts::PI;
    match kind {
        DomainKind::QuarterDiscPair => Some(vec![(0.5 * pi, pi), (1.5 * pi, 2.0 * pi)]),
        DomainKind::UnitDisc => Some(vec![
            (0.0, 0.5 * pi),
            (0.5 * pi, pi),
            (pi, 1.5 * pi),
            (1.5 * pi, 2.0 * pi),
        ]),
        _ => None,
    }
}

/// Tensor Gauss-Legendre rule of the given order per patch axis, mapped
/// through the domain parameterization.
pub fn gauss_quadrature(domain: &Domain, order: usize) -> Result<QuadratureRule> {
    if order < 1 {
        return Err(DcmError::Geometry("quadrature order must be >= 1".into()));
    }
    let mut rule = QuadratureRule { nodes: Vec::new(), weights: Vec::new() };
    build_quadrature(&domain.kind, order, &mut rule)?;
    Ok(rule)
}

fn build_quadrature(kind: &DomainKind, order: usize, rule: &mut QuadratureRule) -> Result<()> {
    match kind {
        DomainKind::QuarterDiscPair | DomainKind::UnitDisc => {
            for (p0, p1) in polar_patches(kind).unwrap() {
                push_polar_patch(rule, p0, p1, 1.0, order, order);
            }
        }
        DomainKind::NsFrame => {
            for r in FRAME_RECTS {
                push_rect_patch(rule, r[0], r[1], r[2], r[3], order);
            }
        }
        DomainKind::NurbsMapped(surface) => {
            let ((ua, ub), (va, vb)) = surface.domain();
            let (us, wus) = gauss_legendre_on(order, ua, ub);
            let (vs, wvs) = gauss_legendre_on(order, va, vb);
            for (u, wu) in us.iter().zip(&wus) {
                for (v, wv) in vs.iter().zip(&wvs) {
                    let (p, jac) = surface.eval_with_jacobian(*u, *v)?;
                    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                    if det.abs() < 1e-14 {
                        return Err(DcmError::Geometry(format!(
                            "nearly singular Jacobian at ({u}, {v}): det = {det:e}"
                        )));
                    }
                    rule.nodes.push(p);
                    rule.weights.push(wu * wv * det.abs());
                }
            }
        }
        DomainKind::HalfplaneCut { base, a, b } => match base.as_ref() {
            DomainKind::QuarterDiscPair | DomainKind::UnitDisc => {
                for (p0, p1) in polar_patches(base).unwrap() {
                    for (l, h) in cut_phi_ranges(p0, p1, *a, *b) {
                        // keep the angular resolution of the parent patch
                        push_polar_patch(rule, l, h, 1.0, order, order);
                    }
                }
            }
            DomainKind::NsFrame => {
                for r in FRAME_RECTS {
                    let poly = [[r[0], r[2]], [r[1], r[2]], [r[1], r[3]], [r[0], r[3]]];
                    let clipped = clip_polygon_halfplane(&poly, *a, *b);
                    push_polygon_patch(rule, &clipped, order + 1);
                }
            }
            other => {
                return Err(DcmError::Geometry(format!(
                    "halfplane restriction is not supported on {other:?}"
                )))
            }
        },
    }
    Ok(())
}

/// 1D Gauss-Legendre rule along one boundary segment, in arc-length measure.
pub fn boundary_quadrature(domain: &Domain, segment: usize, order: usize) -> Result<BoundaryRule> {
    let seg = domain
        .segments
        .get(segment)
        .ok_or_else(|| DcmError::Geometry(format!("no boundary segment {segment}")))?;
    seg.quadrature(order)
}

/// Concatenated rule over every boundary segment.
pub fn full_boundary_quadrature(domain: &Domain, order: usize) -> Result<BoundaryRule> {
    let mut out = BoundaryRule { nodes: Vec::new(), normals: Vec::new(), weights: Vec::new() };
    for i in 0..domain.segments.len() {
        out = out.concat(boundary_quadrature(domain, i, order)?);
    }
    Ok(out)
}

impl super::BoundarySegment {
    /// Gauss-Legendre nodes along the segment with arc-length weights.
    pub fn quadrature(&self, order: usize) -> Result<BoundaryRule> {
        let mut rule = BoundaryRule { nodes: Vec::new(), normals: Vec::new(), weights: Vec::new() };
        match &self.geom {
            super::SegmentGeom::Line { a, b, normal } => {
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                let (ts, ws) = gauss_legendre_on(order, 0.0, 1.0);
                for (t, w) in ts.iter().zip(&ws) {
                    rule.nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    rule.normals.push(*normal);
                    rule.weights.push(w * len);
                }
            }
            super::SegmentGeom::Arc { center, radius, phi0, phi1, outward } => {
                let (phis, ws) = gauss_legendre_on(order, *phi0, *phi1);
                for (phi, w) in phis.iter().zip(&ws) {
                    let (c, s) = (phi.cos(), phi.sin());
                    rule.nodes.push([center[0] + radius * c, center[1] + radius * s]);
                    rule.normals.push([outward * c, outward * s]);
                    rule.weights.push(w * radius);
                }
            }
            super::SegmentGeom::Nurbs { curve, outward_hint } => {
                let (ua, ub) = curve.domain();
                let (ts, ws) = gauss_legendre(order);
                for (t, w) in ts.iter().zip(&ws) {
                    let u = 0.5 * (ua + ub) + 0.5 * (ub - ua) * t;
                    let (p, d) = curve.eval_with_derivative(u)?;
                    let speed = (d[0] * d[0] + d[1] * d[1]).sqrt();
                    if speed < 1e-14 {
                        return Err(DcmError::Geometry("degenerate boundary tangent".into()));
                    }
                    let mut n = [d[1] / speed, -d[0] / speed];
                    if n[0] * outward_hint[0] + n[1] * outward_hint[1] < 0.0 {
                        n = [-n[0], -n[1]];
                    }
                    rule.nodes.push(p);
                    rule.normals.push(n);
                    rule.weights.push(w * 0.5 * (ub - ua) * speed);
                }
            }
        }
        Ok(rule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn quarter_disc_pair_area_is_half_pi() {
        let d = Domain::quarter_disc_pair();
        let q = gauss_quadrature(&d, 24).unwrap();
        assert_relative_eq!(q.total_weight(), PI / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn pair_polynomial_integrals_match_polar_oracles() {
        let d = Domain::quarter_disc_pair();
        let q = gauss_quadrature(&d, 32).unwrap();
        // int (1 - r^2) dA = pi * int_0^1 (r - r^3) dr = pi/4
        let a = q.integrate(|p| 1.0 - p[0] * p[0] - p[1] * p[1]);
        assert_relative_eq!(a, PI / 4.0, epsilon = 1e-8);
        // int xy (1 - r^2) dA = -1/12 (two quadrants, each -1/24)
        let b = q.integrate(|p| p[0] * p[1] * (1.0 - p[0] * p[0] - p[1] * p[1]));
        assert_relative_eq!(b, -1.0 / 12.0, epsilon = 1e-8);
    }

    #[test]
    fn disc_and_frame_areas() {
        let q = gauss_quadrature(&Domain::unit_disc(), 24).unwrap();
        assert_relative_eq!(q.total_weight(), PI, epsilon = 1e-10);
        let q = gauss_quadrature(&Domain::ns_frame(), 16).unwrap();
        assert_relative_eq!(q.total_weight(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn all_weights_positive_and_nodes_inside() {
        for d in [Domain::quarter_disc_pair(), Domain::unit_disc(), Domain::ns_frame()] {
            let q = gauss_quadrature(&d, 12).unwrap();
            assert!(q.weights.iter().all(|&w| w > 0.0));
            assert!(q.nodes.iter().all(|&p| d.inside(p)));
        }
    }

    #[test]
    fn nurbs_mapped_ring_area() {
        let ring = crate::geometry::NurbsSurface::quarter_annulus(0.5, 1.0);
        let d = Domain::nurbs_mapped(ring);
        let q = gauss_quadrature(&d, 24).unwrap();
        assert_relative_eq!(q.total_weight(), PI / 4.0 * (1.0 - 0.25), epsilon = 1e-8);
    }

    #[test]
    fn half_disc_restriction_has_half_area() {
        let d = Domain::unit_disc().subdomain_restrict(1.0, 0.0).unwrap();
        let q = gauss_quadrature(&d, 24).unwrap();
        assert_relative_eq!(q.total_weight(), PI / 2.0, epsilon = 1e-8);
        // every node satisfies x > 0
        assert!(q.nodes.iter().all(|p| p[0] > 0.0));
    }

    #[test]
    fn symmetric_cuts_partition_the_area() {
        for base in [Domain::unit_disc(), Domain::quarter_disc_pair(), Domain::ns_frame()] {
            let qa = gauss_quadrature(&base.subdomain_restrict(0.75, 0.5).unwrap(), 20).unwrap();
            let qb = gauss_quadrature(&base.subdomain_restrict(-0.75, -0.5).unwrap(), 20).unwrap();
            let whole = gauss_quadrature(&base, 20).unwrap();
            assert_relative_eq!(
                qa.total_weight() + qb.total_weight(),
                whole.total_weight(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn frame_cut_area_matches_monte_carlo() {
        let d = Domain::ns_frame().subdomain_restrict(0.75, 0.5).unwrap();
        let q = gauss_quadrature(&d, 16).unwrap();
        let area = q.total_weight();

        let mut rng = crate::rng::Rng::seed_from(1234);
        let n = 10_000_000usize;
        let mut hits = 0usize;
        for _ in 0..n {
            let x = rng.uniform_in(-1.0, 1.0);
            let y = rng.uniform_in(-1.0, 1.0);
            let in_frame = x.abs() < 1.0 && y.abs() < 1.0 && (x.abs() > 0.5 || y.abs() > 0.5);
            if in_frame && 0.75 * x > 0.5 * y {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let mc = 4.0 * p;
        let sigma = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (area - mc).abs() < 3.0 * sigma,
            "area {area} vs MC {mc} +- {sigma}"
        );
    }

    #[test]
    fn quadrature_is_exact_for_design_order_polynomials() {
        // rectangle patches integrate x^i y^j exactly up to 2 order - 1
        let d = Domain::ns_frame();
        let q = gauss_quadrature(&d, 6).unwrap();
        // int over frame of x^2 y^2: full square 4/9 * ... compute directly:
        // int_{[-1,1]^2} x^2 y^2 = (2/3)(2/3) = 4/9; inner square [-1/2,1/2]^2:
        // (2*(1/2)^3/3)^2 = (1/12)^2 = 1/144
        let exact = 4.0 / 9.0 - 1.0 / 144.0;
        let got = q.integrate(|p| p[0] * p[0] * p[1] * p[1]);
        assert_relative_eq!(got, exact, epsilon = 1e-12);
    }

    #[test]
    fn boundary_rules_have_exact_lengths() {
        let d = Domain::quarter_disc_pair();
        // segments 0, 1 are the arcs: total length pi
        let arcs = boundary_quadrature(&d, 0, 16)
            .unwrap()
            .concat(boundary_quadrature(&d, 1, 16).unwrap());
        assert_relative_eq!(arcs.total_weight(), PI, epsilon = 1e-10);
        // a unit axis segment
        let seg = boundary_quadrature(&d, 2, 16).unwrap();
        assert_relative_eq!(seg.total_weight(), 1.0, epsilon = 1e-13);
        // int x ds over [0,1]
        let m = seg.integrate(|p, _| p[0]);
        assert_relative_eq!(m, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn flux_of_manufactured_solution_obeys_divergence_theorem() {
        // U = xy(1 - x^2 - y^2): lap U = -12xy, and int_Omega xy dA = -1/4
        // (each quadrant contributes (1/4) * (-1/2)), so the total flux
        // int_Gamma dU/dn = int_Omega lap U = 3.
        let d = Domain::quarter_disc_pair();
        let rule = full_boundary_quadrature(&d, 32).unwrap();
        let flux = rule.integrate(|p, n| {
            let (x, y) = (p[0], p[1]);
            let gx = y - 3.0 * x * x * y - y * y * y;
            let gy = x - x * x * x - 3.0 * x * y * y;
            gx * n[0] + gy * n[1]
        });
        // cross-check the divergence-theorem value by interior quadrature
        let q = gauss_quadrature(&d, 32).unwrap();
        let lap = q.integrate(|p| -12.0 * p[0] * p[1]);
        assert_relative_eq!(flux, lap, epsilon = 1e-8);
        assert_relative_eq!(flux, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn clip_keeps_the_requested_side() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        // x > y keeps the lower-right triangle
        let poly = clip_polygon_halfplane(&sq, 1.0, 1.0);
        assert!(poly.len() >= 3);
        let mut rule = QuadratureRule { nodes: vec![], weights: vec![] };
        push_polygon_patch(&mut rule, &poly, 8);
        assert_relative_eq!(rule.total_weight(), 0.5, epsilon = 1e-12);
        assert!(rule.nodes.iter().all(|p| p[0] >= p[1] - 1e-12));
    }
}
