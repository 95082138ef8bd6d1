//! Domains, boundary segments, collocation sampling, and quadrature for the
//! example geometries: the two-quarter-disc domain {0 <= x^2+y^2 <= 1, xy <= 0},
//! the unit disc, the square frame [-1,1]^2 \ [-1/2,1/2]^2, NURBS-mapped
//! patches, and halfplane restrictions Omega ∩ {ax > by}.

mod bspline;
mod gauss;
mod nurbs;
mod quadrature;

pub use bspline::{bspline_basis, bspline_basis_ders, find_span};
pub use gauss::{gauss_legendre, gauss_legendre_on};
pub use nurbs::{NurbsCurve, NurbsJson, NurbsSurface};
pub use quadrature::{
    boundary_quadrature, full_boundary_quadrature, gauss_quadrature, BoundaryRule, QuadratureRule,
};

use serde::{Deserialize, Serialize};

use crate::{DcmError, Result};

/// Boundary-condition tag of a segment. The Neumann variants compare the
/// named axis derivative, exactly as the mixed-boundary example prescribes
/// (du/dx on y = 0, du/dy on x = 0), not the normal derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcTag {
    Dirichlet,
    NeumannX,
    NeumannY,
}

#[derive(Clone, Debug)]
pub enum SegmentGeom {
    /// Straight segment with a fixed outward unit normal.
    Line { a: [f64; 2], b: [f64; 2], normal: [f64; 2] },
    /// Circular arc; `outward` = +1 when the outward normal is radial-out.
    Arc { center: [f64; 2], radius: f64, phi0: f64, phi1: f64, outward: f64 },
    /// NURBS boundary curve; normals are the tangent rotated to agree in
    /// sign with `outward_hint`.
    Nurbs { curve: NurbsCurve, outward_hint: [f64; 2] },
}

#[derive(Clone, Debug)]
pub struct BoundarySegment {
    pub name: String,
    pub geom: SegmentGeom,
    pub tag: BcTag,
}

impl BoundarySegment {
    pub fn length(&self) -> f64 {
        match &self.geom {
            SegmentGeom::Line { a, b, .. } => ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt(),
            SegmentGeom::Arc { radius, phi0, phi1, .. } => radius * (phi1 - phi0),
            SegmentGeom::Nurbs { .. } => self
                .quadrature(64)
                .map(|r| r.total_weight())
                .unwrap_or(f64::NAN),
        }
    }

    /// Point and outward normal at arc-length fraction `t` in [0, 1].
    pub fn point_normal_at(&self, t: f64) -> Result<([f64; 2], [f64; 2])> {
        match &self.geom {
            SegmentGeom::Line { a, b, normal } => {
                Ok(([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], *normal))
            }
            SegmentGeom::Arc { center, radius, phi0, phi1, outward } => {
                let phi = phi0 + t * (phi1 - phi0);
                let (c, s) = (phi.cos(), phi.sin());
                Ok((
                    [center[0] + radius * c, center[1] + radius * s],
                    [outward * c, outward * s],
                ))
            }
            SegmentGeom::Nurbs { curve, outward_hint } => {
                // approximate arc-length parameterization via a cumulative table
                let m = 256;
                let (ua, ub) = curve.domain();
                let mut lens = vec![0.0; m + 1];
                let mut prev = curve.eval(ua)?;
                for i in 1..=m {
                    let u = ua + (ub - ua) * i as f64 / m as f64;
                    let p = curve.eval(u)?;
                    lens[i] = lens[i - 1]
                        + ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
                    prev = p;
                }
                let target = t.clamp(0.0, 1.0) * lens[m];
                let idx = lens.partition_point(|&l| l < target).clamp(1, m);
                let frac = if lens[idx] > lens[idx - 1] {
                    (target - lens[idx - 1]) / (lens[idx] - lens[idx - 1])
                } else {
                    0.0
                };
                let u = ua + (ub - ua) * ((idx - 1) as f64 + frac) / m as f64;
                let (p, d) = curve.eval_with_derivative(u)?;
                let speed = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let mut n = [d[1] / speed, -d[0] / speed];
                if n[0] * outward_hint[0] + n[1] * outward_hint[1] < 0.0 {
                    n = [-n[0], -n[1]];
                }
                Ok((p, n))
            }
        }
    }
}

/// Domain shape tag; carries the data the predicate and quadrature need.
#[derive(Clone, Debug)]
pub enum DomainKind {
    /// {x^2 + y^2 < 1, xy < 0}: quarter discs in quadrants II and IV.
    QuarterDiscPair,
    UnitDisc,
    /// [-1,1]^2 \ [-1/2,1/2]^2.
    NsFrame,
    NurbsMapped(NurbsSurface),
    /// Base domain intersected with {a x > b y}.
    HalfplaneCut { base: Box<DomainKind>, a: f64, b: f64 },
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub kind: DomainKind,
    pub segments: Vec<BoundarySegment>,
}

fn line(name: &str, a: [f64; 2], b: [f64; 2], normal: [f64; 2]) -> BoundarySegment {
    BoundarySegment {
        name: name.into(),
        geom: SegmentGeom::Line { a, b, normal },
        tag: BcTag::Dirichlet,
    }
}

fn arc(name: &str, phi0: f64, phi1: f64) -> BoundarySegment {
    BoundarySegment {
        name: name.into(),
        geom: SegmentGeom::Arc { center: [0.0, 0.0], radius: 1.0, phi0, phi1, outward: 1.0 },
        tag: BcTag::Dirichlet,
    }
}

impl Domain {
    /// The two-quarter-disc domain of the p-Laplacian examples. Segments:
    /// the two unit arcs, then the four axis segments bounding the quadrants.
    pub fn quarter_disc_pair() -> Domain {
        let pi = std::f64::consts::PI;
        Domain {
            kind: DomainKind::QuarterDiscPair,
            segments: vec![
                arc("arc_q2", 0.5 * pi, pi),
                arc("arc_q4", 1.5 * pi, 2.0 * pi),
                // quadrant IV (x >= 0, y <= 0): top edge y = 0 and left edge x = 0
                line("xpos", [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]),
                line("yneg", [0.0, -1.0], [0.0, 0.0], [-1.0, 0.0]),
                // quadrant II (x <= 0, y >= 0): bottom edge y = 0 and right edge x = 0
                line("xneg", [-1.0, 0.0], [0.0, 0.0], [0.0, -1.0]),
                line("ypos", [0.0, 0.0], [0.0, 1.0], [1.0, 0.0]),
            ],
        }
    }

    pub fn unit_disc() -> Domain {
        Domain {
            kind: DomainKind::UnitDisc,
            segments: vec![arc("circle", 0.0, 2.0 * std::f64::consts::PI)],
        }
    }

    /// The frame [-1,1]^2 minus the closed inner square [-1/2,1/2]^2; all
    /// eight edges Dirichlet by default.
    pub fn ns_frame() -> Domain {
        Domain {
            kind: DomainKind::NsFrame,
            segments: vec![
                line("outer_bottom", [-1.0, -1.0], [1.0, -1.0], [0.0, -1.0]),
                line("outer_right", [1.0, -1.0], [1.0, 1.0], [1.0, 0.0]),
                line("outer_top", [1.0, 1.0], [-1.0, 1.0], [0.0, 1.0]),
                line("outer_left", [-1.0, 1.0], [-1.0, -1.0], [-1.0, 0.0]),
                line("inner_bottom", [-0.5, -0.5], [0.5, -0.5], [0.0, 1.0]),
                line("inner_right", [0.5, -0.5], [0.5, 0.5], [-1.0, 0.0]),
                line("inner_top", [0.5, 0.5], [-0.5, 0.5], [0.0, -1.0]),
                line("inner_left", [-0.5, 0.5], [-0.5, -0.5], [1.0, 0.0]),
            ],
        }
    }

    /// Domain given by a NURBS surface patch; sampling and quadrature run in
    /// parameter space through the map.
    pub fn nurbs_mapped(surface: NurbsSurface) -> Domain {
        // Boundary = the four parameter-rectangle edges mapped by the patch,
        // with outward normals fixed by the param-space outward direction.
        let ((ua, ub), (va, vb)) = surface.domain();
        let mk_edge = |fixed_v: bool, at: f64, hint_sign: f64, name: &str| -> BoundarySegment {
            // sample the mid-edge point to estimate the physical outward hint
            let (mid_u, mid_v) = if fixed_v { (0.5 * (ua + ub), at) } else { (at, 0.5 * (va + vb)) };
            let (_, jac) = surface.eval_with_jacobian(mid_u, mid_v).expect("valid patch");
            // param-space outward (+-e_u or +-e_v) mapped through J
            let dir = if fixed_v {
                [hint_sign * jac[1][0], hint_sign * jac[1][1]]
            } else {
                [hint_sign * jac[0][0], hint_sign * jac[0][1]]
            };
            let curve = if fixed_v { surface.edge_curve_u(at) } else { surface.edge_curve_v(at) };
            BoundarySegment {
                name: name.into(),
                geom: SegmentGeom::Nurbs { curve, outward_hint: dir },
                tag: BcTag::Dirichlet,
            }
        };
        let segments = vec![
            mk_edge(true, va, -1.0, "edge_v0"),
            mk_edge(true, vb, 1.0, "edge_v1"),
            mk_edge(false, ua, -1.0, "edge_u0"),
            mk_edge(false, ub, 1.0, "edge_u1"),
        ];
        Domain { kind: DomainKind::NurbsMapped(surface), segments }
    }

    /// Restrict to Omega ∩ {a x > b y}. The result supports interior
    /// quadrature and the inside predicate; it carries no boundary segments
    /// (goal-functional subdomains are never solved on directly).
    pub fn subdomain_restrict(&self, a: f64, b: f64) -> Result<Domain> {
        if a == 0.0 && b == 0.0 {
            return Err(DcmError::Geometry("halfplane (a, b) = (0, 0) is degenerate".into()));
        }
        if matches!(self.kind, DomainKind::HalfplaneCut { .. }) {
            return Err(DcmError::Geometry("nested halfplane restriction".into()));
        }
        Ok(Domain {
            kind: DomainKind::HalfplaneCut { base: Box::new(self.kind.clone()), a, b },
            segments: Vec::new(),
        })
    }

    /// Strict interior predicate.
    pub fn inside(&self, p: [f64; 2]) -> bool {
        kind_inside(&self.kind, p)
    }

    /// Axis-aligned bounding box (lb, ub); also the default network
    /// normalization bounds.
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        match &self.kind {
            DomainKind::QuarterDiscPair | DomainKind::UnitDisc | DomainKind::NsFrame => {
                ([-1.0, -1.0], [1.0, 1.0])
            }
            DomainKind::NurbsMapped(s) => {
                let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
                for p in &s.ctrl {
                    for d in 0..2 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                (lo, hi)
            }
            DomainKind::HalfplaneCut { base, .. } => {
                let tmp = Domain { kind: (**base).clone(), segments: Vec::new() };
                tmp.bbox()
            }
        }
    }

    /// Domain area via a high-order rule.
    pub fn area(&self) -> Result<f64> {
        Ok(gauss_quadrature(self, 32)?.total_weight())
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.name == name)
    }

    /// Set the boundary tag of every segment whose name starts with `prefix`.
    pub fn set_bc(&mut self, prefix: &str, tag: BcTag) -> Result<()> {
        let mut hit = false;
        for s in &mut self.segments {
            if s.name.starts_with(prefix) {
                s.tag = tag;
                hit = true;
            }
        }
        if hit {
            Ok(())
        } else {
            Err(DcmError::Geometry(format!("no boundary segment matches '{prefix}'")))
        }
    }
}

fn kind_inside(kind: &DomainKind, p: [f64; 2]) -> bool {
    let [x, y] = p;
    match kind {
        DomainKind::QuarterDiscPair => x * x + y * y < 1.0 && x * y < 0.0,
        DomainKind::UnitDisc => x * x + y * y < 1.0,
        DomainKind::NsFrame => x.abs() < 1.0 && y.abs() < 1.0 && (x.abs() > 0.5 || y.abs() > 0.5),
        // parameter-space membership is not invertible in general
        DomainKind::NurbsMapped(_) => false,
        DomainKind::HalfplaneCut { base, a, b } => kind_inside(base, p) && a * x > b * y,
    }
}

/// A sampled point on the boundary with its outward normal and BC tag.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub tag: BcTag,
    pub segment: usize,
}

/// Interior and boundary training points.
#[derive(Clone, Debug, Default)]
pub struct CollocationSet {
    pub interior: Vec<[f64; 2]>,
    pub boundary: Vec<BoundaryPoint>,
}

impl CollocationSet {
    pub fn n_int(&self) -> usize {
        self.interior.len()
    }
    pub fn n_bnd(&self) -> usize {
        self.boundary.len()
    }
}

/// Deterministic collocation sampling: an `nx` x `ny` grid over the bounding
/// box filtered by the strict inside predicate, plus boundary points placed
/// uniformly by arc length per segment (at midpoints, so shared segment
/// corners are never emitted and tag conflicts cannot arise). The default
/// boundary spacing is the finer grid spacing.
pub fn sample_collocation(
    domain: &Domain,
    nx: usize,
    ny: usize,
    boundary_spacing: Option<f64>,
) -> Result<CollocationSet> {
    if nx < 2 || ny < 2 {
        return Err(DcmError::Geometry("collocation grid needs nx, ny >= 2".into()));
    }
    let mut set = CollocationSet::default();

    if let DomainKind::NurbsMapped(surface) = &domain.kind {
        // sample in parameter space and map
        let ((ua, ub), (va, vb)) = surface.domain();
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                let u = ua + (ub - ua) * i as f64 / (nx - 1) as f64;
                let v = va + (vb - va) * j as f64 / (ny - 1) as f64;
                set.interior.push(surface.eval(u, v)?);
            }
        }
    } else {
        let (lb, ub) = domain.bbox();
        for i in 0..nx {
            for j in 0..ny {
                let x = lb[0] + (ub[0] - lb[0]) * i as f64 / (nx - 1) as f64;
                let y = lb[1] + (ub[1] - lb[1]) * j as f64 / (ny - 1) as f64;
                if domain.inside([x, y]) {
                    set.interior.push([x, y]);
                }
            }
        }
    }
    if set.interior.is_empty() {
        return Err(DcmError::Geometry("no interior collocation points (empty sample)".into()));
    }

    let (lb, ub) = domain.bbox();
    let default_h = ((ub[0] - lb[0]) / (nx - 1) as f64).min((ub[1] - lb[1]) / (ny - 1) as f64);
    let spacing = boundary_spacing.unwrap_or(default_h);
    for (si, seg) in domain.segments.iter().enumerate() {
        let len = seg.length();
        let n = ((len / spacing).round() as usize).max(1);
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            let (p, nrm) = seg.point_normal_at(t)?;
            set.boundary.push(BoundaryPoint { point: p, normal: nrm, tag: seg.tag, segment: si });
        }
    }
    Ok(set)
}

// Iso-parameter edge curves of a surface (valid on open knot vectors).
impl NurbsSurface {
    fn edge_curve_u(&self, v: f64) -> NurbsCurve {
        let ((_, _), (va, vb)) = self.domain();
        let j = if (v - va).abs() < (v - vb).abs() { 0 } else { self.size_v - 1 };
        let ctrl: Vec<[f64; 2]> = (0..self.size_u).map(|i| self.ctrl[i * self.size_v + j]).collect();
        let weights: Vec<f64> = (0..self.size_u).map(|i| self.weights[i * self.size_v + j]).collect();
        NurbsCurve::new(self.degree_u, self.knots_u.clone(), ctrl, weights)
            .expect("edge of a valid surface is valid")
    }

    fn edge_curve_v(&self, u: f64) -> NurbsCurve {
        let ((ua, ub), (_, _)) = self.domain();
        let i = if (u - ua).abs() < (u - ub).abs() { 0 } else { self.size_u - 1 };
        let ctrl: Vec<[f64; 2]> = (0..self.size_v).map(|j| self.ctrl[i * self.size_v + j]).collect();
        let weights: Vec<f64> = (0..self.size_v).map(|j| self.weights[i * self.size_v + j]).collect();
        NurbsCurve::new(self.degree_v, self.knots_v.clone(), ctrl, weights)
            .expect("edge of a valid surface is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pair_predicate_and_brute_force_grid_count() {
        let d = Domain::quarter_disc_pair();
        let set = sample_collocation(&d, 35, 30, None).unwrap();
        // independent brute-force count over the same grid
        let mut count = 0;
        for i in 0..35 {
            for j in 0..30 {
                let x = -1.0 + 2.0 * i as f64 / 34.0;
                let y = -1.0 + 2.0 * j as f64 / 29.0;
                if x * x + y * y < 1.0 && x * y < 0.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(set.n_int(), count);
        assert!(count > 300, "expected a few hundred interior points, got {count}");
        assert!(set.interior.iter().all(|&p| d.inside(p)));
    }

    #[test]
    fn boundary_points_sit_on_the_boundary_with_unit_normals() {
        let d = Domain::quarter_disc_pair();
        let set = sample_collocation(&d, 35, 30, None).unwrap();
        assert!(set.n_bnd() > 50);
        for bp in &set.boundary {
            let [x, y] = bp.point;
            let nrm = (bp.normal[0].powi(2) + bp.normal[1].powi(2)).sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
            let seg = &d.segments[bp.segment];
            match &seg.geom {
                SegmentGeom::Arc { .. } => {
                    assert!((x * x + y * y - 1.0).abs() < 1e-10);
                    // circle normal is the position vector
                    assert!((bp.normal[0] - x).abs() < 1e-10);
                    assert!((bp.normal[1] - y).abs() < 1e-10);
                }
                SegmentGeom::Line { .. } => {
                    assert!(x.abs() < 1e-10 || y.abs() < 1e-10);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = Domain::ns_frame();
        let a = sample_collocation(&d, 20, 20, None).unwrap();
        let b = sample_collocation(&d, 20, 20, None).unwrap();
        assert_eq!(a.interior, b.interior);
        assert_eq!(a.n_bnd(), b.n_bnd());
    }

    #[test]
    fn frame_boundary_has_twelve_units_of_length() {
        let d = Domain::ns_frame();
        let total: f64 = d.segments.iter().map(|s| s.length()).sum();
        assert_relative_eq!(total, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn set_bc_by_prefix() {
        let mut d = Domain::quarter_disc_pair();
        d.set_bc("arc", BcTag::Dirichlet).unwrap();
        d.set_bc("x", BcTag::NeumannX).unwrap();
        d.set_bc("y", BcTag::NeumannY).unwrap();
        assert_eq!(d.segments[2].tag, BcTag::NeumannX);
        assert_eq!(d.segments[3].tag, BcTag::NeumannY);
        assert!(d.set_bc("nope", BcTag::Dirichlet).is_err());
    }

    #[test]
    fn restricted_domain_predicate_conjoins() {
        let d = Domain::unit_disc().subdomain_restrict(1.0, 0.0).unwrap();
        assert!(d.inside([0.5, 0.0]));
        assert!(!d.inside([-0.5, 0.0]));
        assert!(!d.inside([1.5, 0.0]));
        assert!(Domain::unit_disc().subdomain_restrict(0.0, 0.0).is_err());
    }

    #[test]
    fn nurbs_mapped_sampling_and_normals() {
        let ring = NurbsSurface::quarter_annulus(0.5, 1.0);
        let d = Domain::nurbs_mapped(ring);
        let set = sample_collocation(&d, 10, 10, Some(0.1)).unwrap();
        assert_eq!(set.n_int(), 64);
        for p in &set.interior {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!(r > 0.5 - 1e-9 && r < 1.0 + 1e-9);
        }
        // outer edge normals point away from the origin, inner edge towards it
        for bp in &set.boundary {
            let seg = &d.segments[bp.segment];
            let r = (bp.point[0].powi(2) + bp.point[1].powi(2)).sqrt();
            let radial = (bp.point[0] * bp.normal[0] + bp.point[1] * bp.normal[1]) / r;
            match seg.name.as_str() {
                "edge_v1" => assert!(radial > 0.99, "outer normal radial = {radial}"),
                "edge_v0" => assert!(radial < -0.99, "inner normal radial = {radial}"),
                _ => {}
            }
        }
    }
}
