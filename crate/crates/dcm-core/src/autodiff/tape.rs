//! Reverse-mode parameter tape.
//!
//! Forward spatial jets are the scalar type recorded on the tape: every node
//! stores a [`Jet2`] value and receives a jet-shaped adjoint during the
//! reverse sweep. Differentiating a loss that reads second spatial
//! derivatives of the network therefore costs one forward recording plus one
//! reverse pass, and the parameter gradient is exact.
//!
//! Recorded primitives are the ones residual losses are built from: affine
//! maps (one node per neuron, reading weights straight from the parameter
//! slice), the activation functions, powers, smoothed absolute values, and
//! plain jet arithmetic for residual assembly. Lane extraction turns a jet
//! component (a first or second derivative of the field) into a value-lane
//! scalar so residual operators can combine them freely.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::{unary_derivs, Jet2, UnaryKind};

/// Which lane of a jet a scalar extraction reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lane {
    V,
    Gx,
    Gy,
    Hxx,
    Hxy,
    Hyy,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    /// Value preloaded at record time; not a function of parameters.
    Const,
    /// theta[idx] as a constant jet.
    Param { idx: u32 },
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    /// scale * x + shift (shift applies to the value lane only).
    AffMap { x: u32, scale: f64, shift: f64 },
    Unary(UnaryKind, u32),
    Extract(Lane, u32),
    /// One neuron: sum_k theta[w + k] * node[src + k] + theta[b].
    /// Source nodes must be contiguous.
    Neuron { src: u32, fan_in: u32, w: u32, b: u32 },
}

/// Append-only record of primitive operations with jet values per node.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    vals: RefCell<Vec<Jet2>>,
    adjoints: RefCell<Vec<Jet2>>,
}

/// Handle to a tape node; implements jet arithmetic by recording.
#[derive(Clone, Copy)]
pub struct TJet<'t> {
    tape: &'t Tape,
    idx: u32,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
            vals: RefCell::new(Vec::with_capacity(n)),
            adjoints: RefCell::new(Vec::with_capacity(n)),
        }
    }

    /// Drop all nodes but keep the allocations.
    pub fn clear(&self) {
        self.nodes.borrow_mut().clear();
        self.vals.borrow_mut().clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, node: Node, val: Jet2) -> TJet<'_> {
        let mut nodes = self.nodes.borrow_mut();
        self.vals.borrow_mut().push(val);
        let idx = nodes.len() as u32;
        nodes.push(node);
        TJet { tape: self, idx }
    }

    /// Record a constant jet (data: sources, frozen fields, seeded inputs).
    pub fn constant(&self, j: Jet2) -> TJet<'_> {
        self.push(Node::Const, j)
    }

    /// Record a constant value with zero derivative lanes.
    pub fn scalar(&self, v: f64) -> TJet<'_> {
        self.constant(Jet2::constant(v))
    }

    /// Record a trainable parameter leaf.
    pub fn param<'t>(&'t self, theta: &[f64], idx: usize) -> TJet<'t> {
        self.push(Node::Param { idx: idx as u32 }, Jet2::constant(theta[idx]))
    }

    /// Record one neuron over `fan_in` contiguous source nodes starting at
    /// `src`, with weights at `theta[w..w + fan_in]` and bias at `theta[b]`.
    pub fn neuron<'t>(
        &'t self,
        theta: &[f64],
        src: TJet<'t>,
        fan_in: usize,
        w: usize,
        b: usize,
    ) -> TJet<'t> {
        let val = {
            let vals = self.vals.borrow();
            let s = src.idx as usize;
            debug_assert!(s + fan_in <= vals.len());
            let mut acc = vals[s].scale(theta[w]);
            for k in 1..fan_in {
                acc = acc + vals[s + k].scale(theta[w + k]);
            }
            acc + theta[b]
        };
        self.push(
            Node::Neuron {
                src: src.idx,
                fan_in: fan_in as u32,
                w: w as u32,
                b: b as u32,
            },
            val,
        )
    }

    pub fn value(&self, t: TJet<'_>) -> Jet2 {
        self.vals.borrow()[t.idx as usize]
    }

    /// Reverse sweep from `out`, accumulating d(out.value)/d(theta) into
    /// `grad` (which must have theta's length and is added to, not reset).
    /// Each node is visited exactly once, in reverse topological order.
    pub fn backward(&self, theta: &[f64], out: TJet<'_>, grad: &mut [f64]) {
        self.backward_seeded(theta, out, 1.0, grad);
    }

    /// As [`Tape::backward`] with the output adjoint seeded to `seed`,
    /// accumulating `seed * d(out.value)/d(theta)`.
    pub fn backward_seeded(&self, theta: &[f64], out: TJet<'_>, seed: f64, grad: &mut [f64]) {
        let nodes = self.nodes.borrow();
        let vals = self.vals.borrow();
        let n = nodes.len();
        let mut adj_buf = self.adjoints.borrow_mut();
        adj_buf.clear();
        adj_buf.resize(n, Jet2::ZERO);
        let adj = &mut *adj_buf;
        adj[out.idx as usize] = Jet2::constant(seed);

        for i in (0..=out.idx as usize).rev() {
            let z = adj[i];
            if z == Jet2::ZERO {
                continue;
            }
            match nodes[i] {
                Node::Const => {}
                Node::Param { idx } => grad[idx as usize] += z.v,
                Node::Add(a, b) => {
                    adj[a as usize] = adj[a as usize] + z;
                    adj[b as usize] = adj[b as usize] + z;
                }
                Node::Sub(a, b) => {
                    adj[a as usize] = adj[a as usize] + z;
                    adj[b as usize] = adj[b as usize] - z;
                }
                Node::Mul(a, b) => {
                    adj[a as usize] = adj[a as usize] + mul_transpose(vals[b as usize], z);
                    adj[b as usize] = adj[b as usize] + mul_transpose(vals[a as usize], z);
                }
                Node::Neg(x) => adj[x as usize] = adj[x as usize] - z,
                Node::AffMap { x, scale, .. } => {
                    adj[x as usize] = adj[x as usize] + z.scale(scale);
                }
                Node::Unary(kind, x) => {
                    adj[x as usize] = adj[x as usize] + unary_transpose(kind, vals[x as usize], z);
                }
                Node::Extract(lane, x) => {
                    let a = &mut adj[x as usize];
                    match lane {
                        Lane::V => a.v += z.v,
                        Lane::Gx => a.gx += z.v,
                        Lane::Gy => a.gy += z.v,
                        Lane::Hxx => a.hxx += z.v,
                        Lane::Hxy => a.hxy += z.v,
                        Lane::Hyy => a.hyy += z.v,
                    }
                }
                Node::Neuron { src, fan_in, w, b } => {
                    let s = src as usize;
                    for k in 0..fan_in as usize {
                        adj[s + k] = adj[s + k] + z.scale(theta[w as usize + k]);
                        grad[w as usize + k] += dot6(z, vals[s + k]);
                    }
                    grad[b as usize] += z.v;
                }
            }
        }
    }

    /// Recompute every node value from the recorded operations. With the
    /// same parameter slice this reproduces the stored values bit-for-bit.
    pub fn replay(&self, theta: &[f64]) -> Vec<Jet2> {
        let nodes = self.nodes.borrow();
        let stored = self.vals.borrow();
        let mut vals: Vec<Jet2> = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let v = match *node {
                Node::Const => stored[i],
                Node::Param { idx } => Jet2::constant(theta[idx as usize]),
                Node::Add(a, b) => vals[a as usize] + vals[b as usize],
                Node::Sub(a, b) => vals[a as usize] - vals[b as usize],
                Node::Mul(a, b) => vals[a as usize] * vals[b as usize],
                Node::Neg(x) => -vals[x as usize],
                Node::AffMap { x, scale, shift } => vals[x as usize].scale(scale) + shift,
                Node::Unary(kind, x) => vals[x as usize].apply_unary(kind),
                Node::Extract(lane, x) => {
                    let j: Jet2 = vals[x as usize];
                    Jet2::constant(match lane {
                        Lane::V => j.v,
                        Lane::Gx => j.gx,
                        Lane::Gy => j.gy,
                        Lane::Hxx => j.hxx,
                        Lane::Hxy => j.hxy,
                        Lane::Hyy => j.hyy,
                    })
                }
                Node::Neuron { src, fan_in, w, b } => {
                    let s = src as usize;
                    let mut acc = vals[s].scale(theta[w as usize]);
                    for k in 1..fan_in as usize {
                        acc = acc + vals[s + k].scale(theta[w as usize + k]);
                    }
                    acc + theta[b as usize]
                }
            };
            vals.push(v);
        }
        vals
    }
}

#[inline]
fn dot6(a: Jet2, b: Jet2) -> f64 {
    a.v * b.v + a.gx * b.gx + a.gy * b.gy + a.hxx * b.hxx + a.hxy * b.hxy + a.hyy * b.hyy
}

/// Adjoint of jet multiplication: transpose of the linear map `x -> x * y`
/// applied to the output adjoint `z`.
#[inline]
fn mul_transpose(y: Jet2, z: Jet2) -> Jet2 {
    Jet2 {
        v: dot6(z, y),
        gx: z.gx * y.v + 2.0 * z.hxx * y.gx + z.hxy * y.gy,
        gy: z.gy * y.v + 2.0 * z.hyy * y.gy + z.hxy * y.gx,
        hxx: z.hxx * y.v,
        hxy: z.hxy * y.v,
        hyy: z.hyy * y.v,
    }
}

/// Adjoint of the unary chain rule at input jet `x` with output adjoint `z`.
#[inline]
fn unary_transpose(kind: UnaryKind, x: Jet2, z: Jet2) -> Jet2 {
    let [_, d1, d2, d3] = unary_derivs(kind, x.v);
    Jet2 {
        v: z.v * d1
            + d2 * (z.gx * x.gx + z.gy * x.gy)
            + d2 * (z.hxx * x.hxx + z.hxy * x.hxy + z.hyy * x.hyy)
            + d3 * (z.hxx * x.gx * x.gx + z.hxy * x.gx * x.gy + z.hyy * x.gy * x.gy),
        gx: z.gx * d1 + d2 * (2.0 * z.hxx * x.gx + z.hxy * x.gy),
        gy: z.gy * d1 + d2 * (2.0 * z.hyy * x.gy + z.hxy * x.gx),
        hxx: z.hxx * d1,
        hxy: z.hxy * d1,
        hyy: z.hyy * d1,
    }
}

impl<'t> TJet<'t> {
    pub fn index(self) -> usize {
        self.idx as usize
    }

    pub fn jet(self) -> Jet2 {
        self.tape.value(self)
    }

    pub fn unary(self, kind: UnaryKind) -> TJet<'t> {
        let val = self.jet().apply_unary(kind);
        self.tape.push(Node::Unary(kind, self.idx), val)
    }

    fn extract(self, lane: Lane) -> TJet<'t> {
        let j = self.jet();
        let v = match lane {
            Lane::V => j.v,
            Lane::Gx => j.gx,
            Lane::Gy => j.gy,
            Lane::Hxx => j.hxx,
            Lane::Hxy => j.hxy,
            Lane::Hyy => j.hyy,
        };
        self.tape.push(Node::Extract(lane, self.idx), Jet2::constant(v))
    }
}

impl<'t> Add for TJet<'t> {
    type Output = TJet<'t>;
    fn add(self, o: TJet<'t>) -> TJet<'t> {
        let val = self.jet() + o.jet();
        self.tape.push(Node::Add(self.idx, o.idx), val)
    }
}

impl<'t> Sub for TJet<'t> {
    type Output = TJet<'t>;
    fn sub(self, o: TJet<'t>) -> TJet<'t> {
        let val = self.jet() - o.jet();
        self.tape.push(Node::Sub(self.idx, o.idx), val)
    }
}

impl<'t> Mul for TJet<'t> {
    type Output = TJet<'t>;
    fn mul(self, o: TJet<'t>) -> TJet<'t> {
        let val = self.jet() * o.jet();
        self.tape.push(Node::Mul(self.idx, o.idx), val)
    }
}

impl<'t> Div for TJet<'t> {
    type Output = TJet<'t>;
    fn div(self, o: TJet<'t>) -> TJet<'t> {
        self * o.unary(UnaryKind::Recip)
    }
}

impl<'t> Neg for TJet<'t> {
    type Output = TJet<'t>;
    fn neg(self) -> TJet<'t> {
        let val = -self.jet();
        self.tape.push(Node::Neg(self.idx), val)
    }
}

impl<'t> Add<f64> for TJet<'t> {
    type Output = TJet<'t>;
    fn add(self, c: f64) -> TJet<'t> {
        let val = self.jet() + c;
        self.tape.push(Node::AffMap { x: self.idx, scale: 1.0, shift: c }, val)
    }
}

impl<'t> Sub<f64> for TJet<'t> {
    type Output = TJet<'t>;
    fn sub(self, c: f64) -> TJet<'t> {
        self + (-c)
    }
}

impl<'t> Mul<f64> for TJet<'t> {
    type Output = TJet<'t>;
    fn mul(self, c: f64) -> TJet<'t> {
        let val = self.jet().scale(c);
        self.tape.push(Node::AffMap { x: self.idx, scale: c, shift: 0.0 }, val)
    }
}

impl<'t> Div<f64> for TJet<'t> {
    type Output = TJet<'t>;
    fn div(self, c: f64) -> TJet<'t> {
        self * (1.0 / c)
    }
}

impl<'t> Add<TJet<'t>> for f64 {
    type Output = TJet<'t>;
    fn add(self, j: TJet<'t>) -> TJet<'t> {
        j + self
    }
}

impl<'t> Sub<TJet<'t>> for f64 {
    type Output = TJet<'t>;
    fn sub(self, j: TJet<'t>) -> TJet<'t> {
        let val = -j.jet() + self;
        j.tape.push(Node::AffMap { x: j.idx, scale: -1.0, shift: self }, val)
    }
}

impl<'t> Mul<TJet<'t>> for f64 {
    type Output = TJet<'t>;
    fn mul(self, j: TJet<'t>) -> TJet<'t> {
        j * self
    }
}

/// Scalar interface shared by plain jets and tape handles, so residual
/// operators and network evaluation are written once and run both as data
/// (no gradient) and as recorded computations (exact parameter gradient).
pub trait JetScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Current value lane (for guards and diagnostics; not differentiated).
    fn val(self) -> f64;
    /// A constant in the same evaluation context.
    fn lit(self, c: f64) -> Self;
    /// A constant jet in the same evaluation context (frozen field data).
    fn lit_jet(self, j: Jet2) -> Self;
    fn apply(self, kind: UnaryKind) -> Self;

    fn powf(self, c: f64) -> Self {
        self.apply(UnaryKind::PowF(c))
    }
    fn smooth_abs(self, eps: f64) -> Self {
        self.apply(UnaryKind::SmoothAbs(eps))
    }
    fn square(self) -> Self {
        self * self
    }

    /// Value lane as a plain scalar (drops the derivative lanes).
    fn v(self) -> Self;
    /// First x-derivative lane as a value-lane scalar.
    fn dx(self) -> Self;
    fn dy(self) -> Self;
    fn dxx(self) -> Self;
    fn dxy(self) -> Self;
    fn dyy(self) -> Self;
    fn lap(self) -> Self {
        self.dxx() + self.dyy()
    }
}

impl JetScalar for Jet2 {
    fn val(self) -> f64 {
        self.v
    }
    fn lit(self, c: f64) -> Self {
        Jet2::constant(c)
    }
    fn lit_jet(self, j: Jet2) -> Self {
        j
    }
    fn apply(self, kind: UnaryKind) -> Self {
        self.apply_unary(kind)
    }
    fn v(self) -> Self {
        Jet2::constant(self.v)
    }
    fn dx(self) -> Self {
        Jet2::constant(self.gx)
    }
    fn dy(self) -> Self {
        Jet2::constant(self.gy)
    }
    fn dxx(self) -> Self {
        Jet2::constant(self.hxx)
    }
    fn dxy(self) -> Self {
        Jet2::constant(self.hxy)
    }
    fn dyy(self) -> Self {
        Jet2::constant(self.hyy)
    }
}

impl<'t> JetScalar for TJet<'t> {
    fn val(self) -> f64 {
        self.jet().v
    }
    fn lit(self, c: f64) -> Self {
        self.tape.scalar(c)
    }
    fn lit_jet(self, j: Jet2) -> Self {
        self.tape.constant(j)
    }
    fn apply(self, kind: UnaryKind) -> Self {
        self.unary(kind)
    }
    fn v(self) -> Self {
        self.extract(Lane::V)
    }
    fn dx(self) -> Self {
        self.extract(Lane::Gx)
    }
    fn dy(self) -> Self {
        self.extract(Lane::Gy)
    }
    fn dxx(self) -> Self {
        self.extract(Lane::Hxx)
    }
    fn dxy(self) -> Self {
        self.extract(Lane::Hxy)
    }
    fn dyy(self) -> Self {
        self.extract(Lane::Hyy)
    }
}
