//! The multilayer perceptron field approximator.
//!
//! Layers are coupled as `y_l = sigma_l(W_l y_{l-1} + beta_l)`; the final
//! layer is always linear. Inputs are mapped affinely from the domain
//! bounding box `[lb, ub]` onto `[-1, 1]^2` before the first layer. The same
//! parameter vector drives three evaluation paths: plain values, spatial
//! jets, and jets recorded on a parameter tape for training.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Activation, Jet2, JetScalar, TJet, Tape, UnaryKind};
use crate::rng::Rng;
use crate::{DcmError, Result};

impl From<Activation> for UnaryKind {
    fn from(a: Activation) -> UnaryKind {
        match a {
            Activation::Tanh => UnaryKind::Tanh,
            Activation::Sigmoid => UnaryKind::Sigmoid,
            Activation::Swish => UnaryKind::Swish,
        }
    }
}

/// How biases are drawn at initialisation. The Xavier listing zeroes them;
/// the Navier-Stokes experiment text draws them standard-normal instead, so
/// both modes are provided and `Zero` is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasInit {
    #[default]
    Zero,
    StandardNormal,
}

/// Offsets of each layer's weights and biases inside the flat parameter
/// vector. Weights are row-major per output neuron: entry (l, j, k) sits at
/// `w_off[l] + j * fan_in + k`, so one neuron's fan-in is contiguous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub w_off: Vec<usize>,
    pub b_off: Vec<usize>,
    pub len: usize,
}

impl ParamLayout {
    pub fn new(layer_sizes: &[usize]) -> Self {
        let mut w_off = Vec::new();
        let mut b_off = Vec::new();
        let mut at = 0;
        for l in 0..layer_sizes.len() - 1 {
            w_off.push(at);
            at += layer_sizes[l] * layer_sizes[l + 1];
            b_off.push(at);
            at += layer_sizes[l + 1];
        }
        ParamLayout { w_off, b_off, len: at }
    }
}

/// Flat trainable parameters plus their layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub layout: ParamLayout,
}

impl ParamVector {
    /// Weight matrix of layer `l` as (fan_out, fan_in) row-major rows.
    pub fn weights(&self, l: usize, layer_sizes: &[usize]) -> Vec<Vec<f64>> {
        let (n_in, n_out) = (layer_sizes[l], layer_sizes[l + 1]);
        (0..n_out)
            .map(|j| {
                let at = self.layout.w_off[l] + j * n_in;
                self.values[at..at + n_in].to_vec()
            })
            .collect()
    }

    pub fn biases(&self, l: usize, layer_sizes: &[usize]) -> Vec<f64> {
        let n_out = layer_sizes[l + 1];
        let at = self.layout.b_off[l];
        self.values[at..at + n_out].to_vec()
    }

    /// Rebuild the flat vector from per-layer matrices; the inverse of
    /// `weights`/`biases`.
    pub fn from_matrices(
        layer_sizes: &[usize],
        weights: &[Vec<Vec<f64>>],
        biases: &[Vec<f64>],
    ) -> Self {
        let layout = ParamLayout::new(layer_sizes);
        let mut values = vec![0.0; layout.len];
        for l in 0..layer_sizes.len() - 1 {
            let n_in = layer_sizes[l];
            for (j, row) in weights[l].iter().enumerate() {
                let at = layout.w_off[l] + j * n_in;
                values[at..at + n_in].copy_from_slice(row);
            }
            let at = layout.b_off[l];
            values[at..at + biases[l].len()].copy_from_slice(&biases[l]);
        }
        ParamVector { values, layout }
    }
}

/// Network architecture: sizes, per-hidden-layer activations, and input
/// normalization bounds. Parameters live in a separate [`ParamVector`] so a
/// frozen network can be shared while the optimizer owns the vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub lb: [f64; 2],
    pub ub: [f64; 2],
    layout: ParamLayout,
}

impl Mlp {
    pub fn new(
        layer_sizes: Vec<usize>,
        activations: Vec<Activation>,
        lb: [f64; 2],
        ub: [f64; 2],
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(DcmError::Config("network needs at least input and output layers".into()));
        }
        if layer_sizes[0] != 2 {
            return Err(DcmError::Config(format!(
                "input dimension must be 2, got {}",
                layer_sizes[0]
            )));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(DcmError::Config("zero-width layer".into()));
        }
        if activations.len() != layer_sizes.len().saturating_sub(2) {
            return Err(DcmError::Config(format!(
                "expected {} hidden activations, got {}",
                layer_sizes.len() - 2,
                activations.len()
            )));
        }
        for d in 0..2 {
            if !(lb[d] < ub[d]) {
                return Err(DcmError::Config(format!(
                    "normalization bounds need lb < ub, got lb[{d}]={} ub[{d}]={}",
                    lb[d], ub[d]
                )));
            }
        }
        let layout = ParamLayout::new(&layer_sizes);
        Ok(Mlp { layer_sizes, activations, lb, ub, layout })
    }

    /// Same hidden activation everywhere (the common case).
    pub fn uniform(layer_sizes: Vec<usize>, act: Activation, lb: [f64; 2], ub: [f64; 2]) -> Result<Self> {
        let n_hidden = layer_sizes.len().saturating_sub(2);
        Mlp::new(layer_sizes, vec![act; n_hidden], lb, ub)
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.len
    }

    pub fn out_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Xavier/Glorot initialisation: truncated-normal weights with
    /// stddev = sqrt(2 / (fan_in + fan_out)), redrawing any sample beyond
    /// two standard deviations; biases per `bias_init`.
    pub fn xavier_init(&self, seed: u64, bias_init: BiasInit) -> ParamVector {
        let mut rng = Rng::seed_from(seed);
        let mut values = vec![0.0; self.layout.len];
        for l in 0..self.layer_sizes.len() - 1 {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let stddev = (2.0 / (n_in + n_out) as f64).sqrt();
            for j in 0..n_out {
                for k in 0..n_in {
                    values[self.layout.w_off[l] + j * n_in + k] = rng.truncated_normal(stddev);
                }
            }
            for j in 0..n_out {
                values[self.layout.b_off[l] + j] = match bias_init {
                    BiasInit::Zero => 0.0,
                    BiasInit::StandardNormal => rng.normal(),
                };
            }
        }
        ParamVector { values, layout: self.layout.clone() }
    }

    /// Affine map of the input onto `[-1, 1]^2`: `2 (x - lb)/(ub - lb) - 1`.
    /// Out-of-range inputs are mapped by the same affine rule.
    pub fn normalize_input(&self, x: [f64; 2]) -> [f64; 2] {
        [
            2.0 * (x[0] - self.lb[0]) / (self.ub[0] - self.lb[0]) - 1.0,
            2.0 * (x[1] - self.lb[1]) / (self.ub[1] - self.lb[1]) - 1.0,
        ]
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.layout.len {
            return Err(DcmError::ShapeMismatch(format!(
                "theta has {} entries, network {:?} needs {}",
                theta.len(),
                self.layer_sizes,
                self.layout.len
            )));
        }
        Ok(())
    }

    /// Plain value evaluation (jet-free fast path). Uses the same fold order
    /// as the jet paths, so values agree to the last bit.
    pub fn value(&self, theta: &[f64], x: [f64; 2]) -> Vec<f64> {
        let n = self.normalize_input(x);
        let mut act: Vec<f64> = vec![n[0], n[1]];
        let mut next: Vec<f64> = Vec::new();
        for l in 0..self.layer_sizes.len() - 1 {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            next.clear();
            for j in 0..n_out {
                let w = self.layout.w_off[l] + j * n_in;
                let mut acc = act[0] * theta[w];
                for k in 1..n_in {
                    acc += act[k] * theta[w + k];
                }
                acc += theta[self.layout.b_off[l] + j];
                next.push(acc);
            }
            if l + 2 < self.layer_sizes.len() {
                let kind: UnaryKind = self.activations[l].into();
                for v in next.iter_mut() {
                    *v = crate::autodiff::unary_derivs(kind, *v)[0];
                }
            }
            std::mem::swap(&mut act, &mut next);
        }
        act
    }

    /// Generic layer sweep over any jet-like scalar; drives [`Mlp::jets`]
    /// and cross-checks the tape path.
    pub fn eval_layers<J: JetScalar>(&self, theta: &[f64], seeds: [J; 2]) -> Vec<J> {
        let mut act: Vec<J> = vec![seeds[0], seeds[1]];
        for l in 0..self.layer_sizes.len() - 1 {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let mut next: Vec<J> = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let w = self.layout.w_off[l] + j * n_in;
                let mut acc = act[0] * theta[w];
                for k in 1..n_in {
                    acc = acc + act[k] * theta[w + k];
                }
                acc = acc + theta[self.layout.b_off[l] + j];
                next.push(acc);
            }
            if l + 2 < self.layer_sizes.len() {
                let kind: UnaryKind = self.activations[l].into();
                for v in next.iter_mut() {
                    *v = v.apply(kind);
                }
            }
            act = next;
        }
        act
    }

    /// Jet seeds for a physical point, normalization folded in.
    fn jet_seeds(&self, x: [f64; 2]) -> [Jet2; 2] {
        let n = self.normalize_input(x);
        let sx = 2.0 / (self.ub[0] - self.lb[0]);
        let sy = 2.0 / (self.ub[1] - self.lb[1]);
        [
            Jet2 { v: n[0], gx: sx, ..Jet2::ZERO },
            Jet2 { v: n[1], gy: sy, ..Jet2::ZERO },
        ]
    }

    /// Value, spatial gradient, and spatial Hessian of every output field at
    /// `x`. Activation derivatives are analytic throughout.
    pub fn jets(&self, theta: &[f64], x: [f64; 2]) -> Vec<Jet2> {
        self.eval_layers(theta, self.jet_seeds(x))
    }

    /// Scalar-field convenience wrapper around [`Mlp::jets`].
    pub fn jet(&self, theta: &[f64], x: [f64; 2]) -> Result<Jet2> {
        self.check_theta(theta)?;
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(DcmError::Geometry(format!("non-finite evaluation point {x:?}")));
        }
        Ok(self.jets(theta, x)[0])
    }

    /// Record the network evaluation on a tape. One affine node per neuron;
    /// returns the output-layer nodes (one per field).
    pub fn tape_jets<'t>(&self, tape: &'t Tape, theta: &[f64], x: [f64; 2]) -> Vec<TJet<'t>> {
        let seeds = self.jet_seeds(x);
        let mut block: Vec<TJet<'t>> = vec![tape.constant(seeds[0]), tape.constant(seeds[1])];
        for l in 0..self.layer_sizes.len() - 1 {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let mut next: Vec<TJet<'t>> = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let w = self.layout.w_off[l] + j * n_in;
                next.push(tape.neuron(theta, block[0], n_in, w, self.layout.b_off[l] + j));
            }
            if l + 2 < self.layer_sizes.len() {
                let kind: UnaryKind = self.activations[l].into();
                next = next.into_iter().map(|n| n.unary(kind)).collect();
            }
            block = next;
        }
        block
    }
}

/// Serialized network: shape header plus the flat parameter array in layout
/// order (per layer: row-major weights, then biases).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub lb: [f64; 2],
    pub ub: [f64; 2],
    pub theta: Vec<f64>,
}

impl Checkpoint {
    pub fn new(net: &Mlp, theta: &[f64]) -> Self {
        Checkpoint {
            layer_sizes: net.layer_sizes.clone(),
            activations: net.activations.clone(),
            lb: net.lb,
            ub: net.ub,
            theta: theta.to_vec(),
        }
    }

    pub fn into_parts(self) -> Result<(Mlp, Vec<f64>)> {
        let net = Mlp::new(self.layer_sizes, self.activations, self.lb, self.ub)?;
        net.check_theta(&self.theta)?;
        Ok((net, self.theta))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym_box() -> ([f64; 2], [f64; 2]) {
        ([-1.0, -1.0], [1.0, 1.0])
    }

    #[test]
    fn normalization_examples() {
        let (lb, ub) = sym_box();
        let net = Mlp::uniform(vec![2, 1], Activation::Tanh, lb, ub).unwrap();
        assert_eq!(net.normalize_input([0.0, 0.0]), [0.0, 0.0]);
        assert_eq!(net.normalize_input([-1.0, -1.0]), [-1.0, -1.0]);
        let net2 = Mlp::uniform(vec![2, 1], Activation::Tanh, [0.0, 0.0], [2.0, 4.0]).unwrap();
        assert_eq!(net2.normalize_input([1.0, 3.0]), [0.0, 0.5]);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let err = Mlp::uniform(vec![2, 1], Activation::Tanh, [0.0, 1.0], [1.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn xavier_stddev_and_zero_biases() {
        let net = Mlp::uniform(vec![2, 30, 30, 1], Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = net.xavier_init(123, BiasInit::Zero);
        // 30 -> 30 layer: stddev = sqrt(2/60) ~ 0.18257
        let expected = (2.0_f64 / 60.0).sqrt();
        assert_relative_eq!(expected, 0.18257, max_relative = 1e-4);
        let w = p.weights(1, &net.layer_sizes);
        let flat: Vec<f64> = w.into_iter().flatten().collect();
        let var = flat.iter().map(|x| x * x).sum::<f64>() / flat.len() as f64;
        // truncation at 2 sigma shrinks the variance to ~0.774 sigma^2
        let trunc_factor: f64 = 0.7737;
        assert_relative_eq!(var.sqrt(), expected * trunc_factor.sqrt(), max_relative = 0.12);
        assert!(flat.iter().all(|x| x.abs() <= 2.0 * expected));
        for l in 0..3 {
            assert!(p.biases(l, &net.layer_sizes).iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn xavier_is_deterministic_per_seed() {
        let net = Mlp::uniform(vec![2, 8, 1], Activation::Swish, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let a = net.xavier_init(9, BiasInit::Zero);
        let b = net.xavier_init(9, BiasInit::Zero);
        assert_eq!(a.values, b.values);
        let c = net.xavier_init(10, BiasInit::Zero);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn normal_bias_mode_draws_unit_normals() {
        let net = Mlp::uniform(vec![2, 50, 50, 1], Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = net.xavier_init(4, BiasInit::StandardNormal);
        let biases: Vec<f64> = (0..2).flat_map(|l| p.biases(l, &net.layer_sizes)).collect();
        let var = biases.iter().map(|b| b * b).sum::<f64>() / biases.len() as f64;
        assert!((var - 1.0).abs() < 0.45, "bias variance {var}");
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let net = Mlp::uniform(vec![2, 7, 5, 1], Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let theta = vec![0.0; net.n_params()];
        for &x in &[[0.3, -0.4], [0.9, 0.9], [-1.0, 0.2]] {
            assert_eq!(net.value(&theta, x), vec![0.0]);
        }
    }

    #[test]
    fn linear_net_is_a_matrix_multiply() {
        // 2 -> 2 with no hidden layer: output = W * normalize(x) + b
        let net = Mlp::new(vec![2, 2], vec![], [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let w = vec![vec![vec![1.5, -0.5], vec![0.25, 2.0]]];
        let b = vec![vec![0.1, -0.2]];
        let p = ParamVector::from_matrices(&net.layer_sizes, &w, &b);
        let x = [0.3, 0.7];
        let out = net.value(&p.values, x);
        assert_relative_eq!(out[0], 1.5 * 0.3 - 0.5 * 0.7 + 0.1, max_relative = 1e-15);
        assert_relative_eq!(out[1], 0.25 * 0.3 + 2.0 * 0.7 - 0.2, max_relative = 1e-15);
    }

    #[test]
    fn identity_network_jet() {
        // u(x, y) = x via a bias-free linear layer on the symmetric box
        let net = Mlp::new(vec![2, 1], vec![], [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = ParamVector::from_matrices(&net.layer_sizes, &[vec![vec![1.0, 0.0]]], &[vec![0.0]]);
        let j = net.jet(&p.values, [3.0, 4.0]).unwrap();
        assert_eq!(j.v, 3.0);
        assert_eq!(j.grad(), [1.0, 0.0]);
        assert_eq!(j.hess(), [[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn single_tanh_neuron_jet() {
        // u = tanh(x): one hidden neuron wired to the first input
        let net = Mlp::new(vec![2, 1, 1], vec![Activation::Tanh], [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = ParamVector::from_matrices(
            &net.layer_sizes,
            &[vec![vec![1.0, 0.0]], vec![vec![1.0]]],
            &[vec![0.0], vec![0.0]],
        );
        let j = net.jet(&p.values, [0.0, 0.5]).unwrap();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.grad(), [1.0, 0.0]);
        assert_eq!(j.hxx, 0.0);
    }

    #[test]
    fn forward_equals_jet_value_exactly() {
        let net = Mlp::uniform(vec![2, 9, 7, 2], Activation::Swish, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = net.xavier_init(33, BiasInit::Zero);
        let mut rng = crate::rng::Rng::seed_from(8);
        for _ in 0..100 {
            let x = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
            let vals = net.value(&p.values, x);
            let jets = net.jets(&p.values, x);
            for (v, j) in vals.iter().zip(jets.iter()) {
                assert_eq!(*v, j.v);
            }
        }
    }

    #[test]
    fn tape_path_matches_plain_jets_bitwise() {
        let net = Mlp::new(
            vec![2, 6, 5, 2],
            vec![Activation::Swish, Activation::Tanh],
            [-1.0, -0.5],
            [1.0, 2.0],
        )
        .unwrap();
        let p = net.xavier_init(77, BiasInit::StandardNormal);
        let mut rng = crate::rng::Rng::seed_from(21);
        for _ in 0..20 {
            let x = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-0.5, 2.0)];
            let plain = net.jets(&p.values, x);
            let tape = Tape::new();
            let recorded = net.tape_jets(&tape, &p.values, x);
            for (a, b) in plain.iter().zip(recorded.iter()) {
                assert_eq!(*a, b.jet());
            }
        }
    }

    #[test]
    fn hidden_neuron_permutation_leaves_output_unchanged() {
        let sizes = vec![2, 4, 3, 1];
        let net = Mlp::uniform(sizes.clone(), Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = net.xavier_init(5, BiasInit::StandardNormal);

        // swap hidden neurons 1 and 3 of layer 0 together with their wiring
        let mut w: Vec<Vec<Vec<f64>>> = (0..3).map(|l| p.weights(l, &sizes)).collect();
        let mut b: Vec<Vec<f64>> = (0..3).map(|l| p.biases(l, &sizes)).collect();
        w[0].swap(1, 3);
        b[0].swap(1, 3);
        for row in w[1].iter_mut() {
            row.swap(1, 3);
        }
        let q = ParamVector::from_matrices(&sizes, &w, &b);

        let mut rng = crate::rng::Rng::seed_from(2);
        for _ in 0..50 {
            let x = [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)];
            let a = net.value(&p.values, x)[0];
            let c = net.value(&q.values, x)[0];
            assert_relative_eq!(a, c, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn jet_matches_finite_differences_on_random_net() {
        let net = Mlp::uniform(vec![2, 30, 1], Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let p = net.xavier_init(17, BiasInit::Zero);
        let h = 1e-4;
        let mut rng = crate::rng::Rng::seed_from(3);
        for _ in 0..10 {
            let x = [rng.uniform_in(-0.9, 0.9), rng.uniform_in(-0.9, 0.9)];
            let j = net.jets(&p.values, x)[0];
            let g = |x: [f64; 2]| net.jets(&p.values, x)[0];
            // hessian entries vs central differences of the gradient
            let hxx = (g([x[0] + h, x[1]]).gx - g([x[0] - h, x[1]]).gx) / (2.0 * h);
            let hyy = (g([x[0], x[1] + h]).gy - g([x[0], x[1] - h]).gy) / (2.0 * h);
            let hxy = (g([x[0] + h, x[1]]).gy - g([x[0] - h, x[1]]).gy) / (2.0 * h);
            assert_relative_eq!(j.hxx, hxx, max_relative = 1e-5, epsilon = 1e-9);
            assert_relative_eq!(j.hyy, hyy, max_relative = 1e-5, epsilon = 1e-9);
            assert_relative_eq!(j.hxy, hxy, max_relative = 1e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn shape_mismatch_is_a_structural_error() {
        let net = Mlp::uniform(vec![2, 4, 1], Activation::Tanh, [-1.0, -1.0], [1.0, 1.0]).unwrap();
        let bad = vec![0.0; net.n_params() - 1];
        assert!(matches!(net.jet(&bad, [0.0, 0.0]), Err(DcmError::ShapeMismatch(_))));
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let net = Mlp::new(
            vec![2, 5, 3, 1],
            vec![Activation::Swish, Activation::Tanh],
            [-1.0, 0.0],
            [1.0, 2.0],
        )
        .unwrap();
        let p = net.xavier_init(88, BiasInit::Zero);
        let ck = Checkpoint::new(&net, &p.values);
        let json = serde_json::to_string(&ck).unwrap();
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        let (net2, theta2) = back.into_parts().unwrap();
        assert_eq!(net, net2);
        assert_eq!(p.values, theta2);
    }
}
