//! Minimal reverse-mode differentiation over `Matrix` values.
//!
//! The tape is an arena: node ids are creation-ordered, so the graph is
//! acyclic by construction and backward is a single reverse sweep. Loss
//! kernels that couple many samples (pairwise distances, the spectral-norm
//! penalty) are fused ops whose forward pass caches exactly what the
//! vector-Jacobian product needs.

use std::rc::Rc;

use crate::error::{InvMlError, Result};
use crate::linalg::spectral_norm;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeId(usize);

/// LeakyReLU slope specification. `alpha` must lie in (0,1); 0.1 by default.
#[derive(Clone, Copy, Debug)]
pub struct ActivationSpec {
    pub alpha: f64,
}

impl Default for ActivationSpec {
    fn default() -> Self {
        Self { alpha: 0.1 }
    }
}

/// Entrywise `x` if `x >= 0` else `alpha * x`.
pub fn leaky_relu_forward(z: &Matrix, alpha: f64) -> Matrix {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    z.map(|v| if v >= 0.0 { v } else { alpha * v })
}

/// Exact inverse of `leaky_relu_forward`: `y` if `y >= 0` else `y / alpha`.
pub fn leaky_relu_inverse(y: &Matrix, alpha: f64) -> Matrix {
    assert!(alpha > 0.0, "alpha must be positive");
    y.map(|v| if v >= 0.0 { v } else { v / alpha })
}

enum Op {
    Leaf,
    /// value = A * B^T
    MatMulNT { a: NodeId, b: NodeId },
    LeakyRelu { a: NodeId, alpha: f64 },
    Add { a: NodeId, b: NodeId },
    Sub { a: NodeId, b: NodeId },
    Scale { a: NodeId, factor: f64 },
    Transpose { a: NodeId },
    Sum { a: NodeId },
    SumSq { a: NodeId },
    /// Scalar: sum of |entries| in columns >= col_start.
    ColAbsSum { a: NodeId, col_start: usize },
    /// Scalar: sum over pairs of |target - d_rows| (or squared difference).
    PairDistLoss { z: NodeId, pairs: Rc<Vec<(u32, u32)>>, targets: Rc<Vec<f64>>, squared: bool, dists: Vec<f64> },
    /// Scalar: -sum over cached active pairs of log(1 + d).
    PushLoss { z: NodeId, active: Vec<(u32, u32)>, dists: Vec<f64> },
    /// Scalar: sigma_max(W^T W - I), singular vectors detached.
    SpectralPenalty { w: NodeId, u: Matrix, v: Matrix },
}

struct Node {
    value: Matrix,
    grad: Option<Matrix>,
    requires_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Matrix, requires_grad: bool, op: Op) -> NodeId {
        self.nodes.push(Node { value, grad: None, requires_grad, op });
        NodeId(self.nodes.len() - 1)
    }

    /// Trainable leaf.
    pub fn param(&mut self, value: Matrix) -> NodeId {
        self.push(value, true, Op::Leaf)
    }

    /// Constant leaf; receives no gradient.
    pub fn constant(&mut self, value: Matrix) -> NodeId {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, id: NodeId) -> &Matrix {
        &self.nodes[id.0].value
    }

    pub fn scalar(&self, id: NodeId) -> f64 {
        let v = self.value(id);
        assert_eq!(v.shape(), (1, 1), "node is not scalar");
        v.get(0, 0)
    }

    pub fn grad(&self, id: NodeId) -> Option<&Matrix> {
        self.nodes[id.0].grad.as_ref()
    }

    fn requires(&self, id: NodeId) -> bool {
        self.nodes[id.0].requires_grad
    }

    pub fn matmul_nt(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).matmul_nt(self.value(b));
        let rg = self.requires(a) || self.requires(b);
        self.push(value, rg, Op::MatMulNT { a, b })
    }

    pub fn leaky_relu(&mut self, a: NodeId, alpha: f64) -> NodeId {
        let value = leaky_relu_forward(self.value(a), alpha);
        let rg = self.requires(a);
        self.push(value, rg, Op::LeakyRelu { a, alpha })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).add(self.value(b));
        let rg = self.requires(a) || self.requires(b);
        self.push(value, rg, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let value = self.value(a).sub(self.value(b));
        let rg = self.requires(a) || self.requires(b);
        self.push(value, rg, Op::Sub { a, b })
    }

    pub fn scale(&mut self, a: NodeId, factor: f64) -> NodeId {
        let value = self.value(a).scale(factor);
        let rg = self.requires(a);
        self.push(value, rg, Op::Scale { a, factor })
    }

    pub fn transpose(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).transpose();
        let rg = self.requires(a);
        self.push(value, rg, Op::Transpose { a })
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).data().iter().sum();
        let rg = self.requires(a);
        self.push(Matrix::from_raw(1, 1, vec![s]), rg, Op::Sum { a })
    }

    pub fn sum_sq(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.value(a).data().iter().map(|v| v * v).sum();
        let rg = self.requires(a);
        self.push(Matrix::from_raw(1, 1, vec![s]), rg, Op::SumSq { a })
    }

    /// L1 mass of the entries in columns `col_start..`.
    pub fn col_abs_sum(&mut self, a: NodeId, col_start: usize) -> NodeId {
        let v = self.value(a);
        assert!(col_start <= v.cols());
        let mut s = 0.0;
        for i in 0..v.rows() {
            for &x in &v.row(i)[col_start..] {
                s += x.abs();
            }
        }
        let rg = self.requires(a);
        self.push(Matrix::from_raw(1, 1, vec![s]), rg, Op::ColAbsSum { a, col_start })
    }

    /// Distance-discrepancy loss over fixed row pairs:
    /// sum |target_p - d(z_i, z_j)| (or the squared variant).
    pub fn pair_dist_loss(
        &mut self,
        z: NodeId,
        pairs: Rc<Vec<(u32, u32)>>,
        targets: Rc<Vec<f64>>,
        squared: bool,
    ) -> NodeId {
        assert_eq!(pairs.len(), targets.len());
        let zv = self.value(z);
        let mut dists = Vec::with_capacity(pairs.len());
        let mut loss = 0.0;
        for (&(i, j), &t) in pairs.iter().zip(targets.iter()) {
            let d = zv.row_distance(i as usize, j as usize);
            let diff = t - d;
            loss += if squared { diff * diff } else { diff.abs() };
            dists.push(d);
        }
        let rg = self.requires(z);
        self.push(
            Matrix::from_raw(1, 1, vec![loss]),
            rg,
            Op::PairDistLoss { z, pairs, targets, squared, dists },
        )
    }

    /// Push-away term: `-sum log(1 + d)` over the candidate pairs whose
    /// current distance is below `radius`. The active set is frozen at
    /// forward time, exactly like the paper's indicator.
    pub fn push_loss(&mut self, z: NodeId, candidates: &[(u32, u32)], radius: f64) -> NodeId {
        assert!(radius > 0.0, "push radius must be positive");
        let zv = self.value(z);
        let mut active = Vec::new();
        let mut dists = Vec::new();
        let mut loss = 0.0;
        for &(i, j) in candidates {
            let d = zv.row_distance(i as usize, j as usize);
            if d < radius {
                loss -= d.ln_1p();
                active.push((i, j));
                dists.push(d);
            }
        }
        let rg = self.requires(z);
        self.push(Matrix::from_raw(1, 1, vec![loss]), rg, Op::PushLoss { z, active, dists })
    }

    /// `sigma_max(W^T W - I)` with the singular vectors of the final power
    /// iteration treated as constants.
    pub fn spectral_penalty(&mut self, w: NodeId, n_iter: usize) -> Result<NodeId> {
        let wv = self.value(w);
        let m = wv.matmul_tn(wv).sub(&Matrix::identity(wv.cols()));
        let (sigma, u, v) = match spectral_norm(&m, n_iter) {
            Ok(t) => t,
            // W exactly orthogonal: the penalty and its gradient vanish.
            Err(InvMlError::ZeroMatrix) => {
                let n = wv.cols();
                (0.0, Matrix::zeros(n, 1), Matrix::zeros(n, 1))
            }
            Err(e) => return Err(e),
        };
        let rg = self.requires(w);
        Ok(self.push(Matrix::from_raw(1, 1, vec![sigma]), rg, Op::SpectralPenalty { w, u, v }))
    }

    /// Reverse sweep from a scalar loss node. Accumulates gradients on every
    /// node that (transitively) requires them.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if self.value(loss).shape() != (1, 1) {
            return Err(InvMlError::ShapeMismatch {
                expected: "1x1 loss".into(),
                got: format!("{}x{}", self.value(loss).rows(), self.value(loss).cols()),
            });
        }
        for node in self.nodes.iter_mut() {
            node.grad = None;
        }
        self.nodes[loss.0].grad = Some(Matrix::from_raw(1, 1, vec![1.0]));

        for idx in (0..=loss.0).rev() {
            let g = match self.nodes[idx].grad.take() {
                Some(g) => g,
                None => continue,
            };
            self.propagate(idx, &g)?;
            self.nodes[idx].grad = Some(g);
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, delta: Matrix) {
        if !self.requires(id) {
            return;
        }
        match &mut self.nodes[id.0].grad {
            Some(g) => g.add_assign(&delta),
            slot @ None => *slot = Some(delta),
        }
    }

    fn propagate(&mut self, idx: usize, g: &Matrix) -> Result<()> {
        match &self.nodes[idx].op {
            Op::Leaf => {}
            Op::MatMulNT { a, b } => {
                let (a, b) = (*a, *b);
                // C = A B^T: dA = dC B, dB = dC^T A.
                let da = g.matmul(self.value(b));
                let db = g.matmul_tn(self.value(a));
                self.accumulate(a, da);
                self.accumulate(b, db);
            }
            Op::LeakyRelu { a, alpha } => {
                let (a, alpha) = (*a, *alpha);
                let input = self.value(a);
                let da = Matrix::from_raw(
                    g.rows(),
                    g.cols(),
                    g.data()
                        .iter()
                        .zip(input.data())
                        .map(|(&gv, &x)| if x >= 0.0 { gv } else { alpha * gv })
                        .collect(),
                );
                self.accumulate(a, da);
            }
            Op::Add { a, b } => {
                let (a, b) = (*a, *b);
                self.accumulate(a, g.clone());
                self.accumulate(b, g.clone());
            }
            Op::Sub { a, b } => {
                let (a, b) = (*a, *b);
                self.accumulate(a, g.clone());
                self.accumulate(b, g.scale(-1.0));
            }
            Op::Scale { a, factor } => {
                let (a, factor) = (*a, *factor);
                self.accumulate(a, g.scale(factor));
            }
            Op::Transpose { a } => {
                let a = *a;
                self.accumulate(a, g.transpose());
            }
            Op::Sum { a } => {
                let a = *a;
                let gs = g.get(0, 0);
                let v = self.value(a);
                self.accumulate(a, Matrix::from_raw(v.rows(), v.cols(), vec![gs; v.rows() * v.cols()]));
            }
            Op::SumSq { a } => {
                let a = *a;
                let gs = g.get(0, 0);
                let da = self.value(a).scale(2.0 * gs);
                self.accumulate(a, da);
            }
            Op::ColAbsSum { a, col_start } => {
                let (a, col_start) = (*a, *col_start);
                let gs = g.get(0, 0);
                let v = self.value(a);
                // d|x|/dx taken as 0 at x = 0.
                let da = Matrix::from_fn(v.rows(), v.cols(), |i, j| {
                    if j < col_start {
                        0.0
                    } else {
                        gs * sign_or_zero(v.get(i, j))
                    }
                });
                self.accumulate(a, da);
            }
            Op::PairDistLoss { z, pairs, targets, squared, dists } => {
                let z = *z;
                let squared = *squared;
                let pairs = Rc::clone(pairs);
                let targets = Rc::clone(targets);
                let dists = dists.clone();
                let gs = g.get(0, 0);
                let zv = self.value(z);
                let mut dz = Matrix::zeros(zv.rows(), zv.cols());
                for (p, &(i, j)) in pairs.iter().enumerate() {
                    let d = dists[p];
                    if d == 0.0 {
                        continue;
                    }
                    let diff = targets[p] - d;
                    // dL/dd for |t - d| is -sign(t - d); for (t - d)^2 it is -2(t - d).
                    let dl_dd = if squared { -2.0 * diff } else { -sign_or_zero(diff) };
                    let f = gs * dl_dd / d;
                    let (i, j) = (i as usize, j as usize);
                    for c in 0..zv.cols() {
                        let delta = f * (zv.get(i, c) - zv.get(j, c));
                        dz.set(i, c, dz.get(i, c) + delta);
                        dz.set(j, c, dz.get(j, c) - delta);
                    }
                }
                self.accumulate(z, dz);
            }
            Op::PushLoss { z, active, dists } => {
                let z = *z;
                let active = active.clone();
                let dists = dists.clone();
                let gs = g.get(0, 0);
                let zv = self.value(z);
                let mut dz = Matrix::zeros(zv.rows(), zv.cols());
                for (p, &(i, j)) in active.iter().enumerate() {
                    let d = dists[p];
                    if d == 0.0 {
                        continue;
                    }
                    // L contribution is -log(1 + d): dL/dd = -1/(1 + d).
                    let f = gs * (-1.0 / (1.0 + d)) / d;
                    let (i, j) = (i as usize, j as usize);
                    for c in 0..zv.cols() {
                        let delta = f * (zv.get(i, c) - zv.get(j, c));
                        dz.set(i, c, dz.get(i, c) + delta);
                        dz.set(j, c, dz.get(j, c) - delta);
                    }
                }
                self.accumulate(z, dz);
            }
            Op::SpectralPenalty { w, u, v } => {
                let w = *w;
                let (u, v) = (u.clone(), v.clone());
                let gs = g.get(0, 0);
                let wv = self.value(w);
                // L = sigma_max(M), M = W^T W - I, dL/dM = u v^T (detached):
                // dL/dW = W (u v^T + v u^T).
                let uvt = u.matmul_nt(&v);
                let sym = uvt.add(&uvt.transpose());
                let dw = wv.matmul(&sym).scale(gs);
                self.accumulate(w, dw);
            }
        }
        Ok(())
    }
}

#[inline]
fn sign_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, m: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(n, m, |_, _| gaussian(&mut rng))
    }

    #[test]
    fn leaky_relu_definition() {
        let z = Matrix::from_rows(&[vec![2.0, -1.0]]).unwrap();
        let y = leaky_relu_forward(&z, 0.1);
        assert_eq!(y.row(0), &[2.0, -0.1]);
    }

    #[test]
    fn leaky_relu_nonnegative_is_identity() {
        let z = Matrix::from_rows(&[vec![0.0, 1.5, 3.0]]).unwrap();
        assert_eq!(leaky_relu_forward(&z, 0.1), z);
    }

    #[test]
    fn leaky_relu_inverse_value() {
        let y = Matrix::from_rows(&[vec![-0.1]]).unwrap();
        let x = leaky_relu_inverse(&y, 0.1);
        assert!((x.get(0, 0) + 1.0).abs() < 1e-15);
        let zero = Matrix::zeros(1, 1);
        assert_eq!(leaky_relu_inverse(&zero, 0.1), zero);
    }

    #[test]
    fn leaky_relu_roundtrip_bit_exact() {
        let x = random_matrix(4, 6, 1);
        // alpha = 0.5 is a power of two: the round trip is exact bit-for-bit.
        let rt = leaky_relu_inverse(&leaky_relu_forward(&x, 0.5), 0.5);
        assert_eq!(rt, x);
    }

    #[test]
    fn sum_gradient_is_ones() {
        let mut tape = Tape::new();
        let x = tape.param(random_matrix(3, 2, 2));
        let loss = tape.sum(x);
        tape.backward(loss).unwrap();
        let g = tape.grad(x).unwrap();
        assert!(g.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.param(random_matrix(3, 2, 2));
        assert!(tape.backward(x).is_err());
    }

    #[test]
    fn gradient_accumulates_over_shared_leaves() {
        let mut tape = Tape::new();
        let x = tape.param(random_matrix(2, 2, 3));
        let s1 = tape.sum(x);
        let s2 = tape.sum_sq(x);
        let total = tape.add(s1, s2);
        tape.backward(total).unwrap();
        let g = tape.grad(x).unwrap().clone();
        // d(sum + sumsq)/dx = 1 + 2x.
        let expect = tape.value(x).map(|v| 1.0 + 2.0 * v);
        assert!(g.sub(&expect).max_abs() < 1e-12);
    }

    /// Central finite differences of `f` at `x0`, one parameter at a time.
    fn finite_diff(x0: &Matrix, mut f: impl FnMut(&Matrix) -> f64, h: f64) -> Matrix {
        let mut g = Matrix::zeros(x0.rows(), x0.cols());
        for i in 0..x0.rows() {
            for j in 0..x0.cols() {
                let mut xp = x0.clone();
                xp.set(i, j, x0.get(i, j) + h);
                let mut xm = x0.clone();
                xm.set(i, j, x0.get(i, j) - h);
                g.set(i, j, (f(&xp) - f(&xm)) / (2.0 * h));
            }
        }
        g
    }

    fn assert_grad_close(analytic: &Matrix, numeric: &Matrix, rel: f64) {
        let scale = numeric.max_abs().max(1e-6);
        let err = analytic.sub(numeric).max_abs() / scale;
        assert!(err <= rel, "gradient mismatch: rel err {err}");
    }

    #[test]
    fn matmul_loss_matches_finite_differences() {
        let w0 = random_matrix(4, 5, 10);
        let x = random_matrix(3, 5, 11);
        let f = |w: &Matrix| {
            let mut tape = Tape::new();
            let wn = tape.param(w.clone());
            let xn = tape.constant(x.clone());
            let y = tape.matmul_nt(xn, wn);
            let loss = tape.sum_sq(y);
            tape.scalar(loss)
        };
        let numeric = finite_diff(&w0, f, 1e-6);
        let mut tape = Tape::new();
        let wn = tape.param(w0.clone());
        let xn = tape.constant(x.clone());
        let y = tape.matmul_nt(xn, wn);
        let loss = tape.sum_sq(y);
        tape.backward(loss).unwrap();
        assert_grad_close(tape.grad(wn).unwrap(), &numeric, 1e-5);
    }

    #[test]
    fn leaky_relu_gradient_matches_finite_differences() {
        // Inputs perturbed away from the kink at 0.
        let x0 = random_matrix(4, 5, 12).map(|v| if v.abs() < 0.05 { v + 0.2 } else { v });
        let f = |x: &Matrix| {
            let mut tape = Tape::new();
            let xn = tape.param(x.clone());
            let y = tape.leaky_relu(xn, 0.1);
            let loss = tape.sum_sq(y);
            tape.scalar(loss)
        };
        let numeric = finite_diff(&x0, f, 1e-6);
        let mut tape = Tape::new();
        let xn = tape.param(x0.clone());
        let y = tape.leaky_relu(xn, 0.1);
        let loss = tape.sum_sq(y);
        tape.backward(loss).unwrap();
        assert_grad_close(tape.grad(xn).unwrap(), &numeric, 1e-5);
    }

    #[test]
    fn pair_dist_loss_gradient_matches_finite_differences() {
        let z0 = random_matrix(6, 3, 13);
        let pairs = Rc::new(vec![(0u32, 1u32), (2, 3), (4, 5), (0, 4)]);
        let targets = Rc::new(vec![1.0, 0.5, 2.0, 0.25]);
        for &squared in &[false, true] {
            let f = |z: &Matrix| {
                let mut tape = Tape::new();
                let zn = tape.param(z.clone());
                let loss = tape.pair_dist_loss(zn, Rc::clone(&pairs), Rc::clone(&targets), squared);
                tape.scalar(loss)
            };
            let numeric = finite_diff(&z0, f, 1e-6);
            let mut tape = Tape::new();
            let zn = tape.param(z0.clone());
            let loss = tape.pair_dist_loss(zn, Rc::clone(&pairs), Rc::clone(&targets), squared);
            tape.backward(loss).unwrap();
            assert_grad_close(tape.grad(zn).unwrap(), &numeric, 1e-4);
        }
    }

    #[test]
    fn push_loss_gradient_matches_finite_differences() {
        let z0 = random_matrix(6, 2, 14);
        let candidates = vec![(0u32, 3u32), (1, 4), (2, 5)];
        // Radius large enough that the active set is stable under the probe.
        let f = |z: &Matrix| {
            let mut tape = Tape::new();
            let zn = tape.param(z.clone());
            let loss = tape.push_loss(zn, &candidates, 50.0);
            tape.scalar(loss)
        };
        let numeric = finite_diff(&z0, f, 1e-6);
        let mut tape = Tape::new();
        let zn = tape.param(z0.clone());
        let loss = tape.push_loss(zn, &candidates, 50.0);
        tape.backward(loss).unwrap();
        assert_grad_close(tape.grad(zn).unwrap(), &numeric, 1e-5);
    }

    #[test]
    fn spectral_penalty_gradient_on_diag() {
        // W = diag(3, 1): sigma_max(W^T W - I) = 8, subgradient 6 e1 e1^T
        // (non-degenerate top singular value).
        let w0 = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let f = |w: &Matrix| {
            let mut tape = Tape::new();
            let wn = tape.param(w.clone());
            let loss = tape.spectral_penalty(wn, 100).unwrap();
            tape.scalar(loss)
        };
        let numeric = finite_diff(&w0, f, 1e-6);
        let mut tape = Tape::new();
        let wn = tape.param(w0.clone());
        let loss = tape.spectral_penalty(wn, 100).unwrap();
        assert!((tape.scalar(loss) - 8.0).abs() < 1e-9);
        tape.backward(loss).unwrap();
        assert_grad_close(tape.grad(wn).unwrap(), &numeric, 1e-4);
    }

    #[test]
    fn spectral_penalty_gradient_random() {
        let w0 = random_matrix(4, 4, 15);
        let f = |w: &Matrix| {
            let mut tape = Tape::new();
            let wn = tape.param(w.clone());
            let loss = tape.spectral_penalty(wn, 200).unwrap();
            tape.scalar(loss)
        };
        let numeric = finite_diff(&w0, f, 1e-6);
        let mut tape = Tape::new();
        let wn = tape.param(w0.clone());
        let loss = tape.spectral_penalty(wn, 200).unwrap();
        tape.backward(loss).unwrap();
        assert_grad_close(tape.grad(wn).unwrap(), &numeric, 1e-4);
    }

    #[test]
    fn col_abs_sum_gradient_is_sign() {
        let z0 = random_matrix(3, 4, 16).map(|v| if v.abs() < 0.05 { v + 0.3 } else { v });
        let mut tape = Tape::new();
        let zn = tape.param(z0.clone());
        let loss = tape.col_abs_sum(zn, 2);
        tape.backward(loss).unwrap();
        let g = tape.grad(zn).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let expect = if j < 2 { 0.0 } else { z0.get(i, j).signum() };
                assert_eq!(g.get(i, j), expect);
            }
        }
    }
}
