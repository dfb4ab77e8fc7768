//! The five training loss terms: orthogonality, padding, local isometry,
//! push-away, and the per-layer extra-head combination.

use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autograd::{NodeId, Tape};
use crate::datasets::NeighborGraph;
use crate::error::Result;
use crate::schedule::ScheduleSnapshot;

/// Power-iteration depth for the differentiable spectral-norm penalty.
pub const TRAIN_SPECTRAL_ITERS: usize = 5;

/// Individually reported loss components; `total` is their weighted sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossBreakdown {
    pub orth: f64,
    pub pad: f64,
    pub lis: f64,
    pub push: f64,
    pub extra: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> Option<&'static str> {
        for (name, v) in [
            ("orth", self.orth),
            ("pad", self.pad),
            ("lis", self.lis),
            ("push", self.push),
            ("extra", self.extra),
            ("total", self.total),
        ] {
            if !v.is_finite() {
                return Some(name);
            }
        }
        None
    }
}

/// Fixed pair structure shared across epochs: LIS pairs with their
/// input-space target distances, and push-away candidate pairs.
#[derive(Clone, Debug)]
pub struct PairSet {
    pub lis_pairs: Rc<Vec<(u32, u32)>>,
    pub lis_targets: Rc<Vec<f64>>,
    pub push_candidates: Rc<Vec<(u32, u32)>>,
}

impl PairSet {
    /// Builds the pair structure from the input-space neighbor graph.
    ///
    /// Push candidates are the non-neighbor pairs (the prose reading of the
    /// repulsion term); `push_literal` switches to the neighbor pairs
    /// themselves. `push_subsample` caps candidates per point with a seeded
    /// draw so full-batch epochs stay affordable at larger n.
    pub fn from_graph(
        graph: &NeighborGraph,
        push_literal: bool,
        push_subsample: Option<usize>,
        seed: u64,
    ) -> Self {
        let n = graph.len();
        let lis_pairs = graph.pairs(graph.k);
        let lis_targets: Vec<f64> =
            (0..n).flat_map(|i| graph.distances(i).iter().copied()).collect();

        let push_candidates = if push_literal {
            lis_pairs.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
            let mut out = Vec::new();
            for i in 0..n {
                let neighbors = graph.neighbors(i);
                let mut others: Vec<u32> = (0..n as u32)
                    .filter(|&j| j != i as u32 && !neighbors.contains(&j))
                    .collect();
                if let Some(cap) = push_subsample {
                    if others.len() > cap {
                        others.shuffle(&mut rng);
                        others.truncate(cap);
                        others.sort_unstable();
                    }
                }
                out.extend(others.into_iter().map(|j| (i as u32, j)));
            }
            out
        };

        Self {
            lis_pairs: Rc::new(lis_pairs),
            lis_targets: Rc::new(lis_targets),
            push_candidates: Rc::new(push_candidates),
        }
    }
}

/// `sum_l alpha_l * sigma_max(W_l^T W_l - I)`, differentiable through the
/// detached-vector rule. `alphas` may be a single weight reused per layer.
pub fn loss_orth(tape: &mut Tape, weights: &[NodeId], alphas: &[f64]) -> Result<NodeId> {
    assert!(!weights.is_empty());
    let mut total: Option<NodeId> = None;
    for (idx, &w) in weights.iter().enumerate() {
        let alpha = alphas[idx.min(alphas.len() - 1)];
        let penalty = tape.spectral_penalty(w, TRAIN_SPECTRAL_ITERS)?;
        let weighted = tape.scale(penalty, alpha);
        total = Some(match total {
            Some(t) => tape.add(t, weighted),
            None => weighted,
        });
    }
    Ok(total.unwrap())
}

/// `sum_l beta_l * sum_{i > s_l} |z_i^{(l+1)}|` over the padded layers.
/// `activations` holds `z^{(l+1)}` for `l = 2..=L-1` in order.
pub fn loss_pad(tape: &mut Tape, activations: &[NodeId], schedule: &ScheduleSnapshot) -> NodeId {
    assert_eq!(activations.len(), schedule.s_l.len());
    let mut total: Option<NodeId> = None;
    for ((&z, &s_l), &beta) in activations.iter().zip(&schedule.s_l).zip(&schedule.beta) {
        let mass = tape.col_abs_sum(z, s_l);
        let weighted = tape.scale(mass, beta);
        total = Some(match total {
            Some(t) => tape.add(t, weighted),
            None => weighted,
        });
    }
    total.expect("at least one padded layer")
}

/// Local isometry loss: `sum_{(i, j in N_i)} |d_X(i,j) - d_Z(i,j)|`
/// (or the squared variant).
pub fn loss_lis(tape: &mut Tape, z: NodeId, pairs: &PairSet, squared: bool) -> NodeId {
    tape.pair_dist_loss(z, Rc::clone(&pairs.lis_pairs), Rc::clone(&pairs.lis_targets), squared)
}

/// Push-away loss over the candidate pairs currently closer than `radius`.
pub fn loss_push(tape: &mut Tape, z: NodeId, pairs: &PairSet, radius: f64) -> NodeId {
    tape.push_loss(z, &pairs.push_candidates, radius)
}

/// Extra-head loss: `sum_l gamma_l * (L_LIS(head_l) + mu_l * L_push(head_l))`.
pub fn loss_extra(
    tape: &mut Tape,
    head_outputs: &[NodeId],
    pairs: &PairSet,
    schedule: &ScheduleSnapshot,
    squared: bool,
) -> NodeId {
    assert_eq!(head_outputs.len(), schedule.gamma.len());
    let mut total: Option<NodeId> = None;
    for ((&h, &gamma), &mu) in head_outputs.iter().zip(&schedule.gamma).zip(&schedule.mu) {
        let lis = loss_lis(tape, h, pairs, squared);
        let push = loss_push(tape, h, pairs, schedule.push_radius);
        let push_w = tape.scale(push, mu);
        let combined = tape.add(lis, push_w);
        let weighted = tape.scale(combined, gamma);
        total = Some(match total {
            Some(t) => tape.add(t, weighted),
            None => weighted,
        });
    }
    total.expect("at least one extra head")
}

/// Default push radius: 3x the mean kNN distance of the input graph.
pub fn default_push_radius(graph: &NeighborGraph) -> f64 {
    3.0 * graph.mean_distance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::knn_graph;
    use crate::linalg::{gaussian, jacobi_svd, random_orthogonal};
    use crate::matrix::Matrix;
    use crate::schedule::{eval_schedules, ScheduleConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, m: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(n, m, |_, _| gaussian(&mut rng))
    }

    fn pair_set(x: &Matrix, k: usize) -> PairSet {
        let graph = knn_graph(x, k).unwrap();
        PairSet::from_graph(&graph, false, None, 0)
    }

    #[test]
    fn orth_zero_for_identity_weights() {
        let mut tape = Tape::new();
        let ws: Vec<_> = (0..3).map(|_| tape.param(Matrix::identity(4))).collect();
        let loss = loss_orth(&mut tape, &ws, &[1.0]).unwrap();
        assert!(tape.scalar(loss).abs() < 1e-12);
    }

    #[test]
    fn orth_diagonal_closed_form() {
        // W = diag(2,1): sigma_max(W^T W - I) = 3.
        let mut tape = Tape::new();
        let w = tape.param(Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let loss = loss_orth(&mut tape, &[w], &[1.0]).unwrap();
        assert!((tape.scalar(loss) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn orth_matches_full_svd_oracle() {
        let w = random_matrix(5, 5, 31);
        let m = w.matmul_tn(&w).sub(&Matrix::identity(5));
        let oracle = jacobi_svd(&m).singular_values[0];
        let mut tape = Tape::new();
        let wn = tape.param(w);
        let penalty = tape.spectral_penalty(wn, 500).unwrap();
        assert!((tape.scalar(penalty) - oracle).abs() < 1e-8);
    }

    #[test]
    fn orth_zero_iff_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_orthogonal(5, &mut rng);
        let mut tape = Tape::new();
        let wn = tape.param(q);
        let loss = loss_orth(&mut tape, &[wn], &[1.0]).unwrap();
        assert!(tape.scalar(loss) < 1e-10);
        // And nonzero for a clearly non-orthogonal matrix.
        let mut tape = Tape::new();
        let wn = tape.param(Matrix::identity(5).scale(1.5));
        let loss = loss_orth(&mut tape, &[wn], &[1.0]).unwrap();
        assert!(tape.scalar(loss) > 1.0);
    }

    fn snapshot_for(m: usize, s: usize, layers: usize) -> ScheduleSnapshot {
        let config = ScheduleConfig { epochs_total: 100, ..Default::default() };
        eval_schedules(50, &config, m, s, layers, 1.0)
    }

    #[test]
    fn pad_zero_when_padded_coords_zero() {
        let mut tape = Tape::new();
        let mut sched = snapshot_for(4, 2, 4);
        sched.s_l = vec![2, 2];
        sched.beta = vec![1.0, 1.0];
        let z1 = tape.param(Matrix::from_rows(&[vec![1.0, 2.0, 0.0, 0.0]]).unwrap());
        let z2 = tape.param(Matrix::from_rows(&[vec![-3.0, 1.0, 0.0, 0.0]]).unwrap());
        let loss = loss_pad(&mut tape, &[z1, z2], &sched);
        assert_eq!(tape.scalar(loss), 0.0);
    }

    #[test]
    fn pad_l1_closed_form() {
        let mut tape = Tape::new();
        let mut sched = snapshot_for(4, 2, 3);
        sched.s_l = vec![2];
        sched.beta = vec![1.0];
        let z = tape.param(Matrix::from_rows(&[vec![9.0, 9.0, 0.5, -0.5]]).unwrap());
        let loss = loss_pad(&mut tape, &[z], &sched);
        assert_eq!(tape.scalar(loss), 1.0);
    }

    #[test]
    fn pad_gradient_is_signed_beta() {
        let mut tape = Tape::new();
        let mut sched = snapshot_for(4, 2, 3);
        sched.s_l = vec![2];
        sched.beta = vec![0.7];
        let z = tape.param(Matrix::from_rows(&[vec![9.0, 9.0, 0.5, -0.5]]).unwrap());
        let loss = loss_pad(&mut tape, &[z], &sched);
        tape.backward(loss).unwrap();
        let g = tape.grad(z).unwrap();
        assert_eq!(g.row(0), &[0.0, 0.0, 0.7, -0.7]);
    }

    #[test]
    fn lis_zero_for_identity_embedding() {
        let x = random_matrix(12, 3, 41);
        let pairs = pair_set(&x, 3);
        let mut tape = Tape::new();
        let z = tape.param(x.clone());
        let loss = loss_lis(&mut tape, z, &pairs, false);
        assert!(tape.scalar(loss) < 1e-12);
    }

    #[test]
    fn lis_invariant_under_rotation_and_translation() {
        let x = random_matrix(15, 4, 43);
        let pairs = pair_set(&x, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let q = random_orthogonal(4, &mut rng);
        let shifted = x.matmul(&q).map(|v| v + 2.5);
        let mut tape = Tape::new();
        let z = tape.param(shifted);
        let loss = loss_lis(&mut tape, z, &pairs, false);
        assert!(tape.scalar(loss) < 1e-9, "loss {}", tape.scalar(loss));
    }

    #[test]
    fn lis_scaling_matches_hand_oracle() {
        // z = 2x on 3 collinear points with k = 1: loss is the sum of each
        // point's nearest-neighbor distance.
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let graph = knn_graph(&x, 1).unwrap();
        let pairs = PairSet::from_graph(&graph, false, None, 0);
        let mut tape = Tape::new();
        let z = tape.param(x.scale(2.0));
        let loss = loss_lis(&mut tape, z, &pairs, false);
        // Hand enumeration: |1-2| + |1-2| + |2-4| = 4.
        assert!((tape.scalar(loss) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn push_zero_when_all_candidates_far() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]).unwrap();
        let graph = knn_graph(&x, 1).unwrap();
        let pairs = PairSet::from_graph(&graph, false, None, 0);
        let mut tape = Tape::new();
        let z = tape.param(x.clone());
        let loss = loss_push(&mut tape, z, &pairs, 1.0);
        assert_eq!(tape.scalar(loss), 0.0);
    }

    #[test]
    fn push_closed_form_at_half_radius() {
        // Two 2-point clusters 0.5 apart, k=1 keeps the intra-cluster pair
        // as a neighbor; the 8 ordered cross pairs are candidates, 4 of
        // them at distance 0.5 < B contribute -log(1.5) each... distances:
        // cross distances are 0.5, 0.6, 0.4, 0.5 etc. Use exact geometry.
        let x = Matrix::from_rows(&[vec![0.0], vec![0.01], vec![0.5], vec![0.51]]).unwrap();
        let graph = knn_graph(&x, 1).unwrap();
        let pairs = PairSet::from_graph(&graph, false, None, 0);
        let mut tape = Tape::new();
        let z = tape.param(x.clone());
        let loss = loss_push(&mut tape, z, &pairs, 1.0);
        // Oracle: enumerate candidate pairs directly.
        let mut expect = 0.0;
        for &(i, j) in pairs.push_candidates.iter() {
            let d = x.row_distance(i as usize, j as usize);
            if d < 1.0 {
                expect -= (1.0 + d).ln();
            }
        }
        assert!((tape.scalar(loss) - expect).abs() < 1e-12);
    }

    #[test]
    fn push_matches_pair_enumeration_oracle() {
        let x = random_matrix(20, 3, 47);
        let graph = knn_graph(&x, 4).unwrap();
        let pairs = PairSet::from_graph(&graph, false, None, 0);
        let radius = 2.0;
        let mut tape = Tape::new();
        let z = tape.param(x.clone());
        let loss = loss_push(&mut tape, z, &pairs, radius);
        let mut expect = 0.0;
        for i in 0..20u32 {
            for j in 0..20u32 {
                if i == j || graph.neighbors(i as usize).contains(&j) {
                    continue;
                }
                let d = x.row_distance(i as usize, j as usize);
                if d < radius {
                    expect -= (1.0 + d).ln();
                }
            }
        }
        assert!((tape.scalar(loss) - expect).abs() < 1e-10);
    }

    #[test]
    fn push_lower_bound() {
        // L_push >= -(candidate count) * log(1 + B).
        let x = random_matrix(10, 2, 53);
        let graph = knn_graph(&x, 2).unwrap();
        let pairs = PairSet::from_graph(&graph, false, None, 0);
        let radius = 1.5;
        let mut tape = Tape::new();
        let z = tape.param(x.clone());
        let loss = loss_push(&mut tape, z, &pairs, radius);
        let bound = -(pairs.push_candidates.len() as f64) * (1.0 + radius).ln();
        assert!(tape.scalar(loss) >= bound);
    }

    #[test]
    fn extra_zero_when_gamma_zero() {
        let x = random_matrix(10, 3, 59);
        let pairs = pair_set(&x, 3);
        let mut sched = snapshot_for(3, 2, 4);
        sched.gamma = vec![0.0, 0.0];
        sched.mu = vec![0.5, 0.5];
        sched.push_radius = 1.0;
        let mut tape = Tape::new();
        let h1 = tape.param(random_matrix(10, 2, 60));
        let h2 = tape.param(random_matrix(10, 2, 61));
        let loss = loss_extra(&mut tape, &[h1, h2], &pairs, &sched, false);
        assert_eq!(tape.scalar(loss), 0.0);
    }

    #[test]
    fn extra_single_layer_mu_zero_reduces_to_lis() {
        let x = random_matrix(10, 3, 62);
        let pairs = pair_set(&x, 3);
        let mut sched = snapshot_for(3, 2, 3);
        sched.gamma = vec![1.0];
        sched.mu = vec![0.0];
        sched.push_radius = 1.0;
        let h = random_matrix(10, 2, 63);
        let mut tape = Tape::new();
        let hn = tape.param(h.clone());
        let loss = loss_extra(&mut tape, &[hn], &pairs, &sched, false);
        let mut tape2 = Tape::new();
        let hn2 = tape2.param(h);
        let lis = loss_lis(&mut tape2, hn2, &pairs, false);
        assert!((tape.scalar(loss) - tape2.scalar(lis)).abs() < 1e-12);
    }

    #[test]
    fn extra_two_layers_matches_component_sum() {
        let x = random_matrix(10, 3, 64);
        let pairs = pair_set(&x, 3);
        let mut sched = snapshot_for(3, 2, 4);
        sched.gamma = vec![0.3, 0.6];
        sched.mu = vec![0.2, 0.9];
        sched.push_radius = 1.5;
        let h1 = random_matrix(10, 2, 65);
        let h2 = random_matrix(10, 2, 66);
        let mut tape = Tape::new();
        let n1 = tape.param(h1.clone());
        let n2 = tape.param(h2.clone());
        let loss = loss_extra(&mut tape, &[n1, n2], &pairs, &sched, false);
        let mut expect = 0.0;
        for (h, gamma, mu) in [(h1, 0.3, 0.2), (h2, 0.6, 0.9)] {
            let mut t = Tape::new();
            let hn = t.param(h);
            let l = loss_lis(&mut t, hn, &pairs, false);
            let p = loss_push(&mut t, hn, &pairs, 1.5);
            expect += gamma * (t.scalar(l) + mu * t.scalar(p));
        }
        assert!((tape.scalar(loss) - expect).abs() < 1e-10);
    }

    #[test]
    fn push_subsample_is_deterministic_and_capped() {
        let x = random_matrix(30, 2, 67);
        let graph = knn_graph(&x, 3).unwrap();
        let a = PairSet::from_graph(&graph, false, Some(5), 7);
        let b = PairSet::from_graph(&graph, false, Some(5), 7);
        assert_eq!(a.push_candidates, b.push_candidates);
        assert!(a.push_candidates.len() <= 30 * 5);
    }
}
