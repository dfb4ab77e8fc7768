//! Full-batch Adam training of the encoder under the scheduled loss, with
//! an optional neighborhood-block batch mode that never severs a point
//! from its k nearest neighbors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::{knn_graph, Dataset, NeighborGraph};
use crate::error::{InvMlError, Result};
use crate::losses::{default_push_radius, LossBreakdown, PairSet};
use crate::matrix::Matrix;
use crate::model::{total_loss, InvMLEncoder, LossFlags};
use crate::schedule::{eval_schedules, ScheduleConfig};

/// Batch regime. Full-batch is the default; the block mode groups each
/// point with its entire neighborhood so the pair losses stay intact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchMode {
    Full,
    NeighborhoodBlock { block_size: usize },
}

/// Adam accumulator shared across all parameters, in the fixed order
/// body layers, head, extra heads.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub moments: Vec<(Matrix, Matrix)>,
}

impl AdamState {
    pub fn new(shapes: &[(usize, usize)], lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            moments: shapes.iter().map(|&(r, c)| (Matrix::zeros(r, c), Matrix::zeros(r, c))).collect(),
        }
    }

    pub fn for_encoder(enc: &InvMLEncoder, lr: f64) -> Self {
        let mut shapes: Vec<(usize, usize)> = enc.body.iter().map(|w| w.shape()).collect();
        shapes.push(enc.head.shape());
        shapes.extend(enc.extra_heads.iter().map(|h| h.shape()));
        Self::new(&shapes, lr)
    }
}

/// One Adam update across all parameters: first/second moments with bias
/// correction, `theta -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(params: &mut [&mut Matrix], grads: &[&Matrix], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.moments.len() {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{} parameters", state.moments.len()),
            got: format!("{} params / {} grads", params.len(), grads.len()),
        });
    }
    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(state.moments.iter_mut()) {
        if p.shape() != g.shape() || p.shape() != m.shape() {
            return Err(InvMlError::ShapeMismatch {
                expected: format!("{:?}", p.shape()),
                got: format!("{:?}", g.shape()),
            });
        }
        for i in 0..p.data().len() {
            let gv = g.data()[i];
            let mv = state.beta1 * m.data()[i] + (1.0 - state.beta1) * gv;
            let vv = state.beta2 * v.data()[i] + (1.0 - state.beta2) * gv * gv;
            m.data_mut()[i] = mv;
            v.data_mut()[i] = vv;
            let m_hat = mv / bc1;
            let v_hat = vv / bc2;
            p.data_mut()[i] -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    /// Neighbor count for the input-space graph.
    pub k: usize,
    pub layer_count: usize,
    pub target_dim: usize,
    pub seed: u64,
    pub schedule: ScheduleConfig,
    pub flags: LossFlags,
    pub lr: f64,
    pub grad_clip: f64,
    pub batch: BatchMode,
    pub log_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 10,
            layer_count: 8,
            target_dim: 2,
            seed: 0,
            schedule: ScheduleConfig::default(),
            flags: LossFlags::default(),
            lr: 1e-3,
            grad_clip: 1e3,
            batch: BatchMode::Full,
            log_interval: 100,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HistoryRecord {
    pub epoch: usize,
    pub losses: LossBreakdown,
}

#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
}

impl TrainHistory {
    pub const CSV_HEADER: &'static str = "epoch,orth,pad,lis,push,extra,total";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let b = r.losses;
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                r.epoch, b.orth, b.pad, b.lis, b.push, b.extra, b.total
            ));
        }
        out
    }

    pub fn first(&self) -> Option<&HistoryRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }
}

/// Blocks of point indices that each contain every member's whole
/// neighborhood; built greedily in seeded order.
fn neighborhood_blocks(graph: &NeighborGraph, block_size: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb10c_b10c);
    order.shuffle(&mut rng);

    let mut assigned = vec![false; n];
    let mut blocks = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut in_current = vec![false; n];
    for &i in &order {
        if assigned[i] {
            continue;
        }
        // Seed the block with i and pull in its full neighborhood.
        let mut members = vec![i];
        members.extend(graph.neighbors(i).iter().map(|&j| j as usize));
        for &j in &members {
            if !in_current[j] {
                in_current[j] = true;
                current.push(j);
            }
            assigned[j] = true;
        }
        if current.len() >= block_size {
            current.sort_unstable();
            for &j in &current {
                in_current[j] = false;
            }
            blocks.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        current.sort_unstable();
        blocks.push(current);
    }
    blocks
}

/// Restriction of the global pair structure to one block, with indices
/// remapped to block-local row numbers.
fn block_pairs(graph: &NeighborGraph, block: &[usize], push_literal: bool) -> PairSet {
    let mut local = vec![usize::MAX; graph.len()];
    for (pos, &g) in block.iter().enumerate() {
        local[g] = pos;
    }
    let mut lis_pairs = Vec::new();
    let mut lis_targets = Vec::new();
    for (pos, &g) in block.iter().enumerate() {
        for (&j, &d) in graph.neighbors(g).iter().zip(graph.distances(g)) {
            let lj = local[j as usize];
            if lj != usize::MAX {
                lis_pairs.push((pos as u32, lj as u32));
                lis_targets.push(d);
            }
        }
    }
    let push_candidates = if push_literal {
        lis_pairs.clone()
    } else {
        let mut out = Vec::new();
        for (pi, &gi) in block.iter().enumerate() {
            let neighbors = graph.neighbors(gi);
            for (pj, &gj) in block.iter().enumerate() {
                if pi != pj && !neighbors.contains(&(gj as u32)) {
                    out.push((pi as u32, pj as u32));
                }
            }
        }
        out
    };
    PairSet {
        lis_pairs: std::rc::Rc::new(lis_pairs),
        lis_targets: std::rc::Rc::new(lis_targets),
        push_candidates: std::rc::Rc::new(push_candidates),
    }
}

/// Scales all gradients down to a global L2 norm of `clip` when exceeded.
fn clip_gradients(grads: &mut [Matrix], clip: f64) {
    let norm: f64 = grads.iter().map(|g| g.data().iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
    if norm > clip {
        let s = clip / norm;
        for g in grads.iter_mut() {
            *g = g.scale(s);
        }
    }
}

/// One gradient step on a batch; returns the loss breakdown.
fn step_batch(
    enc: &mut InvMLEncoder,
    x: &Matrix,
    pairs: &PairSet,
    snapshot: &crate::schedule::ScheduleSnapshot,
    config: &TrainConfig,
    adam: &mut AdamState,
    epoch: usize,
) -> Result<LossBreakdown> {
    let mut lg = total_loss(enc, x, pairs, snapshot, config.flags, config.schedule.lis_squared)?;
    if let Some(component) = lg.breakdown.is_finite() {
        return Err(InvMlError::NonFiniteLoss { epoch, component: component.into() });
    }
    let loss = lg.loss;
    lg.tape.backward(loss)?;

    let mut grads: Vec<Matrix> = Vec::with_capacity(adam.moments.len());
    for &node in &lg.body_nodes {
        grads.push(lg.tape.grad(node).cloned().unwrap_or_else(|| {
            Matrix::zeros(lg.tape.value(node).rows(), lg.tape.value(node).cols())
        }));
    }
    let head_grad = lg
        .tape
        .grad(lg.head_node)
        .cloned()
        .unwrap_or_else(|| Matrix::zeros(enc.head.rows(), enc.head.cols()));
    grads.push(head_grad);
    for (&node, h) in lg.extra_nodes.iter().zip(&enc.extra_heads) {
        grads.push(
            lg.tape.grad(node).cloned().unwrap_or_else(|| Matrix::zeros(h.rows(), h.cols())),
        );
    }
    if grads.iter().any(|g| !g.has_finite_entries()) {
        return Err(InvMlError::NonFiniteLoss { epoch, component: "gradient".into() });
    }
    clip_gradients(&mut grads, config.grad_clip);

    let mut params: Vec<&mut Matrix> = enc.body.iter_mut().collect();
    params.push(&mut enc.head);
    params.extend(enc.extra_heads.iter_mut());
    let grad_refs: Vec<&Matrix> = grads.iter().collect();
    adam_step(&mut params, &grad_refs, adam)?;
    Ok(lg.breakdown)
}

/// Trains the encoder in place and returns the recorded loss history.
/// Fully deterministic given the config and dataset.
pub fn train(enc: &mut InvMLEncoder, ds: &Dataset, config: &TrainConfig) -> Result<TrainHistory> {
    enc.check_input(&ds.x)?;
    let graph = knn_graph(&ds.x, config.k)?;
    let radius = config.schedule.push_radius.unwrap_or_else(|| default_push_radius(&graph));
    let mut adam = AdamState::for_encoder(enc, config.lr);
    let mut history = TrainHistory::default();

    let full_pairs = PairSet::from_graph(
        &graph,
        config.schedule.push_literal,
        config.schedule.push_subsample,
        config.seed,
    );
    let blocks: Option<Vec<Vec<usize>>> = match config.batch {
        BatchMode::Full => None,
        BatchMode::NeighborhoodBlock { block_size } => {
            Some(neighborhood_blocks(&graph, block_size, config.seed))
        }
    };
    let block_pair_sets: Option<Vec<PairSet>> = blocks.as_ref().map(|bs| {
        bs.iter().map(|b| block_pairs(&graph, b, config.schedule.push_literal)).collect()
    });

    let total = config.schedule.epochs_total;
    for epoch in 0..total {
        let snapshot = eval_schedules(
            epoch,
            &config.schedule,
            enc.input_dim,
            enc.target_dim,
            enc.layer_count,
            radius,
        );
        let breakdown = match (&blocks, &block_pair_sets) {
            (Some(bs), Some(ps)) => {
                let mut agg = LossBreakdown::default();
                for (block, pairs) in bs.iter().zip(ps) {
                    let xb = ds.x.select_rows(block);
                    let b = step_batch(enc, &xb, pairs, &snapshot, config, &mut adam, epoch)?;
                    agg.orth += b.orth;
                    agg.pad += b.pad;
                    agg.lis += b.lis;
                    agg.push += b.push;
                    agg.extra += b.extra;
                    agg.total += b.total;
                }
                agg
            }
            _ => step_batch(enc, &ds.x, &full_pairs, &snapshot, config, &mut adam, epoch)?,
        };
        if epoch % config.log_interval.max(1) == 0 || epoch + 1 == total {
            history.records.push(HistoryRecord { epoch, losses: breakdown });
            log::info!(
                "epoch {epoch}: total {:.4e} (lis {:.4e}, push {:.4e}, orth {:.4e}, pad {:.4e}, extra {:.4e})",
                breakdown.total, breakdown.lis, breakdown.push, breakdown.orth, breakdown.pad, breakdown.extra
            );
        }
    }
    Ok(history)
}
