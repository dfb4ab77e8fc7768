//! Latent-space interpolation experiments: neighbor interpolation compared
//! against input-space linear mixing, the per-k MSE curve, and piecewise
//! geodesic interpolation between distant pairs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::{knn_graph, NeighborGraph};
use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;
use crate::model::InvMLEncoder;

/// Default interpolation grid resolution.
pub const DEFAULT_T_STEPS: usize = 13;
/// Maximum closeness rank allowed between consecutive geodesic waypoints.
pub const WAYPOINT_MAX_RANK: usize = 20;
/// Minimum mutual closeness rank for a pair to count as distant.
pub const DISTANT_PAIR_MIN_RANK: usize = 45;

/// One interpolated pair: the latent-path reconstructions, the input-space
/// linear mixes, and their per-step mean squared gap.
#[derive(Clone, Debug)]
pub struct InterpolationResult {
    pub pair: (usize, usize),
    pub t_grid: Vec<f64>,
    /// Reconstructions of `t z_i + (1-t) z_j` through the inverse body.
    pub latent_recons: Matrix,
    /// `t x_i + (1-t) x_j` rows for the same grid.
    pub input_interps: Matrix,
    pub mse_per_t: Vec<f64>,
}

fn uniform_grid(steps: usize) -> Vec<f64> {
    assert!(steps >= 2);
    (0..steps).map(|s| s as f64 / (steps - 1) as f64).collect()
}

fn lerp_rows(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // t = 1 lands on `a`, matching the latent mix t z_i + (1-t) z_j.
    a.iter().zip(b).map(|(&x, &y)| t * x + (1.0 - t) * y).collect()
}

fn row_mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

fn interpolate_pair(
    enc: &InvMLEncoder,
    x: &Matrix,
    z_last: &Matrix,
    i: usize,
    j: usize,
    t_grid: &[f64],
) -> Result<InterpolationResult> {
    let mut latent_mix = Matrix::zeros(t_grid.len(), enc.input_dim);
    let mut input_interps = Matrix::zeros(t_grid.len(), enc.input_dim);
    for (s, &t) in t_grid.iter().enumerate() {
        latent_mix.row_mut(s).copy_from_slice(&lerp_rows(z_last.row(i), z_last.row(j), t));
        input_interps.row_mut(s).copy_from_slice(&lerp_rows(x.row(i), x.row(j), t));
    }
    let latent_recons = enc.inverse_body(&latent_mix)?;
    let mse_per_t = (0..t_grid.len())
        .map(|s| row_mse(latent_recons.row(s), input_interps.row(s)))
        .collect();
    Ok(InterpolationResult {
        pair: (i, j),
        t_grid: t_grid.to_vec(),
        latent_recons,
        input_interps,
        mse_per_t,
    })
}

/// For each sample, picks random partners inside its k-nearest
/// neighborhood and interpolates the pair in the final full-dimensional
/// representation, reporting the gap to input-space linear mixing.
pub fn knn_interpolate(
    enc: &InvMLEncoder,
    x: &Matrix,
    graph: &NeighborGraph,
    k: usize,
    pairs_per_sample: usize,
    t_steps: usize,
    seed: u64,
) -> Result<Vec<InterpolationResult>> {
    if k == 0 || k > graph.k {
        return Err(InvMlError::KTooLarge { k, n: graph.k });
    }
    let trace = enc.forward(x)?;
    let z_last = trace.z_last();
    let t_grid = uniform_grid(t_steps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1217_e290);
    let mut out = Vec::new();
    for i in 0..x.rows() {
        for _ in 0..pairs_per_sample {
            let j = graph.neighbors(i)[rng.gen_range(0..k)] as usize;
            out.push(interpolate_pair(enc, x, z_last, i, j, &t_grid)?);
        }
    }
    Ok(out)
}

/// Mean interpolation MSE (over pairs and grid steps) for each
/// neighborhood size `k = 1..=k_max`.
pub fn interpolation_mse_curve(
    enc: &InvMLEncoder,
    x: &Matrix,
    graph: &NeighborGraph,
    k_max: usize,
    t_steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut curve = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let results = knn_interpolate(enc, x, graph, k, 1, t_steps, seed)?;
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in &results {
            sum += r.mse_per_t.iter().sum::<f64>();
            count += r.mse_per_t.len();
        }
        curve.push(sum / count as f64);
    }
    Ok(curve)
}

/// Closeness rank of `j` seen from `i`: 1 for the nearest point, ties
/// broken by lower index.
pub fn closeness_rank(m: &Matrix, i: usize, j: usize) -> usize {
    let dij = m.row_distance(i, j);
    let mut r = 1;
    for l in 0..m.rows() {
        if l == i || l == j {
            continue;
        }
        let dil = m.row_distance(i, l);
        if dil < dij || (dil == dij && l < j) {
            r += 1;
        }
    }
    r
}

/// Whether the pair is mutually distant (both closeness ranks at least
/// `DISTANT_PAIR_MIN_RANK`), the selection rule for geodesic pairs.
pub fn is_distant_pair(x: &Matrix, i: usize, j: usize) -> bool {
    closeness_rank(x, i, j) >= DISTANT_PAIR_MIN_RANK
        && closeness_rank(x, j, i) >= DISTANT_PAIR_MIN_RANK
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, deterministic tie-break on node index.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap()
            .then_with(|| other.node.cmp(&self.node))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra shortest path on the symmetrized neighbor graph with
/// Euclidean edge weights measured in `space`.
fn shortest_path(
    graph: &NeighborGraph,
    space: &Matrix,
    from: usize,
    to: usize,
) -> Result<Vec<usize>> {
    let n = graph.len();
    // Symmetrize: an edge exists if either endpoint lists the other.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in graph.neighbors(i) {
            adjacency[i].push(j as usize);
            adjacency[j as usize].push(i);
        }
    }
    for adj in adjacency.iter_mut() {
        adj.sort_unstable();
        adj.dedup();
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: from });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node == to {
            break;
        }
        for &next in &adjacency[node] {
            let nd = d + space.row_distance(node, next);
            if nd < dist[next] {
                dist[next] = nd;
                prev[next] = node;
                heap.push(HeapEntry { dist: nd, node: next });
            }
        }
    }
    if !dist[to].is_finite() {
        return Err(InvMlError::DisconnectedPair { i: from, j: to });
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Ok(path)
}

/// Evenly resamples `path` (by hop count) down to `n_waypoints` nodes,
/// keeping both endpoints.
fn resample_path(path: &[usize], n_waypoints: usize) -> Vec<usize> {
    if path.len() <= n_waypoints {
        return path.to_vec();
    }
    let mut out = Vec::with_capacity(n_waypoints);
    for s in 0..n_waypoints {
        let pos = (s as f64 / (n_waypoints - 1) as f64 * (path.len() - 1) as f64).round() as usize;
        out.push(path[pos]);
    }
    out.dedup();
    out
}

/// Piecewise interpolation along the latent-space geodesic between a
/// distant pair: Dijkstra on the latent neighbor graph, waypoints within
/// closeness rank `WAYPOINT_MAX_RANK` of their predecessor, one linear
/// latent segment per consecutive waypoint pair.
pub fn geodesic_interpolate(
    enc: &InvMLEncoder,
    x: &Matrix,
    graph: &NeighborGraph,
    pair: (usize, usize),
    segments: usize,
    t_steps: usize,
) -> Result<InterpolationResult> {
    let (i, j) = pair;
    let trace = enc.forward(x)?;
    let z_last = trace.z_last().clone();
    let latent_graph = knn_graph(&z_last, graph.k)?;
    let path = shortest_path(&latent_graph, &z_last, i, j)?;

    // Prefer `segments + 1` waypoints; fall back to the full path when the
    // coarse sampling violates the rank bound.
    let mut waypoints = resample_path(&path, segments + 1);
    let rank_ok = |ws: &[usize]| {
        ws.windows(2).all(|w| closeness_rank(&z_last, w[0], w[1]) <= WAYPOINT_MAX_RANK)
    };
    if !rank_ok(&waypoints) {
        waypoints = path.clone();
        if !rank_ok(&waypoints) {
            return Err(InvMlError::NoValidWaypoints { i, j });
        }
    }

    // One grid segment per waypoint pair; global t runs from the start
    // point (t = 0 at waypoint[0]) to the end.
    let seg_grid = uniform_grid(t_steps);
    let n_segs = waypoints.len() - 1;
    let mut rows_latent: Vec<Vec<f64>> = Vec::new();
    let mut rows_input: Vec<Vec<f64>> = Vec::new();
    let mut t_grid = Vec::new();
    for (s, w) in waypoints.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        for (step, &t) in seg_grid.iter().enumerate() {
            if s > 0 && step == 0 {
                continue; // shared waypoint already emitted
            }
            // Local t runs a -> b; store as the latent mix with weight on b.
            rows_latent.push(lerp_rows(z_last.row(b), z_last.row(a), t));
            rows_input.push(lerp_rows(x.row(b), x.row(a), t));
            t_grid.push((s as f64 + t) / n_segs as f64);
        }
    }
    let latent_mix = Matrix::from_rows(&rows_latent)?;
    let input_interps = Matrix::from_rows(&rows_input)?;
    let latent_recons = enc.inverse_body(&latent_mix)?;
    let mse_per_t = (0..t_grid.len())
        .map(|s| row_mse(latent_recons.row(s), input_interps.row(s)))
        .collect();
    Ok(InterpolationResult { pair, t_grid, latent_recons, input_interps, mse_per_t })
}
