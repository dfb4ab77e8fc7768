//! Exact brute-force k-nearest-neighbor graph.

use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

/// Per-sample k-nearest neighbors in Euclidean distance, rows sorted by
/// ascending distance with ties broken by lower index. No self-loops.
#[derive(Clone, Debug)]
pub struct NeighborGraph {
    pub k: usize,
    n: usize,
    indices: Vec<u32>,
    distances: Vec<f64>,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).contains(&(j as u32))
    }

    /// All `(i, j)` pairs with `j` among the first `k_use` neighbors of `i`.
    pub fn pairs(&self, k_use: usize) -> Vec<(u32, u32)> {
        assert!(k_use <= self.k);
        let mut out = Vec::with_capacity(self.n * k_use);
        for i in 0..self.n {
            for &j in &self.neighbors(i)[..k_use] {
                out.push((i as u32, j));
            }
        }
        out
    }

    /// Mean distance over all stored neighbor links.
    pub fn mean_distance(&self) -> f64 {
        if self.distances.is_empty() {
            return 0.0;
        }
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }
}

/// Brute-force exact kNN over the rows of `x`.
pub fn knn_graph(x: &Matrix, k: usize) -> Result<NeighborGraph> {
    let n = x.rows();
    if k >= n {
        return Err(InvMlError::KTooLarge { k, n });
    }
    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    let mut cand: Vec<(f64, u32)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        for j in 0..n {
            if j != i {
                cand.push((x.row_distance(i, j), j as u32));
            }
        }
        // Ascending distance, ties by lower index.
        cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(d, j) in cand.iter().take(k) {
            indices.push(j);
            distances.push(d);
        }
    }
    Ok(NeighborGraph { k, n, indices, distances })
}
