//! Embedding-quality metric suite: reconstruction errors, rank-based
//! neighborhood preservation, local bi-Lipschitz bounds, pairwise distance
//! disturbance, cross-validated classifier accuracies, and representation
//! rank.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::NeighborGraph;
use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

/// Row cap for the subsampled distance-disturbance metric.
pub const LATENT_MSE_SAMPLE_CAP: usize = 2000;

/// The full evaluation row. Classifier accuracies are `NaN` when the
/// dataset carries no labels.
#[derive(Clone, Copy, Debug)]
pub struct MetricsReport {
    pub rmse: f64,
    pub mne: f64,
    pub trust: f64,
    pub cont: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub l_mse: f64,
    pub acc_logistic: f64,
    pub acc_knn: f64,
    pub rank_sparsity: usize,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "rmse,mne,trust,cont,k_min,k_max,l_mse,acc_logistic,acc_knn,rank_sparsity";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            self.rmse,
            self.mne,
            self.trust,
            self.cont,
            self.k_min,
            self.k_max,
            self.l_mse,
            self.acc_logistic,
            self.acc_knn,
            self.rank_sparsity
        )
    }
}

/// Root mean square reconstruction error with the doubly-normalized form
/// `(sum_i ||x_i - x_hat_i||^2 / N^2)^{1/2}`.
pub fn rmse(x: &Matrix, x_hat: &Matrix) -> Result<f64> {
    if x.shape() != x_hat.shape() {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{:?}", x.shape()),
            got: format!("{:?}", x_hat.shape()),
        });
    }
    let n = x.rows() as f64;
    let ss: f64 = x.data().iter().zip(x_hat.data()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / (n * n)).sqrt())
}

/// Maximum norm error: the largest per-layer round-trip error.
pub fn mne(layer_roundtrip_errors: &[f64]) -> f64 {
    layer_roundtrip_errors.iter().copied().fold(0.0, f64::max)
}

fn check_k_range(k1: usize, k2: usize, n: usize) -> Result<()> {
    // Normalizer 2 / (n k (2n - 3k - 1)) must stay positive.
    if k1 < 2 || k2 < k1 || 3 * k2 + 1 >= 2 * n {
        return Err(InvMlError::KRangeInvalid { k1, k2, n });
    }
    Ok(())
}

/// Indices `!= i` sorted by distance to row `i`, nearest first; ties broken
/// by lower index.
fn closeness_order(m: &Matrix, i: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m.rows()).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| {
        m.row_distance(i, a).partial_cmp(&m.row_distance(i, b)).unwrap().then(a.cmp(&b))
    });
    order
}

/// Shared kernel: rank-based penalty for points that enter the `b`-space
/// neighborhood without being `a`-space neighbors, ranked in `a`-space.
fn neighborhood_score(a: &Matrix, b: &Matrix, k1: usize, k2: usize) -> Result<f64> {
    let n = a.rows();
    if b.rows() != n {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{n} rows"),
            got: format!("{} rows", b.rows()),
        });
    }
    check_k_range(k1, k2, n)?;
    let mut penalties = vec![0.0f64; k2 - k1 + 1];
    let mut rank_a = vec![0usize; n];
    for i in 0..n {
        let order_a = closeness_order(a, i);
        let order_b = closeness_order(b, i);
        for (pos, &j) in order_a.iter().enumerate() {
            rank_a[j] = pos + 1;
        }
        for (ki, k) in (k1..=k2).enumerate() {
            for &j in &order_b[..k] {
                if rank_a[j] > k {
                    penalties[ki] += (rank_a[j] - k) as f64;
                }
            }
        }
    }
    let mut total = 0.0;
    for (ki, k) in (k1..=k2).enumerate() {
        let norm = 2.0 / (n as f64 * k as f64 * (2 * n - 3 * k - 1) as f64);
        total += 1.0 - norm * penalties[ki];
    }
    Ok(total / (k2 - k1 + 1) as f64)
}

/// How trustworthy embedding neighborhoods are: penalizes points that are
/// close in `z` but far (by rank) in `x`, averaged over `k in [k1, k2]`.
pub fn trustworthiness(x: &Matrix, z: &Matrix, k1: usize, k2: usize) -> Result<f64> {
    neighborhood_score(x, z, k1, k2)
}

/// The mirror image of trustworthiness: penalizes input-space neighbors
/// that the embedding pushes far away.
pub fn continuity(x: &Matrix, z: &Matrix, k1: usize, k2: usize) -> Result<f64> {
    neighborhood_score(z, x, k1, k2)
}

/// Local bi-Lipschitz bounds over the input-space neighbor graph:
/// `K_{i,j} = max(d_z/d_x, d_x/d_z)`, reduced per point by `max_j`, then
/// `(min_i, max_i)`. Zero-distance pairs are skipped (and logged).
pub fn bi_lipschitz(x: &Matrix, z: &Matrix, graph: &NeighborGraph) -> Result<(f64, f64)> {
    if x.rows() != z.rows() || x.rows() != graph.len() {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{} rows in both spaces and graph", x.rows()),
            got: format!("{} / {}", z.rows(), graph.len()),
        });
    }
    let mut k_min = f64::INFINITY;
    let mut k_max: f64 = 0.0;
    let mut skipped = 0usize;
    for i in 0..x.rows() {
        let mut point_max: f64 = 0.0;
        let mut seen = false;
        for &j in graph.neighbors(i) {
            let dx = x.row_distance(i, j as usize);
            let dz = z.row_distance(i, j as usize);
            if dx == 0.0 || dz == 0.0 {
                skipped += 1;
                continue;
            }
            point_max = point_max.max((dz / dx).max(dx / dz));
            seen = true;
        }
        if seen {
            k_min = k_min.min(point_max);
            k_max = k_max.max(point_max);
        }
    }
    if skipped > 0 {
        log::warn!("bi-Lipschitz: skipped {skipped} zero-distance pairs");
    }
    if !k_min.is_finite() {
        return Err(InvMlError::InvalidArgument(
            "all neighbor pairs have zero distance".into(),
        ));
    }
    Ok((k_min, k_max))
}

/// Pairwise distance disturbance `(sum_{i,j} |d_X - d_Z| / N^2)^{1/2}` over
/// ordered pairs, with a seeded row subsample above the cap.
pub fn latent_mse(x: &Matrix, z: &Matrix, seed: u64) -> Result<f64> {
    if x.rows() != z.rows() {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{} rows", x.rows()),
            got: format!("{} rows", z.rows()),
        });
    }
    let n = x.rows();
    let rows: Vec<usize> = if n > LATENT_MSE_SAMPLE_CAP {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a7e_57a7);
        idx.shuffle(&mut rng);
        idx.truncate(LATENT_MSE_SAMPLE_CAP);
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    let m = rows.len() as f64;
    let mut sum = 0.0;
    for &i in &rows {
        for &j in &rows {
            sum += (x.row_distance(i, j) - z.row_distance(i, j)).abs();
        }
    }
    Ok((sum / (m * m)).sqrt())
}

/// Stratified 10-fold assignment: within each class the (seeded-shuffled)
/// samples are dealt round-robin, so every fold sees every class when each
/// class has at least 10 members.
fn stratified_folds(labels: &[usize], seed: u64) -> Vec<usize> {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf01d_f01d);
    let mut fold = vec![0usize; labels.len()];
    let mut next = 0usize;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next % 10;
            next += 1;
        }
    }
    fold
}

fn check_classification_input(z: &Matrix, labels: &[usize]) -> Result<usize> {
    if z.rows() != labels.len() {
        return Err(InvMlError::ShapeMismatch {
            expected: format!("{} labels", z.rows()),
            got: format!("{}", labels.len()),
        });
    }
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n_classes < 2 {
        return Err(InvMlError::DegenerateFold { fold: 0, reason: "fewer than 2 classes".into() });
    }
    for c in 0..n_classes {
        let count = labels.iter().filter(|&&l| l == c).count();
        if count < 10 {
            return Err(InvMlError::DegenerateFold {
                fold: 0,
                reason: format!("class {c} has only {count} samples"),
            });
        }
    }
    Ok(n_classes)
}

/// Mean test accuracy of a softmax (multinomial logistic) classifier over
/// stratified 10-fold cross-validation. Full-batch gradient descent on the
/// mean cross-entropy with an L2 penalty of 1e-4, 500 iterations.
pub fn acc_logistic_10fold(z: &Matrix, labels: &[usize], seed: u64) -> Result<f64> {
    let n_classes = check_classification_input(z, labels)?;
    let folds = stratified_folds(labels, seed);
    let d = z.cols();
    let lr = 0.5;
    let l2 = 1e-4;
    let iters = 500;

    let mut correct = 0usize;
    let mut total = 0usize;
    for f in 0..10 {
        let train: Vec<usize> = (0..z.rows()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..z.rows()).filter(|&i| folds[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        let mut present = vec![false; n_classes];
        for &i in &train {
            present[labels[i]] = true;
        }
        if present.iter().any(|&p| !p) {
            return Err(InvMlError::DegenerateFold {
                fold: f,
                reason: "training split is missing a class".into(),
            });
        }

        // Weights (n_classes x d) and biases.
        let mut w = Matrix::zeros(n_classes, d);
        let mut b = vec![0.0f64; n_classes];
        let nt = train.len() as f64;
        let mut probs = vec![0.0f64; n_classes];
        let mut gw = Matrix::zeros(n_classes, d);
        let mut gb = vec![0.0f64; n_classes];
        for _ in 0..iters {
            gw = gw.scale(0.0);
            gb.iter_mut().for_each(|v| *v = 0.0);
            for &i in &train {
                softmax_probs(&w, &b, z.row(i), &mut probs);
                probs[labels[i]] -= 1.0;
                for (c, &p) in probs.iter().enumerate() {
                    gb[c] += p;
                    for (col, &xv) in z.row(i).iter().enumerate() {
                        gw.set(c, col, gw.get(c, col) + p * xv);
                    }
                }
            }
            for c in 0..n_classes {
                b[c] -= lr * gb[c] / nt;
                for col in 0..d {
                    let g = gw.get(c, col) / nt + l2 * w.get(c, col);
                    w.set(c, col, w.get(c, col) - lr * g);
                }
            }
        }
        for &i in &test {
            softmax_probs(&w, &b, z.row(i), &mut probs);
            let pred = argmax(&probs);
            if pred == labels[i] {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(correct as f64 / total as f64)
}

fn softmax_probs(w: &Matrix, b: &[f64], x: &[f64], out: &mut [f64]) {
    for (c, o) in out.iter_mut().enumerate() {
        *o = b[c] + w.row(c).iter().zip(x).map(|(wv, xv)| wv * xv).sum::<f64>();
    }
    let mx = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - mx).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Stratified 10-fold majority-vote kNN accuracy. Vote ties go to the tied
/// label with the nearest representative.
pub fn acc_knn(z: &Matrix, labels: &[usize], k: usize, seed: u64) -> Result<f64> {
    let n_classes = check_classification_input(z, labels)?;
    let folds = stratified_folds(labels, seed);
    let mut correct = 0usize;
    let mut total = 0usize;
    for f in 0..10 {
        let train: Vec<usize> = (0..z.rows()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..z.rows()).filter(|&i| folds[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        if k > train.len() {
            return Err(InvMlError::KTooLarge { k, n: train.len() });
        }
        for &i in &test {
            // k nearest training samples, ties by lower index.
            let mut order: Vec<usize> = train.clone();
            order.sort_by(|&a, &b| {
                z.row_distance(i, a).partial_cmp(&z.row_distance(i, b)).unwrap().then(a.cmp(&b))
            });
            let mut votes = vec![0usize; n_classes];
            let mut nearest_of = vec![f64::INFINITY; n_classes];
            for &j in &order[..k] {
                votes[labels[j]] += 1;
                nearest_of[labels[j]] = nearest_of[labels[j]].min(z.row_distance(i, j));
            }
            let top = *votes.iter().max().unwrap();
            let pred = (0..n_classes)
                .filter(|&c| votes[c] == top)
                .min_by(|&a, &b| nearest_of[a].partial_cmp(&nearest_of[b]).unwrap())
                .unwrap();
            if pred == labels[i] {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(correct as f64 / total as f64)
}
