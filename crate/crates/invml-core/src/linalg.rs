//! Dense linear algebra primitives: LU inversion, power-iteration spectral
//! norm, one-sided Jacobi SVD, Householder QR, and PCA projection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

/// Default cap on the condition-number estimate for `mat_inverse`.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Relative singular-value threshold used by `svd_rank`.
pub const DEFAULT_RANK_TOL: f64 = 1e-3;

/// Seed for the deterministic power-iteration start vector.
const POWER_ITER_SEED: u64 = 0x1735_c0de;

/// Singular values plus the derived numerical rank.
#[derive(Clone, Debug)]
pub struct SvdRankResult {
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub tolerance_used: f64,
}

/// Inverse of a square matrix via LU with partial pivoting.
///
/// Fails with `SingularMatrix` on a vanishing pivot and `IllConditioned`
/// when the 1-norm condition estimate exceeds `cap`.
pub fn mat_inverse_with_cap(w: &Matrix, cap: f64) -> Result<Matrix> {
    let n = w.rows();
    if w.cols() != n {
        return Err(InvMlError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", w.rows(), w.cols()),
        });
    }
    let pivot_threshold = 1e-14 * w.max_abs();

    // Augmented Gauss-Jordan elimination.
    let mut a = w.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a.get(col, col).abs();
        for r in col + 1..n {
            let v = a.get(r, col).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= pivot_threshold {
            return Err(InvMlError::SingularMatrix { pivot: pivot_val, threshold: pivot_threshold });
        }
        if pivot_row != col {
            for j in 0..n {
                let t = a.get(col, j);
                a.set(col, j, a.get(pivot_row, j));
                a.set(pivot_row, j, t);
                let t = inv.get(col, j);
                inv.set(col, j, inv.get(pivot_row, j));
                inv.set(pivot_row, j, t);
            }
        }
        let p = a.get(col, col);
        for j in 0..n {
            a.set(col, j, a.get(col, j) / p);
            inv.set(col, j, inv.get(col, j) / p);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a.get(r, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a.set(r, j, a.get(r, j) - f * a.get(col, j));
                inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
            }
        }
    }

    let estimate = w.norm_1() * inv.norm_1();
    if estimate > cap {
        return Err(InvMlError::IllConditioned { estimate, cap });
    }
    Ok(inv)
}

pub fn mat_inverse(w: &Matrix) -> Result<Matrix> {
    mat_inverse_with_cap(w, DEFAULT_CONDITION_CAP)
}

/// 1-norm condition estimate; infinite for singular input.
pub fn condition_estimate(w: &Matrix) -> f64 {
    match mat_inverse_with_cap(w, f64::INFINITY) {
        Ok(inv) => w.norm_1() * inv.norm_1(),
        Err(_) => f64::INFINITY,
    }
}

/// Largest singular value via power iteration on `w^T w`.
///
/// The start vector comes from a fixed seeded PRNG so repeated runs are
/// bit-identical. Returns `(sigma, u, v)` with `u` an `rows x 1` left
/// vector and `v` a `cols x 1` right vector.
pub fn spectral_norm(w: &Matrix, n_iter: usize) -> Result<(f64, Matrix, Matrix)> {
    if w.is_zero() {
        return Err(InvMlError::ZeroMatrix);
    }
    assert!(n_iter >= 1, "n_iter must be at least 1");
    let (rows, cols) = w.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITER_SEED);
    let mut v: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut v);

    let mut u = vec![0.0; rows];
    let mut sigma = 0.0;
    for _ in 0..n_iter {
        // u = w v
        for i in 0..rows {
            u[i] = w.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        sigma = normalize(&mut u);
        if sigma == 0.0 {
            // v landed in the null space; restart from a fresh direction.
            for x in v.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
            normalize(&mut v);
            continue;
        }
        // v = w^T u
        for x in v.iter_mut() {
            *x = 0.0;
        }
        for i in 0..rows {
            let ui = u[i];
            for (vj, wij) in v.iter_mut().zip(w.row(i)) {
                *vj += wij * ui;
            }
        }
        sigma = normalize(&mut v);
    }
    let u = Matrix::from_raw(rows, 1, u);
    let v = Matrix::from_raw(cols, 1, v);
    Ok((sigma, u, v))
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Full SVD `a = U diag(s) V^T` by one-sided Jacobi rotations.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD. Exact up to float rounding, no iteration-cap
/// ambiguity: sweeps run until all column pairs are numerically orthogonal.
pub fn jacobi_svd(a: &Matrix) -> Svd {
    if a.rows() < a.cols() {
        let t = jacobi_svd(&a.transpose());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    let eps = 1e-14;

    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                let denom = (alpha * beta).sqrt();
                if denom == 0.0 || gamma.abs() <= eps * denom {
                    continue;
                }
                off = off.max(gamma.abs() / denom);
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    u.set(i, p, c * up - s * uq);
                    u.set(i, q, s * up + c * uq);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if off <= eps {
            break;
        }
    }

    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| u.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    // Sort columns by descending singular value.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
    let u_sorted = Matrix::from_fn(m, n, |i, j| {
        let col = order[j];
        if sv[col] > 0.0 {
            u.get(i, col) / sv[col]
        } else {
            0.0
        }
    });
    let v_sorted = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Svd { u: u_sorted, singular_values: sv, v: v_sorted }
}

/// Numerical rank: count of singular values above `rel_tol * sigma_max`.
pub fn svd_rank(z: &Matrix, rel_tol: f64) -> SvdRankResult {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0,1)");
    let sv = jacobi_svd(z).singular_values;
    let tol = rel_tol * sv.first().copied().unwrap_or(0.0);
    let rank = if tol == 0.0 { 0 } else { sv.iter().filter(|&&s| s > tol).count() };
    SvdRankResult { singular_values: sv, rank, tolerance_used: tol }
}

/// Orthogonal factor of a Householder QR, with the sign convention that the
/// diagonal of R is nonnegative (so already-orthogonal input round-trips).
pub fn qr_orthogonalize(w: &Matrix) -> Result<Matrix> {
    let n = w.rows();
    if w.cols() != n {
        return Err(InvMlError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", w.rows(), w.cols()),
        });
    }
    let mut r = w.clone();
    let mut q = Matrix::identity(n);
    for k in 0..n {
        let mut x = vec![0.0; n - k];
        for i in k..n {
            x[i - k] = r.get(i, k);
        }
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_x < 1e-13 * w.max_abs().max(1.0) {
            return Err(InvMlError::RankDeficient);
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        x[0] += sign * norm_x;
        let vnorm2: f64 = x.iter().map(|v| v * v).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // Apply H = I - 2 vv^T / (v^T v) to R (left) and accumulate into Q.
        for j in k..n {
            let dot: f64 = (k..n).map(|i| x[i - k] * r.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                r.set(i, j, r.get(i, j) - f * x[i - k]);
            }
        }
        for j in 0..n {
            let dot: f64 = (k..n).map(|i| x[i - k] * q.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                q.set(i, j, q.get(i, j) - f * x[i - k]);
            }
        }
    }
    // q currently holds Q^T with Householder sign; flip rows so that
    // diag(R) >= 0, then transpose.
    let mut qt = q;
    for i in 0..n {
        if r.get(i, i) < 0.0 {
            for j in 0..n {
                qt.set(i, j, -qt.get(i, j));
            }
        }
    }
    Ok(qt.transpose())
}

/// Random orthogonal matrix (QR of a seeded Gaussian sample).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let g = Matrix::from_fn(n, n, |_, _| gaussian(rng));
        if let Ok(q) = qr_orthogonalize(&g) {
            return q;
        }
    }
}

/// Standard normal sample by Box-Muller.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Centers columns and projects onto the top `target_dim` right singular
/// vectors of the centered data.
pub fn pca_project(x: &Matrix, target_dim: usize) -> Matrix {
    assert!(target_dim <= x.cols(), "target_dim must not exceed cols");
    let (n, m) = x.shape();
    let mut means = vec![0.0; m];
    for i in 0..n {
        for (s, v) in means.iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for s in means.iter_mut() {
        *s /= n.max(1) as f64;
    }
    let centered = Matrix::from_fn(n, m, |i, j| x.get(i, j) - means[j]);
    let svd = jacobi_svd(&centered);
    // Columns of V are the principal directions.
    let basis = Matrix::from_fn(m, target_dim, |i, j| svd.v.get(i, j));
    centered.matmul(&basis)
}
