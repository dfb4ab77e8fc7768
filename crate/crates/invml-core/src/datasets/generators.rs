//! Seeded synthetic manifolds: Swiss roll and the sphere families.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{InvMlError, Result};
use crate::linalg::gaussian;
use crate::matrix::Matrix;

use super::Dataset;

/// Swiss roll in 3-D: `(t cos t, y, t sin t)` with `t` uniform in
/// `[1.5 pi, 4.5 pi]` and `y` uniform in `[0, 21]`.
pub fn gen_swiss_roll(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(InvMlError::InvalidArgument("swiss roll needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 1.5 * std::f64::consts::PI;
    let hi = 4.5 * std::f64::consts::PI;
    let mut data = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let t = rng.gen_range(lo..hi);
        let y = rng.gen_range(0.0..21.0);
        data.push(t * t.cos());
        data.push(y);
        data.push(t * t.sin());
    }
    Dataset::new(Matrix::new(n, 3, data)?, None, "swissroll")
}

fn unit_sphere_point(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Nested spheres: 10 unit spheres `S^{d-1}` with Gaussian-shifted centers
/// (per-coordinate variance `10 / sqrt(d)`) plus one enclosing sphere of
/// radius 5 about the origin. `n` samples split 10/11 across the small
/// spheres and 1/11 on the enclosing one; labels are sphere indices with
/// the enclosing sphere last. With `half` set, only points whose final
/// coordinate is at least the center's final coordinate are kept.
pub fn gen_spheres(n: usize, ambient_dim: usize, seed: u64, half: bool) -> Result<Dataset> {
    if ambient_dim < 2 {
        return Err(InvMlError::InvalidArgument("ambient_dim must be >= 2".into()));
    }
    if n == 0 {
        return Err(InvMlError::InvalidArgument("spheres need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = (10.0 / (ambient_dim as f64).sqrt()).sqrt();
    let centers: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..ambient_dim).map(|_| std * gaussian(&mut rng)).collect())
        .collect();

    let per_small = n / 11;
    let n_large = n - 10 * per_small;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_small {
            let p = unit_sphere_point(ambient_dim, &mut rng);
            if half && p[ambient_dim - 1] + center[ambient_dim - 1] < center[ambient_dim - 1] {
                continue;
            }
            data.extend(p.iter().zip(center).map(|(a, b)| a + b));
            labels.push(c);
            rows += 1;
        }
    }
    for _ in 0..n_large {
        let p: Vec<f64> = unit_sphere_point(ambient_dim, &mut rng).into_iter().map(|x| 5.0 * x).collect();
        if half && p[ambient_dim - 1] < 0.0 {
            continue;
        }
        data.extend_from_slice(&p);
        labels.push(10);
        rows += 1;
    }
    let name = if half { "halfspheres" } else { "spheres" };
    Dataset::new(Matrix::new(rows, ambient_dim, data)?, Some(labels), name)
}

/// Low-intrinsic-dimension sphere family: 10 unit spheres `S^{sphere_dim}`
/// occupying the first `sphere_dim + 1` coordinates of the ambient space,
/// plus the radius-5 enclosing sphere, with Gaussian-shifted centers in the
/// full ambient space. This realizes a `d`-dimensional manifold inside a
/// much larger ambient dimension.
pub fn gen_low_dim_spheres(n: usize, sphere_dim: usize, ambient_dim: usize, seed: u64) -> Result<Dataset> {
    if sphere_dim + 1 > ambient_dim {
        return Err(InvMlError::InvalidArgument(format!(
            "sphere S^{sphere_dim} needs ambient dimension >= {}",
            sphere_dim + 1
        )));
    }
    if n == 0 {
        return Err(InvMlError::InvalidArgument("spheres need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = (10.0 / (ambient_dim as f64).sqrt()).sqrt();
    let centers: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..ambient_dim).map(|_| std * gaussian(&mut rng)).collect())
        .collect();

    let per_small = n / 11;
    let n_large = n - 10 * per_small;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_small {
            let p = unit_sphere_point(sphere_dim + 1, &mut rng);
            for j in 0..ambient_dim {
                let on_sphere = if j < sphere_dim + 1 { p[j] } else { 0.0 };
                data.push(on_sphere + center[j]);
            }
            labels.push(c);
        }
    }
    for _ in 0..n_large {
        let p = unit_sphere_point(sphere_dim + 1, &mut rng);
        for j in 0..ambient_dim {
            data.push(if j < sphere_dim + 1 { 5.0 * p[j] } else { 0.0 });
        }
        labels.push(10);
    }
    let rows = labels.len();
    Dataset::new(Matrix::new(rows, ambient_dim, data)?, Some(labels), "halfspheres-s10")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swiss_roll_radius_in_range() {
        let ds = gen_swiss_roll(1000, 42).unwrap();
        let lo = 1.5 * std::f64::consts::PI;
        let hi = 4.5 * std::f64::consts::PI;
        for i in 0..ds.len() {
            let r = (ds.x.get(i, 0).powi(2) + ds.x.get(i, 2).powi(2)).sqrt();
            assert!(r >= lo - 1e-9 && r <= hi + 1e-9);
            let y = ds.x.get(i, 1);
            assert!((0.0..=21.0).contains(&y));
        }
    }

    #[test]
    fn swiss_roll_zero_n_rejected() {
        assert!(gen_swiss_roll(0, 1).is_err());
    }

    #[test]
    fn swiss_roll_deterministic() {
        let a = gen_swiss_roll(50, 7).unwrap();
        let b = gen_swiss_roll(50, 7).unwrap();
        assert_eq!(a.x, b.x);
        let c = gen_swiss_roll(50, 8).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn spheres_lie_on_their_spheres() {
        let n = 110;
        let ds = gen_spheres(n, 20, 3, false).unwrap();
        // Re-derive centers with the same seed stream.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let std = (10.0 / 20f64.sqrt()).sqrt();
        let centers: Vec<Vec<f64>> =
            (0..10).map(|_| (0..20).map(|_| std * gaussian(&mut rng)).collect()).collect();
        let labels = ds.labels.as_ref().unwrap();
        for i in 0..ds.len() {
            let c = labels[i];
            if c < 10 {
                let d = crate::matrix::euclidean(ds.x.row(i), &centers[c]);
                assert!((d - 1.0).abs() < 1e-12, "point off its unit sphere: {d}");
            } else {
                let norm = ds.x.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 5.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_spheres_respect_hemisphere_cut() {
        let ds = gen_spheres(220, 10, 5, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let std = (10.0 / 10f64.sqrt()).sqrt();
        let centers: Vec<Vec<f64>> =
            (0..10).map(|_| (0..10).map(|_| std * gaussian(&mut rng)).collect()).collect();
        let labels = ds.labels.as_ref().unwrap();
        for i in 0..ds.len() {
            let c = labels[i];
            let last = ds.x.get(i, 9);
            let floor = if c < 10 { centers[c][9] } else { 0.0 };
            assert!(last >= floor - 1e-12);
        }
    }

    #[test]
    fn low_dim_spheres_occupy_leading_coords() {
        let ds = gen_low_dim_spheres(110, 10, 101, 9).unwrap();
        assert_eq!(ds.dim(), 101);
        // Unit distance from each center in the leading block.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let std = (10.0 / 101f64.sqrt()).sqrt();
        let centers: Vec<Vec<f64>> =
            (0..10).map(|_| (0..101).map(|_| std * gaussian(&mut rng)).collect()).collect();
        let labels = ds.labels.as_ref().unwrap();
        for i in 0..ds.len() {
            let c = labels[i];
            if c < 10 {
                let d = crate::matrix::euclidean(ds.x.row(i), &centers[c]);
                assert!((d - 1.0).abs() < 1e-12);
                // Trailing coordinates come from the center alone.
                for j in 11..101 {
                    assert!((ds.x.get(i, j) - centers[c][j]).abs() < 1e-12);
                }
            }
        }
    }
}
