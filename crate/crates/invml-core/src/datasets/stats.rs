//! Dataset difficulty statistics: per-image histogram entropy and std plus
//! cross-validated classifier accuracies.

use crate::error::{InvMlError, Result};
use crate::metrics::{acc_knn, acc_logistic_10fold};

use super::Dataset;

#[derive(Clone, Debug)]
pub struct DatasetStats {
    /// Mean Shannon entropy (bits) of the per-image intensity histogram.
    pub entropy_mean: f64,
    /// Mean standard deviation of the per-image histogram counts.
    pub hist_std_mean: f64,
    /// 10-fold kNN (k = 5) classification accuracy on raw features.
    pub knn_acc: f64,
    /// 10-fold logistic classification accuracy on raw features.
    pub logistic_acc: f64,
}

/// Histogram entropy/std averaged over samples, plus classifier accuracies.
/// Features are assumed scaled to `[0, 1]` (values are clamped into range
/// when binning). Requires labels.
pub fn dataset_stats(ds: &Dataset, bins: usize, seed: u64) -> Result<DatasetStats> {
    if ds.labels.is_none() {
        return Err(InvMlError::MissingLabels);
    }
    assert!(bins >= 1);
    let mut entropy_sum = 0.0;
    let mut std_sum = 0.0;
    let mut counts = vec![0usize; bins];
    for i in 0..ds.len() {
        counts.iter_mut().for_each(|c| *c = 0);
        for &v in ds.x.row(i) {
            let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let total = ds.dim() as f64;
        let mut h = 0.0;
        for &c in &counts {
            if c > 0 {
                let p = c as f64 / total;
                h -= p * p.log2();
            }
        }
        entropy_sum += h;
        let mean = total / bins as f64;
        let var =
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / bins as f64;
        std_sum += var.sqrt();
    }
    let n = ds.len() as f64;
    let labels = ds.labels.as_ref().unwrap();
    Ok(DatasetStats {
        entropy_mean: entropy_sum / n,
        hist_std_mean: std_sum / n,
        knn_acc: acc_knn(&ds.x, labels, 5, seed)?,
        logistic_acc: acc_logistic_10fold(&ds.x, labels, seed)?,
    })
}
