//! Synthetic generators, file loaders, train/test splitting, neighbor
//! graphs, and dataset difficulty statistics.

mod csv_io;
mod generators;
mod idx;
mod knn;
mod stats;

pub use csv_io::{load_csv, save_csv};
pub use generators::{gen_low_dim_spheres, gen_spheres, gen_swiss_roll};
pub use idx::{load_idx, write_idx, IdxOptions, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use knn::{knn_graph, NeighborGraph};
pub use stats::{dataset_stats, DatasetStats};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

/// A sample matrix with optional integer labels.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Matrix,
    pub labels: Option<Vec<usize>>,
    pub name: String,
}

impl Dataset {
    pub fn new(x: Matrix, labels: Option<Vec<usize>>, name: impl Into<String>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != x.rows() {
                return Err(InvMlError::CountMismatch { images: x.rows(), labels: l.len() });
            }
        }
        Ok(Self { x, labels, name: name.into() })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    /// Seeded shuffle split into `(train, test)` with `n_train` samples in
    /// the first part.
    pub fn split(&self, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        if n_train > self.len() {
            return Err(InvMlError::InvalidArgument(format!(
                "n_train {} exceeds sample count {}",
                n_train,
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let (tr, te) = order.split_at(n_train);
        Ok((self.subset(tr, "train"), self.subset(te, "test")))
    }

    pub fn subset(&self, indices: &[usize], suffix: &str) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            name: format!("{}-{}", self.name, suffix),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_and_deterministic() {
        let ds = gen_swiss_roll(100, 1).unwrap();
        let (a1, b1) = ds.split(70, 9).unwrap();
        let (a2, _) = ds.split(70, 9).unwrap();
        assert_eq!(a1.len(), 70);
        assert_eq!(b1.len(), 30);
        assert_eq!(a1.x, a2.x);
    }

    #[test]
    fn labels_length_checked() {
        let x = Matrix::zeros(3, 2);
        assert!(Dataset::new(x, Some(vec![0, 1]), "bad").is_err());
    }
}
