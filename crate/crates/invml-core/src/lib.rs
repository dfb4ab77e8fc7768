//! Invertible manifold learning: a cascade of bias-free equi-dimensional
//! LeakyReLU layers with a row-orthogonal linear compression head, trained
//! under local-isometry, orthogonality, and padding losses so the whole
//! embedding map stays algebraically invertible. Alongside the model the
//! crate provides the supporting dense linear algebra, a small
//! reverse-mode autodiff tape, dataset generators and loaders, the
//! embedding-quality metric suite, latent interpolation experiments, and
//! binary checkpointing.

pub mod autograd;
pub mod checkpoint;
pub mod datasets;
pub mod error;
pub mod interpolation;
pub mod linalg;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod schedule;
pub mod trainer;

pub use autograd::{ActivationSpec, Tape};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use datasets::{Dataset, NeighborGraph};
pub use error::{InvMlError, Result};
pub use losses::{LossBreakdown, PairSet};
pub use matrix::Matrix;
pub use metrics::MetricsReport;
pub use model::{InvMLEncoder, LossFlags};
pub use schedule::{ScheduleConfig, ScheduleSnapshot};
pub use trainer::{train, AdamState, BatchMode, TrainConfig, TrainHistory};
