//! Siamese convolutional embedding network.
//!
//! Both twins share one [`NetworkParams`]. A patch passes through
//! `conv3×3 → ReLU → maxpool2×2 → conv3×3 → ReLU → maxpool2×2 → dense`,
//! giving the embedding `G_w(x)`. Pairs are compared by Euclidean distance
//! and trained with the contrastive loss.

mod io;
mod loss;
mod model;
mod pairs;
mod tensor;
mod train;

pub use io::{load_params, save_params, MODEL_MAGIC, MODEL_VERSION};
pub use loss::{contrastive_loss, contrastive_loss_grad, euclidean, DEFAULT_MARGIN};
pub use model::{backward, forward, Architecture, ForwardTrace, Layer, LayerKind, NetworkParams};
pub use pairs::{sample_pairs, AlignedSpectrograms, PairLabel, TrainingPair, NEGATIVE_MIN_OFFSET};
pub use tensor::Tensor;
pub use train::{train, train_with, TrainConfig, TrainLog};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("input shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input {rows}×{cols} is too small for two 2×2 poolings")]
    InputTooSmall { rows: usize, cols: usize },
    #[error("no training pairs")]
    NoPairs,
    #[error("invalid training configuration: {0}")]
    Config(&'static str),
    #[error("training diverged: mean loss of epoch {epoch} is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("cannot sample pairs: {0}")]
    Sampling(String),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("model file length mismatch: {0}")]
    ModelLength(String),
    #[error("malformed model file: {0}")]
    Malformed(String),
}
