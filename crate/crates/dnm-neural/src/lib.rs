//! Minimal deterministic tensor core with reverse-mode differentiation and
//! the layers both taggers need: embeddings, linear maps, sigmoid/softmax,
//! an LSTM cell, same-padded 1-D convolution, average pooling, dropout,
//! Adam, BCE and cross-entropy losses, and a finite-difference checker.
//!
//! Everything is `f64` and seed-deterministic; matrices are dense row-major
//! `ndarray::Array2` so matrix products go through `matrixmultiply`.

pub mod adam;
pub mod checkpoint;
pub mod embedding;
pub mod gradcheck;
pub mod init;
pub mod layers;
pub mod params;
pub mod tape;

use thiserror::Error;

pub use adam::AdamState;
pub use embedding::{HashEmbedding, HashEmbeddingSpec, PAD_ID, UNK_ID};
pub use gradcheck::{grad_check, GradCheck};
pub use params::{ParamId, ParamStore};
pub use tape::{Grads, NodeId, Tape};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("{op}: shape mismatch: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("{op}: produced a non-finite value")]
    NonFinite { op: &'static str },

    #[error("checkpoint {path}: {detail}")]
    Checkpoint { path: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NeuralError>;

pub(crate) fn shape_err(op: &'static str, detail: String) -> NeuralError {
    NeuralError::Shape { op, detail }
}
