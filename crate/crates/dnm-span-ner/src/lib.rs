//! Span-matching NER: entity-type prompts and text are encoded jointly,
//! every span up to a width cap is scored against every prompted type in a
//! shared latent space, and training minimizes binary cross-entropy over
//! positive and negative (span, type) pairs.

pub mod model;
pub mod predict;
pub mod train;

use thiserror::Error;

pub use model::{enumerate_spans, EncoderMode, SpanNerConfig, SpanNerModel};
pub use predict::{predict, SpanPrediction};
pub use train::{train, SpanTrainConfig, StepLog, TrainOutcome};

#[derive(Debug, Error)]
pub enum SpanNerError {
    #[error("input has no [SEP]/text section: {0}")]
    BadInput(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("training diverged at step {step}: loss {loss}")]
    Diverged { step: usize, loss: f64 },

    #[error("empty training set")]
    EmptyTrainSet,

    #[error(transparent)]
    Neural(#[from] dnm_neural::NeuralError),

    #[error(transparent)]
    Dataset(#[from] dnm_dataset::DatasetError),

    #[error("checkpoint metadata: {0}")]
    Metadata(String),
}

pub type Result<T> = std::result::Result<T, SpanNerError>;
