//! Training: the summarization and domain losses, Adam with learning-rate
//! halving on validation loss increase, and binary checkpoints.

mod checkpoint;
mod config;
mod loss;
mod schedule;
mod trainer;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::model::ModelError;
use crate::numcore::{NumError, Precision};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, read_checkpoint_precision, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::TrainingConfig;
pub use loss::{
    domain_loss_node, example_loss, loss_domain, loss_summarization, loss_total, summarization_loss_node, LossNodes,
    PROB_CLAMP,
};
pub use schedule::LrSchedule;
pub use trainer::{corpus_vocabulary, EpochStats, Trainer};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training configuration: {0}")]
    Config(String),
    #[error("loss contract violated: {0}")]
    Contract(String),
    #[error("non-finite loss in epoch {epoch}, batch {batch} (dialogs {ids})")]
    NonFiniteLoss { epoch: usize, batch: usize, ids: String },
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: String, msg: String },
    #[error("checkpoint {path} holds {found} parameters, this session uses {expected}")]
    PrecisionMismatch { path: String, found: Precision, expected: Precision },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl TrainError {
    /// Whether the failure is numeric rather than an input problem.
    pub fn is_numeric(&self) -> bool {
        match self {
            TrainError::NonFiniteLoss { .. } => true,
            TrainError::Num(e) | TrainError::Model(ModelError::Num(e)) => {
                matches!(e, NumError::NonFinite { .. } | NumError::NonFiniteGradient { .. })
            }
            _ => false,
        }
    }
}

pub type TrainResult<T> = Result<T, TrainError>;
