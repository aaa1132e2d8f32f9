//! The summarization network: role encoders, per-encoder attention, the
//! pointer/copy mixture, slot filling, the domain classifier and decoders.

mod config;
pub mod decode;
mod example;
pub mod network;
mod params;
mod summarize;
mod trace;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::numcore::NumError;

pub use config::ModelConfig;
pub use decode::{beam_decode, greedy_decode, BeamConfig, Decoded, NetworkStepper, StepModel};
pub use example::{Example, SlotMode};
pub use network::{DecoderContext, DecoderState, EncodedDialog, EncodedStream, StepNodes};
pub use params::{AttentionParams, EncoderParams, ModelParams, Param, FORGET_BIAS, INIT_RANGE};
pub use summarize::{fill_slot_value, predict_domains, summarize, DecodeStrategy, SlotFill, Summary};
pub use trace::{DecoderStepTrace, DomainPrediction};

/// Default cap on generated summary length.
pub const MAX_DECODE_LEN: usize = 120;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model configuration: {0}")]
    Config(String),
    #[error("model contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type ModelResult<T> = Result<T, ModelError>;
