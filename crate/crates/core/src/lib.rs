//! Dialog summarization with a dual-encoder pointer-generator network.
//!
//! Source dialogs are split by speaker role into a user stream and a system
//! stream, each read by its own bidirectional LSTM. Slot values are replaced
//! by slot tokens before encoding; the decoder produces a slot-token template
//! that is filled back in from the source using attention. An auxiliary
//! multi-label domain classifier shares the encoders.
//!
//! Modules:
//! - [`numcore`]: tensors, reverse-mode autodiff, Adam.
//! - [`corpus`]: dialog schema, delexicalization, vocabularies, corpus converters.
//! - [`model`]: the network and its decoders.
//! - [`train`]: losses, the training loop, checkpoints.
//! - [`eval`]: ROUGE and critical-information completeness (CIC).

pub mod numcore;
pub mod corpus;
pub mod model;
pub mod train;
pub mod eval;
