use serde::{Deserialize, Serialize};

use super::ModelError;

/// Layer sizes. `decoder_hidden` must equal `2 * encoder_hidden` so that the
/// concatenated encoder final states initialize the decoder directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Per encoder, both directions together (half per direction).
    pub encoder_hidden: usize,
    pub decoder_hidden: usize,
    pub attention_dim: usize,
    pub output_hidden: usize,
    pub classifier_hidden: usize,
    pub num_domains: usize,
}

impl ModelConfig {
    /// 128-d embeddings, 256-d encoders (128 per direction), 512-d decoder.
    pub fn full(vocab_size: usize, num_domains: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 128,
            encoder_hidden: 256,
            decoder_hidden: 512,
            attention_dim: 256,
            output_hidden: 512,
            classifier_hidden: 256,
            num_domains,
        }
    }

    /// Reduced sizes for desk-scale corpora.
    pub fn toy(vocab_size: usize, num_domains: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 32,
            encoder_hidden: 64,
            decoder_hidden: 128,
            attention_dim: 64,
            output_hidden: 64,
            classifier_hidden: 32,
            num_domains,
        }
    }

    /// Sizes used for gradient checks.
    pub fn tiny(vocab_size: usize, num_domains: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 8,
            encoder_hidden: 16,
            decoder_hidden: 32,
            attention_dim: 8,
            output_hidden: 8,
            classifier_hidden: 8,
            num_domains,
        }
    }

    pub fn direction_hidden(&self) -> usize {
        self.encoder_hidden / 2
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("encoder_hidden", self.encoder_hidden),
            ("decoder_hidden", self.decoder_hidden),
            ("attention_dim", self.attention_dim),
            ("output_hidden", self.output_hidden),
            ("classifier_hidden", self.classifier_hidden),
            ("num_domains", self.num_domains),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(ModelError::Config(format!("{name} must be positive")));
        }
        if !self.encoder_hidden.is_multiple_of(2) {
            return Err(ModelError::Config("encoder_hidden must be even (two directions)".into()));
        }
        if self.decoder_hidden != 2 * self.encoder_hidden {
            return Err(ModelError::Config(format!(
                "decoder_hidden {} must equal 2 * encoder_hidden {}",
                self.decoder_hidden, self.encoder_hidden
            )));
        }
        Ok(())
    }
}
