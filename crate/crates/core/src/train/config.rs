use serde::{Deserialize, Serialize};

use crate::model::{BeamConfig, SlotMode, MAX_DECODE_LEN};
use crate::numcore::{AdamConfig, Precision};

use super::TrainError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    /// Weight of the domain-classification loss.
    pub lambda: f64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub beam_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub precision: Precision,
    pub lr_halving: bool,
    /// Global gradient-norm clip; off by default.
    pub max_grad_norm: Option<f64>,
    pub slot_mode: SlotMode,
    pub vocab_max: usize,
    /// Stop once the epoch's mean summarization loss drops below this.
    pub stop_loss1: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            lambda: 0.5,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 8,
            beam_size: 3,
            max_epochs: 300,
            seed: 0,
            precision: Precision::F32,
            lr_halving: true,
            max_grad_norm: None,
            slot_mode: SlotMode::Delex,
            vocab_max: 50_000,
            stop_loss1: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1");
        }
        if self.beam_size < 1 {
            return bad("beam size must be at least 1");
        }
        if self.max_grad_norm.is_some_and(|n| n.is_nan() || n <= 0.0) {
            return bad("max_grad_norm must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.learning_rate, beta1: self.beta1, beta2: self.beta2, epsilon: self.epsilon }
    }

    pub fn beam(&self) -> BeamConfig {
        BeamConfig { beam: self.beam_size, max_len: MAX_DECODE_LEN, length_penalty: None, coverage_penalty: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = TrainingConfig::default();
        assert_eq!((c.lambda, c.learning_rate, c.beta1, c.beta2), (0.5, 0.001, 0.9, 0.999));
        assert_eq!((c.batch_size, c.beam_size), (8, 3));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        for c in [
            TrainingConfig { lambda: -0.1, ..Default::default() },
            TrainingConfig { batch_size: 0, ..Default::default() },
            TrainingConfig { beam_size: 0, ..Default::default() },
            TrainingConfig { beta1: 1.0, ..Default::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
