use serde::{Deserialize, Serialize};

/// Values recorded at one decoder step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderStepTrace {
    /// Embedded decoder input.
    pub x: Vec<f64>,
    /// Decoder hidden state after the step.
    pub s: Vec<f64>,
    pub user_energies: Vec<f64>,
    pub user_attention: Vec<f64>,
    pub system_energies: Vec<f64>,
    pub system_attention: Vec<f64>,
    /// Merged context `h*`.
    pub context: Vec<f64>,
    pub p_gen: f64,
    /// Final distribution over the extended vocabulary.
    pub distribution: Vec<f64>,
}

/// Per-domain probabilities from the classifier head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPrediction(pub Vec<f64>);

impl DomainPrediction {
    /// Domains with probability at least one half.
    pub fn predicted(&self) -> Vec<bool> {
        self.0.iter().map(|&p| p >= 0.5).collect()
    }
}
