use serde::{Deserialize, Serialize};

use super::error::{NumError, NumResult};
use super::params::ParamStore;
use super::real::Real;
use super::tensor::Tensor;

/// Hyperparameters of the optimizer. Defaults: lr 0.001, β1 0.9, β2 0.999.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
    pub config: AdamConfig,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &ParamStore<T>, config: AdamConfig) -> Self {
        let zeros = || params.tensors().iter().map(|p| Tensor::zeros(p.shape())).collect();
        AdamState { m: zeros(), v: zeros(), t: 0, config }
    }

    pub fn lr(&self) -> f64 {
        self.config.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }
}

/// One bias-corrected Adam update. Nothing is modified if any gradient is non-finite.
pub fn adam_step<T: Real>(params: &mut ParamStore<T>, grads: &[Tensor<T>], state: &mut AdamState<T>) -> NumResult<()> {
    params.check_conformant(grads)?;
    if state.m.len() != params.len() {
        return Err(NumError::contract("adam_step", "optimizer state does not match parameters"));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(NumError::NonFiniteGradient { param: params.name(i).to_string() });
    }
    state.t += 1;
    let c = state.config;
    let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
    let one = T::one();
    let bias1 = T::from_f64(1.0 - c.beta1.powi(state.t as i32));
    let bias2 = T::from_f64(1.0 - c.beta2.powi(state.t as i32));
    let (lr, eps) = (T::from_f64(c.lr), T::from_f64(c.epsilon));
    for (i, g) in grads.iter().enumerate() {
        let p = params.get_mut(i).data_mut();
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for k in 0..p.len() {
            let gk = g.data()[k];
            m[k] = b1 * m[k] + (one - b1) * gk;
            v[k] = b2 * v[k] + (one - b2) * gk * gk;
            let m_hat = m[k] / bias1;
            let v_hat = v[k] / bias2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
