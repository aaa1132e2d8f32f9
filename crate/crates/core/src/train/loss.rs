use crate::corpus::SOS;
use crate::model::network::{classify_domains, encode_dialog, ClassifierNodes, DecoderContext};
use crate::model::Example;
use crate::numcore::{Graph, NodeId, Real, Tensor};

use super::{TrainError, TrainResult};

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-12;

/// `loss₁ = −(1/T) Σ_t log P(w*_t)`.
pub fn loss_summarization(target_probs: &[f64]) -> TrainResult<f64> {
    if target_probs.is_empty() {
        return Err(TrainError::Contract("summarization loss over an empty target".into()));
    }
    let s: f64 = target_probs.iter().map(|p| -p.max(PROB_CLAMP).ln()).sum();
    Ok(s / target_probs.len() as f64)
}

/// Binary cross entropy averaged over domains.
pub fn loss_domain(d: &[f64], labels: &[f64]) -> TrainResult<f64> {
    if d.len() != labels.len() || d.is_empty() {
        return Err(TrainError::Contract(format!("{} predictions for {} labels", d.len(), labels.len())));
    }
    if let Some(p) = d.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(TrainError::Contract(format!("domain probability {p} outside [0, 1]")));
    }
    let s: f64 = d
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(s / d.len() as f64)
}

pub fn loss_total(loss1: f64, loss2: f64, lambda: f64) -> f64 {
    loss1 + lambda * loss2
}

/// Graph form of [`loss_summarization`] over per-step distributions.
pub fn summarization_loss_node<T: Real>(g: &mut Graph<'_, T>, dists: &[NodeId], targets: &[usize]) -> TrainResult<NodeId> {
    if dists.is_empty() || dists.len() != targets.len() {
        return Err(TrainError::Contract(format!("{} steps for {} targets", dists.len(), targets.len())));
    }
    let picked: Vec<NodeId> = dists.iter().zip(targets).map(|(&d, &t)| g.pick(d, t)).collect::<Result<_, _>>()?;
    let p = g.concat(&picked)?;
    let lp = g.log(p, T::from_f64(PROB_CLAMP));
    let m = g.mean(lp);
    Ok(g.affine(m, -T::one(), T::zero()))
}

/// Graph form of [`loss_domain`].
pub fn domain_loss_node<T: Real>(g: &mut Graph<'_, T>, d: NodeId, labels: &[f64]) -> TrainResult<NodeId> {
    if g.value(d).len() != labels.len() {
        return Err(TrainError::Contract(format!("{} predictions for {} labels", g.value(d).len(), labels.len())));
    }
    let floor = T::from_f64(PROB_CLAMP);
    let p = g.clamp(d, floor, T::one() - floor);
    let q = g.affine(p, -T::one(), T::one());
    let lp = g.log(p, floor);
    let lq = g.log(q, floor);
    let y = g.input(Tensor::vector(labels.iter().map(|&v| T::from_f64(v)).collect()));
    let ny = g.input(Tensor::vector(labels.iter().map(|&v| T::from_f64(1.0 - v)).collect()));
    let a = g.mul(y, lp)?;
    let b = g.mul(ny, lq)?;
    let s = g.add(a, b)?;
    let m = g.mean(s);
    Ok(g.affine(m, -T::one(), T::zero()))
}

#[derive(Debug, Clone, Copy)]
pub struct LossNodes {
    pub loss1: NodeId,
    pub loss2: NodeId,
    pub total: NodeId,
}

/// Teacher-forced forward pass of one example and its loss
/// `loss₁ + λ·loss₂`.
pub fn example_loss<T: Real>(g: &mut Graph<'_, T>, ex: &Example, lambda: f64) -> TrainResult<LossNodes> {
    let enc = encode_dialog(g, &ex.user_ids, &ex.system_ids, ex.base_size, ex.extended_size())?;
    let cls = ClassifierNodes::from_params(g);
    let d = classify_domains(g, enc.user.final_state, enc.system.final_state, &cls)?;
    let ctx = DecoderContext::new(g, enc)?;
    let mut state = ctx.initial_state(g)?;
    let mut dists = Vec::with_capacity(ex.target_ids.len());
    let mut input = SOS;
    for &target in &ex.target_ids {
        let step = ctx.step(g, input, state)?;
        dists.push(step.distribution);
        state = step.state;
        input = target;
    }
    let loss1 = summarization_loss_node(g, &dists, &ex.target_ids)?;
    let loss2 = domain_loss_node(g, d, &ex.domain_labels)?;
    let weighted = g.affine(loss2, T::from_f64(lambda), T::zero());
    let total = g.add(loss1, weighted)?;
    Ok(LossNodes { loss1, loss2, total })
}
