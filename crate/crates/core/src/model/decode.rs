//! Greedy and beam-search decoding over any step-wise model.

use serde::{Deserialize, Serialize};

use crate::corpus::{EOS, SOS};
use crate::numcore::{Graph, Real};

use super::network::{encode_dialog, DecoderContext, DecoderState};
use super::params::ModelParams;
use super::trace::DecoderStepTrace;
use super::{Example, ModelError, ModelResult};

/// A decoder that maps (state, input token) to a next-token distribution.
pub trait StepModel {
    type State: Clone;

    fn start(&mut self) -> ModelResult<Self::State>;

    fn step(&mut self, state: &Self::State, input: usize) -> ModelResult<(DecoderStepTrace, Self::State)>;
}

/// The network run on one example, growing a single inference graph.
pub struct NetworkStepper<'p, T: Real> {
    graph: Graph<'p, T>,
    context: DecoderContext,
}

impl<'p, T: Real> NetworkStepper<'p, T> {
    pub fn new(params: &'p ModelParams<T>, example: &Example) -> ModelResult<Self> {
        let mut graph = Graph::new(params.tensors());
        let encoded =
            encode_dialog(&mut graph, &example.user_ids, &example.system_ids, example.base_size, example.extended_size())?;
        let context = DecoderContext::new(&mut graph, encoded)?;
        Ok(NetworkStepper { graph, context })
    }
}

impl<T: Real> StepModel for NetworkStepper<'_, T> {
    type State = DecoderState;

    fn start(&mut self) -> ModelResult<DecoderState> {
        self.context.initial_state(&mut self.graph)
    }

    fn step(&mut self, state: &DecoderState, input: usize) -> ModelResult<(DecoderStepTrace, DecoderState)> {
        let nodes = self.context.step(&mut self.graph, input, *state)?;
        Ok((nodes.trace(&self.graph), nodes.state))
    }
}

/// A decoded token sequence (EOS excluded) with one trace per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub tokens: Vec<usize>,
    pub traces: Vec<DecoderStepTrace>,
    /// Sum of log-probabilities of the emitted tokens, EOS included.
    pub log_prob: f64,
    pub finished: bool,
}

/// Highest-probability token; the lowest id wins a tie.
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

pub fn greedy_decode<M: StepModel>(model: &mut M, max_len: usize) -> ModelResult<Decoded> {
    let mut out = Decoded { tokens: Vec::new(), traces: Vec::new(), log_prob: 0.0, finished: false };
    let mut state = model.start()?;
    let mut input = SOS;
    for _ in 0..max_len {
        let (trace, next) = model.step(&state, input)?;
        let tok = argmax(&trace.distribution);
        out.log_prob += trace.distribution[tok].ln();
        if tok == EOS {
            out.finished = true;
            break;
        }
        out.tokens.push(tok);
        out.traces.push(trace);
        state = next;
        input = tok;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub beam: usize,
    pub max_len: usize,
    /// GNMT length penalty exponent; `None` scores by mean log-probability.
    pub length_penalty: Option<f64>,
    /// GNMT coverage penalty weight over the merged source attention.
    pub coverage_penalty: Option<f64>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig { beam: 3, max_len: super::MAX_DECODE_LEN, length_penalty: None, coverage_penalty: None }
    }
}

#[derive(Clone)]
struct Hypothesis<S> {
    decoded: Decoded,
    /// Merged attention accumulated over steps.
    coverage: Vec<f64>,
    state: S,
    last: usize,
}

fn merged_attention(trace: &DecoderStepTrace) -> impl Iterator<Item = f64> + '_ {
    trace.user_attention.iter().chain(&trace.system_attention).map(|a| 0.5 * a)
}

fn score<S>(h: &Hypothesis<S>, cfg: &BeamConfig) -> f64 {
    let len = h.decoded.tokens.len() + usize::from(h.decoded.finished);
    let mut s = match cfg.length_penalty {
        None if len == 0 => 0.0,
        None => h.decoded.log_prob / len as f64,
        Some(alpha) => h.decoded.log_prob / ((5.0 + len as f64) / 6.0).powf(alpha),
    };
    if let Some(beta) = cfg.coverage_penalty {
        s += beta * h.coverage.iter().map(|&c| c.clamp(1e-12, 1.0).ln()).sum::<f64>();
    }
    s
}

/// Beam search over summed log-probabilities. Each live hypothesis proposes
/// its top `beam` tokens, the best `beam` candidates overall survive, and
/// those ending in EOS are set aside as finished. Finished hypotheses are
/// ranked by the configured length-normalized score.
pub fn beam_decode<M: StepModel>(model: &mut M, cfg: &BeamConfig) -> ModelResult<Decoded> {
    if cfg.beam < 1 {
        return Err(ModelError::Config("beam size must be at least 1".into()));
    }
    let start = model.start()?;
    let mut live = vec![Hypothesis {
        decoded: Decoded { tokens: Vec::new(), traces: Vec::new(), log_prob: 0.0, finished: false },
        coverage: Vec::new(),
        state: start,
        last: SOS,
    }];
    let mut finished: Vec<Hypothesis<M::State>> = Vec::new();
    for _ in 0..cfg.max_len {
        let mut candidates = Vec::new();
        for (hi, h) in live.iter().enumerate() {
            let (trace, next) = model.step(&h.state, h.last)?;
            let mut order: Vec<usize> = (0..trace.distribution.len()).collect();
            order.sort_by(|&a, &b| trace.distribution[b].total_cmp(&trace.distribution[a]).then(a.cmp(&b)));
            order.truncate(cfg.beam);
            let trace = std::rc::Rc::new(trace);
            for tok in order {
                let lp = h.decoded.log_prob + trace.distribution[tok].ln();
                candidates.push((lp, hi, tok, trace.clone(), next.clone()));
            }
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        candidates.truncate(cfg.beam);
        let mut next_live = Vec::new();
        for (lp, hi, tok, trace, state) in candidates {
            let mut h = live[hi].clone();
            h.decoded.log_prob = lp;
            if h.coverage.is_empty() {
                h.coverage = vec![0.0; trace.user_attention.len() + trace.system_attention.len()];
            }
            for (c, a) in h.coverage.iter_mut().zip(merged_attention(&trace)) {
                *c += a;
            }
            if tok == EOS {
                h.decoded.finished = true;
                finished.push(h);
            } else {
                h.decoded.tokens.push(tok);
                h.decoded.traces.push((*trace).clone());
                h.state = state;
                h.last = tok;
                next_live.push(h);
            }
        }
        live = next_live;
        if live.is_empty() || finished.len() >= cfg.beam {
            break;
        }
    }
    let pool = if finished.is_empty() { live } else { finished };
    let mut best: Option<(f64, Hypothesis<M::State>)> = None;
    for h in pool {
        let s = score(&h, cfg);
        if best.as_ref().is_none_or(|(bs, _)| s > *bs) {
            best = Some((s, h));
        }
    }
    Ok(best.map(|(_, h)| h.decoded).expect("beam keeps at least one hypothesis"))
}
