use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{build_vocab, DelexRecord, Dialog, DomainInventory, SlotInventory, Vocabulary};
use crate::model::{Example, ModelConfig, ModelParams, SlotMode};
use crate::numcore::{adam_step, AdamState, Graph, NumError, Real, Tensor};

use super::checkpoint::Checkpoint;
use super::config::TrainingConfig;
use super::loss::example_loss;
use super::schedule::LrSchedule;
use super::{TrainError, TrainResult};

/// Means over one epoch; `val` is absent when no validation set was given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss1: f64,
    pub loss2: f64,
    pub total: f64,
    pub val: Option<f64>,
    /// Learning rate in effect after scheduling.
    pub lr: f64,
    pub batch_losses: Vec<f64>,
}

impl EpochStats {
    pub const CSV_HEADER: &'static str = "epoch,loss1,loss2,total,val,lr";

    pub fn csv_row(&self) -> String {
        let val = self.val.map(|v| v.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.epoch, self.loss1, self.loss2, self.total, val, self.lr)
    }
}

/// Per-example loss values and, when requested, gradients.
struct ExampleEval<T> {
    loss1: f64,
    loss2: f64,
    total: f64,
    grads: Option<Vec<Tensor<T>>>,
}

fn evaluate_example<T: Real>(params: &ModelParams<T>, ex: &Example, lambda: f64, grads: bool) -> TrainResult<ExampleEval<T>> {
    let mut g = Graph::new(params.tensors());
    let nodes = example_loss(&mut g, ex, lambda)?;
    let scalar = |id| g.value(id).data()[0].as_f64();
    let (loss1, loss2, total) = (scalar(nodes.loss1), scalar(nodes.loss2), scalar(nodes.total));
    let grads = if grads { Some(g.backward(nodes.total)?) } else { None };
    Ok(ExampleEval { loss1, loss2, total, grads })
}

/// Owns parameters, optimizer and schedule for one training run.
#[derive(Debug, Clone)]
pub struct Trainer<T: Real> {
    pub config: TrainingConfig,
    pub params: ModelParams<T>,
    pub adam: AdamState<T>,
    pub schedule: LrSchedule,
    pub vocab: Vocabulary,
    pub domains: DomainInventory,
    /// Completed epochs.
    pub epoch: usize,
    pub best_val: Option<f64>,
}

impl<T: Real> Trainer<T> {
    pub fn new(config: TrainingConfig, model: ModelConfig, vocab: Vocabulary, domains: DomainInventory) -> TrainResult<Self> {
        config.validate()?;
        if config.precision != T::PRECISION {
            return Err(TrainError::Config(format!(
                "configured precision {} does not match the session's {}",
                config.precision,
                T::PRECISION
            )));
        }
        if model.vocab_size != vocab.len() || model.num_domains != domains.len() {
            return Err(TrainError::Config("model dimensions do not match the vocabulary or domain inventory".into()));
        }
        let params = ModelParams::init(model, config.seed)?;
        let adam = AdamState::new(params.store(), config.adam());
        let schedule = LrSchedule::new(config.learning_rate, config.lr_halving);
        Ok(Trainer { config, params, adam, schedule, vocab, domains, epoch: 0, best_val: None })
    }

    pub fn from_checkpoint(ckpt: Checkpoint<T>) -> Self {
        Trainer {
            config: ckpt.training,
            params: ckpt.params,
            adam: ckpt.adam,
            schedule: ckpt.schedule,
            vocab: ckpt.vocab,
            domains: ckpt.domains,
            epoch: ckpt.epoch,
            best_val: ckpt.best_val,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint<T> {
        Checkpoint {
            training: self.config.clone(),
            params: self.params.clone(),
            adam: self.adam.clone(),
            schedule: self.schedule.clone(),
            vocab: self.vocab.clone(),
            domains: self.domains.clone(),
            epoch: self.epoch,
            best_val: self.best_val,
        }
    }

    pub fn prepare(&self, dialogs: &[Dialog]) -> TrainResult<Vec<Example>> {
        dialogs
            .iter()
            .map(|d| Ok(Example::from_dialog(d, &self.vocab, &self.domains, self.config.slot_mode)?))
            .collect()
    }

    /// Example order for an epoch, a function of (seed, epoch) only.
    pub fn epoch_order(&self, epoch: usize, n: usize) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(epoch as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order
    }

    /// One pass over `train` in shuffled batches; the batch gradient is the
    /// mean of the example gradients.
    pub fn train_epoch(&mut self, train: &[Example]) -> TrainResult<EpochStats> {
        if train.is_empty() {
            return Err(TrainError::Config("empty training set".into()));
        }
        let epoch = self.epoch + 1;
        let order = self.epoch_order(epoch, train.len());
        let (mut s1, mut s2, mut st) = (0.0, 0.0, 0.0);
        let mut batch_losses = Vec::new();
        for (b, batch) in order.chunks(self.config.batch_size).enumerate() {
            let mut sum: Option<Vec<Tensor<T>>> = None;
            let mut batch_total = 0.0;
            let diverged = || TrainError::NonFiniteLoss {
                epoch,
                batch: b,
                ids: batch.iter().map(|&i| train[i].id.as_str()).collect::<Vec<_>>().join(","),
            };
            for &i in batch {
                let ev = evaluate_example(&self.params, &train[i], self.config.lambda, true)
                    .map_err(|e| if e.is_numeric() { diverged() } else { e })?;
                if !ev.total.is_finite() {
                    return Err(diverged());
                }
                let grads = ev.grads.expect("gradients requested");
                match sum.as_mut() {
                    None => sum = Some(grads),
                    Some(acc) => {
                        for (a, g) in acc.iter_mut().zip(&grads) {
                            a.add_assign(g)?;
                        }
                    }
                }
                s1 += ev.loss1;
                s2 += ev.loss2;
                st += ev.total;
                batch_total += ev.total;
            }
            let mut grads = sum.expect("non-empty batch");
            let scale = 1.0 / batch.len() as f64;
            if let Some(max) = self.config.max_grad_norm {
                let norm = grads.iter().flat_map(|g| g.data()).map(|x| x.as_f64().powi(2)).sum::<f64>().sqrt();
                let total_scale = scale * (max / (norm * scale)).min(1.0);
                grads.iter_mut().for_each(|g| g.scale(T::from_f64(total_scale)));
            } else {
                grads.iter_mut().for_each(|g| g.scale(T::from_f64(scale)));
            }
            adam_step(self.params.store_mut(), &grads, &mut self.adam).map_err(|e| match e {
                NumError::NonFiniteGradient { .. } => diverged(),
                e => e.into(),
            })?;
            batch_losses.push(batch_total / batch.len() as f64);
            debug!("epoch {epoch} batch {b} loss {}", batch_total / batch.len() as f64);
        }
        self.epoch = epoch;
        let n = train.len() as f64;
        Ok(EpochStats {
            epoch,
            loss1: s1 / n,
            loss2: s2 / n,
            total: st / n,
            val: None,
            lr: self.adam.lr(),
            batch_losses,
        })
    }

    /// Mean total loss over `examples` without updating anything.
    pub fn evaluate_loss(&self, examples: &[Example]) -> TrainResult<f64> {
        if examples.is_empty() {
            return Err(TrainError::Config("empty validation set".into()));
        }
        let mut s = 0.0;
        for ex in examples {
            s += evaluate_example(&self.params, ex, self.config.lambda, false)?.total;
        }
        Ok(s / examples.len() as f64)
    }

    /// Validation loss, then the halving rule. Returns the loss and whether
    /// it is the best seen so far.
    pub fn validate_and_schedule(&mut self, val: &[Example]) -> TrainResult<(f64, bool)> {
        let loss = self.evaluate_loss(val)?;
        if self.schedule.observe(loss) {
            info!("validation loss rose to {loss}; learning rate now {}", self.schedule.lr);
        }
        self.adam.set_lr(self.schedule.lr);
        let best = self.best_val.is_none_or(|b| loss < b);
        if best {
            self.best_val = Some(loss);
        }
        Ok((loss, best))
    }

    /// Training epoch followed by validation, if a validation set is given.
    pub fn run_epoch(&mut self, train: &[Example], val: &[Example]) -> TrainResult<(EpochStats, bool)> {
        let mut stats = self.train_epoch(train)?;
        let mut best = false;
        if !val.is_empty() {
            let (v, b) = self.validate_and_schedule(val)?;
            stats.val = Some(v);
            stats.lr = self.adam.lr();
            best = b;
        }
        info!("epoch {} loss1 {:.5} loss2 {:.5} total {:.5} val {:?} lr {}", stats.epoch, stats.loss1, stats.loss2, stats.total, stats.val, stats.lr);
        Ok((stats, best))
    }

    /// Whether another epoch should run.
    pub fn should_continue(&self, last: Option<&EpochStats>) -> bool {
        if self.epoch >= self.config.max_epochs {
            return false;
        }
        match (self.config.stop_loss1, last) {
            (Some(t), Some(s)) => s.loss1 >= t,
            _ => true,
        }
    }
}

/// Vocabulary over the encoder streams and reference summaries of
/// `dialogs`, in the form the given slot mode trains on.
pub fn corpus_vocabulary(dialogs: &[Dialog], mode: SlotMode, max_size: usize, slots: &SlotInventory) -> TrainResult<Vocabulary> {
    let mut tokens: Vec<String> = Vec::new();
    for d in dialogs {
        let rec = match mode {
            SlotMode::Delex => DelexRecord::from_dialog(d)?,
            SlotMode::Lexical => DelexRecord::lexical(d),
        };
        tokens.extend(rec.user_stream);
        tokens.extend(rec.system_stream);
        match mode {
            SlotMode::Delex => tokens.extend(d.reference_summary_delex.iter().cloned()),
            SlotMode::Lexical => tokens.extend(d.reference_summary.iter().cloned()),
        }
    }
    Ok(build_vocab(tokens.iter().map(String::as_str), max_size, slots)?)
}
