#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spnet::corpus::{DelexRecord, SlotTable, EOS};
use spnet::model::{Example, ModelConfig, ModelParams, Param};
use spnet::numcore::{finite_diff_coords, relative_error, Graph, Real, Tensor};
use spnet::train::example_loss;

/// Embedding 8, encoder 16, decoder 32, vocabulary 20, two domains.
pub fn tiny_config() -> ModelConfig {
    ModelConfig::tiny(20, 2)
}

/// Parameters drawn uniformly from `[-scale, scale]`.
pub fn random_params<T: Real>(cfg: &ModelConfig, seed: u64, scale: f64) -> ModelParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors = Param::ALL.iter().map(|p| Tensor::uniform(&p.shape(cfg), -scale, scale, &mut rng)).collect();
    ModelParams::from_tensors(*cfg, tensors).unwrap()
}

/// A random example over `vocab` base ids plus `oov` extension ids.
pub fn random_example(seed: u64, vocab: usize, oov: usize, domains: usize) -> Example {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = vocab + oov;
    let stream = |rng: &mut ChaCha8Rng| -> Vec<usize> {
        let n = rng.gen_range(1..=6);
        (0..n).map(|_| rng.gen_range(4..ext)).collect()
    };
    let user_ids = stream(&mut rng);
    let system_ids = stream(&mut rng);
    let mut target_ids: Vec<usize> = (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(4..ext)).collect();
    target_ids.push(EOS);
    let mut domain_labels: Vec<f64> = (0..domains).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
    domain_labels[0] = 1.0;
    Example {
        id: format!("rand-{seed}"),
        record: DelexRecord { user_stream: vec![], system_stream: vec![], slot_table: SlotTable::default() },
        user_ids,
        system_ids,
        base_size: vocab,
        extension: (0..oov).map(|i| format!("oov{i}")).collect(),
        target_ids,
        domain_labels,
    }
}

pub fn loss_value(params: &[Tensor<f64>], ex: &Example, lambda: f64) -> f64 {
    let mut g = Graph::new(params);
    let l = example_loss(&mut g, ex, lambda).unwrap();
    g.value(l.total).data()[0]
}

/// Denominator floor for relative gradient errors.
pub const GRAD_FLOOR: f64 = 1e-5;

pub struct GradCheck {
    pub max_rel: f64,
    pub max_abs: f64,
    pub coords: usize,
}

/// Compares backward against central differences at up to `per_tensor`
/// random coordinates of every parameter tensor.
pub fn gradient_check(params: &ModelParams<f64>, ex: &Example, lambda: f64, per_tensor: usize, seed: u64) -> GradCheck {
    let mut g = Graph::new(params.tensors());
    let l = example_loss(&mut g, ex, lambda).unwrap();
    let analytic = g.backward(l.total).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::new();
    for (p, t) in params.tensors().iter().enumerate() {
        if t.len() <= per_tensor {
            coords.extend((0..t.len()).map(|i| (p, i)));
        } else {
            coords.extend((0..per_tensor).map(|_| (p, rng.gen_range(0..t.len()))));
        }
    }
    let numeric = finite_diff_coords(|w| loss_value(w, ex, lambda), params.tensors(), 1e-5, &coords);
    let mut out = GradCheck { max_rel: 0.0, max_abs: 0.0, coords: coords.len() };
    for (&(p, i), n) in coords.iter().zip(numeric) {
        let a = analytic[p].data()[i];
        out.max_rel = out.max_rel.max(relative_error(a, n, GRAD_FLOOR));
        out.max_abs = out.max_abs.max((a - n).abs());
    }
    out
}
