//! Binary checkpoints, little-endian throughout:
//!
//! ```text
//! magic "SPNETCKP" | version u32 | precision u8 (bytes per value)
//! header_len u64 | header (JSON: configs, vocabulary, domains, counters)
//! n_arrays u32 | per array: ndim u32, dims u64 × ndim
//! raw values of every array in table order
//! SHA-256 of all preceding bytes
//! ```
//!
//! The array table holds the model parameters, then Adam's first moments,
//! then its second moments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{DomainInventory, Vocabulary};
use crate::model::{ModelConfig, ModelParams};
use crate::numcore::{AdamConfig, AdamState, Precision, Real, Tensor};

use super::config::TrainingConfig;
use super::schedule::LrSchedule;
use super::{TrainError, TrainResult};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SPNETCKP";
pub const CHECKPOINT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub training: TrainingConfig,
    pub params: ModelParams<T>,
    pub adam: AdamState<T>,
    pub schedule: LrSchedule,
    pub vocab: Vocabulary,
    pub domains: DomainInventory,
    pub epoch: usize,
    pub best_val: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    training: TrainingConfig,
    model: ModelConfig,
    adam: AdamConfig,
    adam_t: u64,
    schedule: LrSchedule,
    vocab: Vec<String>,
    domains: DomainInventory,
    epoch: usize,
    best_val: Option<f64>,
}

fn put_u32(b: &mut Vec<u8>, v: u32) {
    b.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(b: &mut Vec<u8>, v: u64) {
    b.extend_from_slice(&v.to_le_bytes());
}

pub fn encode_checkpoint<T: Real>(ckpt: &Checkpoint<T>) -> TrainResult<Vec<u8>> {
    let header = Header {
        training: ckpt.training.clone(),
        model: *ckpt.params.config(),
        adam: ckpt.adam.config,
        adam_t: ckpt.adam.t,
        schedule: ckpt.schedule.clone(),
        vocab: ckpt.vocab.tokens().to_vec(),
        domains: ckpt.domains.clone(),
        epoch: ckpt.epoch,
        best_val: ckpt.best_val,
    };
    let json = serde_json::to_vec(&header).map_err(|e| TrainError::Config(e.to_string()))?;
    let arrays: Vec<&Tensor<T>> = ckpt.params.tensors().iter().chain(&ckpt.adam.m).chain(&ckpt.adam.v).collect();
    let mut b = Vec::new();
    b.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut b, CHECKPOINT_VERSION);
    b.push(T::PRECISION.bytes() as u8);
    put_u64(&mut b, json.len() as u64);
    b.extend_from_slice(&json);
    put_u32(&mut b, arrays.len() as u32);
    for a in &arrays {
        put_u32(&mut b, a.shape().len() as u32);
        for &d in a.shape() {
            put_u64(&mut b, d as u64);
        }
    }
    for a in &arrays {
        for &x in a.data() {
            x.write_le(&mut b);
        }
    }
    let digest = Sha256::digest(&b);
    b.extend_from_slice(&digest);
    Ok(b)
}

pub fn save_checkpoint<T: Real>(path: &Path, ckpt: &Checkpoint<T>) -> TrainResult<()> {
    let bytes = encode_checkpoint(ckpt)?;
    let tmp = path.with_extension("tmp");
    let err = |e: std::io::Error| TrainError::Checkpoint { path: path.display().to_string(), msg: e.to_string() };
    fs::write(&tmp, &bytes).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("unexpected end of data")?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Verifies the checksum and fixed prefix; returns the body and its precision.
fn verify(bytes: &[u8]) -> Result<(&[u8], Precision), String> {
    if bytes.len() < CHECKPOINT_MAGIC.len() + 5 + DIGEST_LEN {
        return Err("file too short".into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if &bytes[..8] != CHECKPOINT_MAGIC {
        return Err("not a checkpoint file".into());
    }
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch (truncated or corrupted)".into());
    }
    let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported format version {version}, expected {CHECKPOINT_VERSION}"));
    }
    let precision = match body[12] {
        4 => Precision::F32,
        8 => Precision::F64,
        p => return Err(format!("unknown precision tag {p}")),
    };
    Ok((body, precision))
}

/// Precision of the checkpoint at `path`, after full verification.
pub fn read_checkpoint_precision(path: &Path) -> TrainResult<Precision> {
    let err = |msg: String| TrainError::Checkpoint { path: path.display().to_string(), msg };
    let bytes = fs::read(path).map_err(|e| err(e.to_string()))?;
    verify(&bytes).map(|(_, p)| p).map_err(err)
}

pub fn decode_checkpoint<T: Real>(bytes: &[u8], path: &str) -> TrainResult<Checkpoint<T>> {
    let err = |msg: String| TrainError::Checkpoint { path: path.to_string(), msg };
    let (body, precision) = verify(bytes).map_err(err)?;
    if precision != T::PRECISION {
        return Err(TrainError::PrecisionMismatch { path: path.to_string(), found: precision, expected: T::PRECISION });
    }
    let mut r = Reader { buf: body, pos: 13 };
    let parse = |r: &mut Reader| -> Result<(Header, Vec<Tensor<T>>), String> {
        let hlen = r.u64()? as usize;
        let header: Header = serde_json::from_slice(r.take(hlen)?).map_err(|e| format!("header: {e}"))?;
        let n = r.u32()? as usize;
        let mut shapes = Vec::with_capacity(n);
        for _ in 0..n {
            let nd = r.u32()? as usize;
            shapes.push((0..nd).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?);
        }
        let width = T::PRECISION.bytes();
        let mut arrays = Vec::with_capacity(n);
        for shape in shapes {
            let len: usize = shape.iter().product();
            let raw = r.take(len.checked_mul(width).ok_or("array too large")?)?;
            let data = raw.chunks_exact(width).map(T::read_le).collect();
            arrays.push(Tensor::new(shape, data).map_err(|e| e.to_string())?);
        }
        if r.pos != r.buf.len() {
            return Err("trailing bytes after arrays".into());
        }
        Ok((header, arrays))
    };
    let (h, mut arrays) = parse(&mut r).map_err(err)?;
    let np = crate::model::Param::ALL.len();
    if arrays.len() != 3 * np {
        return Err(err(format!("expected {} arrays, found {}", 3 * np, arrays.len())));
    }
    let v = arrays.split_off(2 * np);
    let m = arrays.split_off(np);
    let params = ModelParams::from_tensors(h.model, arrays)?;
    let adam = AdamState { m, v, t: h.adam_t, config: h.adam };
    params.store().check_conformant(&adam.m)?;
    params.store().check_conformant(&adam.v)?;
    Ok(Checkpoint {
        training: h.training,
        params,
        adam,
        schedule: h.schedule,
        vocab: Vocabulary::from_tokens(h.vocab)?,
        domains: h.domains,
        epoch: h.epoch,
        best_val: h.best_val,
    })
}

pub fn load_checkpoint<T: Real>(path: &Path) -> TrainResult<Checkpoint<T>> {
    let bytes =
        fs::read(path).map_err(|e| TrainError::Checkpoint { path: path.display().to_string(), msg: e.to_string() })?;
    decode_checkpoint(&bytes, &path.display().to_string())
}
