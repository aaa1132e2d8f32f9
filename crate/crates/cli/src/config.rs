//! Flat `key = value` run configuration for `train`.
//!
//! Blank lines and lines starting with `#` are ignored. Command-line flags
//! override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};

use spnet::model::{ModelConfig, SlotMode};
use spnet::numcore::Precision;
use spnet::train::TrainingConfig;

const PATH_KEYS: &[&str] = &["train", "valid", "out"];

/// Keys accepted in a training config file.
pub const KEYS: &[&str] = &[
    "train",
    "valid",
    "out",
    "model",
    "embed_dim",
    "encoder_hidden",
    "attention_dim",
    "output_hidden",
    "classifier_hidden",
    "domains",
    "lambda",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "batch_size",
    "beam_size",
    "max_epochs",
    "seed",
    "precision",
    "lr_halving",
    "max_grad_norm",
    "slot_mode",
    "vocab_max",
    "stop_loss1",
];

pub fn parse_kv(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            bail!("line {}: unknown key '{k}'", i + 1);
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            bail!("line {}: duplicate key '{k}'", i + 1);
        }
    }
    Ok(out)
}

/// Everything `train` needs, resolved and validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: PathBuf,
    pub valid: Option<PathBuf>,
    pub out: PathBuf,
    pub model_profile: String,
    pub model_overrides: BTreeMap<String, usize>,
    /// Explicit domain inventory; derived from the training set when absent.
    pub domains: Option<Vec<String>>,
    pub training: TrainingConfig,
}

fn num<T: std::str::FromStr>(k: &str, v: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| anyhow!("{k}: cannot parse '{v}': {e}"))
}

fn boolean(k: &str, v: &str) -> anyhow::Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => bail!("{k}: expected true or false, got '{v}'"),
    }
}

impl RunConfig {
    /// Builds a config from parsed keys; relative paths resolve against `base`.
    pub fn from_map(map: &BTreeMap<String, String>, base: &Path) -> anyhow::Result<Self> {
        let path = |k: &str| map.get(k).map(|v| base.join(v));
        let mut t = TrainingConfig::default();
        let mut overrides = BTreeMap::new();
        for (k, v) in map {
            match k.as_str() {
                "lambda" => t.lambda = num(k, v)?,
                "learning_rate" => t.learning_rate = num(k, v)?,
                "beta1" => t.beta1 = num(k, v)?,
                "beta2" => t.beta2 = num(k, v)?,
                "epsilon" => t.epsilon = num(k, v)?,
                "batch_size" => t.batch_size = num(k, v)?,
                "beam_size" => t.beam_size = num(k, v)?,
                "max_epochs" => t.max_epochs = num(k, v)?,
                "seed" => t.seed = num(k, v)?,
                "precision" => t.precision = Precision::parse(v).ok_or_else(|| anyhow!("precision: expected f32 or f64, got '{v}'"))?,
                "lr_halving" => t.lr_halving = boolean(k, v)?,
                "max_grad_norm" => t.max_grad_norm = if v == "off" { None } else { Some(num(k, v)?) },
                "slot_mode" => {
                    t.slot_mode = match v.as_str() {
                        "delex" => SlotMode::Delex,
                        "lexical" => SlotMode::Lexical,
                        _ => bail!("slot_mode: expected delex or lexical, got '{v}'"),
                    }
                }
                "vocab_max" => t.vocab_max = num(k, v)?,
                "stop_loss1" => t.stop_loss1 = if v == "off" { None } else { Some(num(k, v)?) },
                "embed_dim" | "encoder_hidden" | "attention_dim" | "output_hidden" | "classifier_hidden" => {
                    overrides.insert(k.clone(), num(k, v)?);
                }
                _ => {}
            }
        }
        let cfg = RunConfig {
            train: path("train").ok_or_else(|| anyhow!("missing required key 'train'"))?,
            valid: path("valid"),
            out: path("out").ok_or_else(|| anyhow!("missing required key 'out'"))?,
            model_profile: map.get("model").cloned().unwrap_or_else(|| "toy".into()),
            model_overrides: overrides,
            domains: map.get("domains").map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
            training: t,
        };
        cfg.model_config(1, 1)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        Self::resolve(Some(path), BTreeMap::new())
    }

    /// Reads the optional config file, then applies `flags` on top. Paths
    /// in the file are relative to its directory; flag paths are taken as given.
    pub fn resolve(file: Option<&Path>, flags: BTreeMap<String, String>) -> anyhow::Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            map = parse_kv(&text).with_context(|| format!("config {}", path.display()))?;
            let dir = path.parent().unwrap_or(Path::new("."));
            for k in PATH_KEYS {
                if let Some(v) = map.get_mut(*k) {
                    *v = dir.join(&*v).display().to_string();
                }
            }
        }
        for (k, v) in flags {
            if !KEYS.contains(&k.as_str()) {
                bail!("unknown key '{k}'");
            }
            map.insert(k, v);
        }
        let cfg = Self::from_map(&map, Path::new(""))?;
        cfg.training.validate()?;
        Ok(cfg)
    }

    pub fn model_config(&self, vocab_size: usize, num_domains: usize) -> anyhow::Result<ModelConfig> {
        let mut m = match self.model_profile.as_str() {
            "full" => ModelConfig::full(vocab_size, num_domains),
            "toy" => ModelConfig::toy(vocab_size, num_domains),
            "tiny" => ModelConfig::tiny(vocab_size, num_domains),
            other => bail!("model: expected full, toy or tiny, got '{other}'"),
        };
        for (k, &v) in &self.model_overrides {
            match k.as_str() {
                "embed_dim" => m.embed_dim = v,
                "encoder_hidden" => {
                    m.encoder_hidden = v;
                    m.decoder_hidden = 2 * v;
                }
                "attention_dim" => m.attention_dim = v,
                "output_hidden" => m.output_hidden = v,
                "classifier_hidden" => m.classifier_hidden = v,
                _ => unreachable!("validated key"),
            }
        }
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown() {
        let m = parse_kv("# comment\ntrain = a.jsonl\nout=run\n\nlambda = 0\n").unwrap();
        let c = RunConfig::from_map(&m, Path::new("/data")).unwrap();
        assert_eq!(c.train, Path::new("/data/a.jsonl"));
        assert_eq!(c.training.lambda, 0.0);
        assert!(parse_kv("bogus = 1").is_err());
        assert!(parse_kv("lambda = 1\nlambda = 2").is_err());
        assert!(parse_kv("no equals sign").is_err());
    }

    #[test]
    fn bad_values_rejected() {
        for text in ["train=a\nout=b\nprecision=f16", "train=a\nout=b\nslot_mode=x", "train=a\nout=b\nmodel=huge", "out=b"] {
            let m = parse_kv(text).unwrap();
            assert!(RunConfig::from_map(&m, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "train = data/train.jsonl\nout = run\nlambda = 0.5\nseed = 3\n").unwrap();
        let flags = BTreeMap::from([("lambda".to_string(), "0".to_string())]);
        let c = RunConfig::resolve(Some(&path), flags).unwrap();
        assert_eq!(c.training.lambda, 0.0);
        assert_eq!(c.training.seed, 3);
        assert_eq!(c.train, dir.path().join("data/train.jsonl"));
        let bad = BTreeMap::from([("beam_size".to_string(), "0".to_string())]);
        assert!(RunConfig::resolve(Some(&path), bad).is_err());
    }

    #[test]
    fn model_overrides_apply() {
        let m = parse_kv("train=a\nout=b\nmodel=tiny\nencoder_hidden=12").unwrap();
        let c = RunConfig::from_map(&m, Path::new(".")).unwrap();
        let mc = c.model_config(30, 2).unwrap();
        assert_eq!((mc.encoder_hidden, mc.decoder_hidden), (12, 24));
    }
}
