use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Subcommand};
use log::{info, warn};
use serde::Serialize;

use spnet::corpus::{
    convert_multiwoz, generate_synthetic_corpus, read_jsonl, slot_name, split_corpus, write_jsonl, CanonicalizationTable, Dialog,
    DomainInventory, SlotInventory, SplitSizes, SyntheticConfig, Vocabulary,
};
use spnet::eval::{evaluate_model, MetricReport, ModelSummarizer, ReferenceSummarizer};
use spnet::model::{summarize, BeamConfig, DecodeStrategy, Example, SlotFill, MAX_DECODE_LEN};
use spnet::numcore::{Precision, Real};
use spnet::train::{corpus_vocabulary, load_checkpoint, read_checkpoint_precision, save_checkpoint, Checkpoint, EpochStats, Trainer};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Convert a MultiWOZ annotation file, or generate a synthetic corpus, into JSONL splits.
    Convert(ConvertArgs),
    /// Train a model and write checkpoints plus a per-epoch log.
    Train(TrainArgs),
    /// Summarize dialogs with a trained checkpoint.
    Summarize(SummarizeArgs),
    /// Score summaries against references.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    /// MultiWOZ `data.json`.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate this many synthetic dialogs instead of reading an input file.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Output directory for train/valid/test JSONL and the manifest.
    #[arg(long)]
    pub output: PathBuf,
    /// Split sizes as `train,valid,test`; defaults to 8438,1000,1000 for
    /// MultiWOZ and an 80/10/10 split for synthetic corpora.
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Slot canonicalization table replacing the shipped one.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Flat `key = value` run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Output directory for checkpoints and the training log.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// `f32` or `f64`.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub beam: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// `full`, `toy` or `tiny`.
    #[arg(long)]
    pub model: Option<String>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// Beam width; the checkpoint's configured width when absent.
    #[arg(long, conflicts_with = "greedy")]
    pub beam: Option<usize>,
    #[arg(long)]
    pub greedy: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dialog JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// Summary JSONL.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long, required_unless_present = "self_check")]
    pub checkpoint: Option<PathBuf>,
    /// Score each reference against itself instead of decoding.
    #[arg(long, conflicts_with = "checkpoint")]
    pub self_check: bool,
    /// Test dialog JSONL.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving `report.json` and `report.txt`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub decode: DecodeArgs,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(CliError::input)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(CliError::input)
}

fn read_dialogs(path: &Path) -> CliResult<Vec<Dialog>> {
    read_jsonl(path).map_err(CliError::input)
}

#[derive(Debug, Serialize)]
struct Manifest {
    source: String,
    seed: u64,
    canonicalization_version: String,
    counts: BTreeMap<&'static str, usize>,
    skipped: Vec<(String, String)>,
    rejected: Vec<(String, String)>,
}

pub fn cmd_convert(args: &ConvertArgs) -> CliResult<()> {
    let table = match &args.table {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(CliError::input)?;
            CanonicalizationTable::parse(&text).map_err(CliError::input)?
        }
        None => CanonicalizationTable::shipped(),
    };
    let (dialogs, report, source) = match (&args.input, args.synthetic) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(CliError::input)?;
            let raw: serde_json::Value =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(CliError::input)?;
            let (dialogs, report) = convert_multiwoz(&raw, &table).map_err(CliError::input)?;
            (dialogs, report, path.display().to_string())
        }
        (None, Some(n)) => (generate_synthetic_corpus(args.seed, n, &SyntheticConfig::standard()), Default::default(), format!("synthetic:{n}")),
        (None, None) => return Err(CliError::input(anyhow!("either --input or --synthetic is required"))),
    };
    let sizes = match &args.split {
        Some(s) => SplitSizes::parse(s).map_err(CliError::input)?,
        None if args.synthetic.is_some() => {
            let n = dialogs.len();
            let valid = n / 10;
            SplitSizes { train: n - 2 * valid, valid, test: valid }
        }
        None => SplitSizes::default(),
    };
    let splits = split_corpus(dialogs, sizes, args.seed).map_err(CliError::input)?;
    create_dir(&args.output)?;
    for (name, part) in [("train", &splits.train), ("valid", &splits.valid), ("test", &splits.test)] {
        write_jsonl(&args.output.join(format!("{name}.jsonl")), part).map_err(CliError::input)?;
    }
    let manifest = Manifest {
        source,
        seed: args.seed,
        canonicalization_version: table.version().to_string(),
        counts: BTreeMap::from([("train", splits.train.len()), ("valid", splits.valid.len()), ("test", splits.test.len())]),
        skipped: report.skipped,
        rejected: report.rejected,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(CliError::input)?;
    write_file(&args.output.join("manifest.json"), &(json + "\n"))?;
    info!("wrote {}/{}/{} dialogs to {}", sizes.train, sizes.valid, sizes.test, args.output.display());
    Ok(())
}

fn train_flags(args: &TrainArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    put("train", path(&args.train));
    put("valid", path(&args.valid));
    put("out", path(&args.out));
    put("seed", args.seed.map(|v| v.to_string()));
    put("lambda", args.lambda.map(|v| v.to_string()));
    put("precision", args.precision.clone());
    put("beam_size", args.beam.map(|v| v.to_string()));
    put("max_epochs", args.max_epochs.map(|v| v.to_string()));
    put("model", args.model.clone());
    m
}

/// Domain names in first-appearance order over the training dialogs.
fn corpus_domains(dialogs: &[Dialog]) -> DomainInventory {
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for d in dialogs {
        for name in &d.domains {
            if seen.insert(name.clone()) {
                names.push(name.clone());
            }
        }
    }
    DomainInventory(names)
}

fn slot_inventory(dialogs: &[Dialog]) -> SlotInventory {
    let mut inv = CanonicalizationTable::shipped().inventory();
    for d in dialogs {
        for s in d.turns.iter().flat_map(|t| &t.slot_spans).chain(&d.summary_spans) {
            inv.insert(s.slot.clone());
        }
    }
    inv
}

pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(args.config.as_deref(), train_flags(args)).map_err(CliError::input)?;
    if let Some(ckpt) = &args.resume {
        let found = read_checkpoint_precision(ckpt)?;
        if found != cfg.training.precision {
            return Err(CliError::input(anyhow!(
                "checkpoint {} holds {found} parameters but the run is configured for {}",
                ckpt.display(),
                cfg.training.precision
            )));
        }
    }
    match cfg.training.precision {
        Precision::F32 => train_with::<f32>(&cfg, args.resume.as_deref()),
        Precision::F64 => train_with::<f64>(&cfg, args.resume.as_deref()),
    }
}

fn train_with<T: Real>(cfg: &RunConfig, resume: Option<&Path>) -> CliResult<()> {
    let train = read_dialogs(&cfg.train)?;
    let valid = match &cfg.valid {
        Some(p) => read_dialogs(p)?,
        None => Vec::new(),
    };
    if train.is_empty() {
        return Err(CliError::input(anyhow!("training set {} is empty", cfg.train.display())));
    }
    let mut trainer = match resume {
        Some(path) => {
            let mut t = Trainer::from_checkpoint(load_checkpoint::<T>(path)?);
            t.config.max_epochs = cfg.training.max_epochs;
            t.config.stop_loss1 = cfg.training.stop_loss1;
            t
        }
        None => {
            let domains = match &cfg.domains {
                Some(names) => DomainInventory(names.clone()),
                None => corpus_domains(&train),
            };
            let vocab = corpus_vocabulary(&train, cfg.training.slot_mode, cfg.training.vocab_max, &slot_inventory(&train))?;
            let model = cfg.model_config(vocab.len(), domains.len()).map_err(CliError::input)?;
            Trainer::<T>::new(cfg.training.clone(), model, vocab, domains)?
        }
    };
    let train_ex = trainer.prepare(&train)?;
    let valid_ex = trainer.prepare(&valid)?;
    create_dir(&cfg.out)?;
    let log_path = cfg.out.join("train_log.csv");
    let mut log = if resume.is_some() && log_path.exists() {
        fs::read_to_string(&log_path).with_context(|| format!("reading {}", log_path.display())).map_err(CliError::input)?
    } else {
        format!("{}\n", EpochStats::CSV_HEADER)
    };
    let mut last = None;
    while trainer.should_continue(last.as_ref()) {
        let (stats, best) = trainer.run_epoch(&train_ex, &valid_ex)?;
        log.push_str(&stats.csv_row());
        log.push('\n');
        write_file(&log_path, &log)?;
        let ckpt = trainer.checkpoint();
        save_checkpoint(&cfg.out.join("last.ckpt"), &ckpt)?;
        if best || valid_ex.is_empty() {
            save_checkpoint(&cfg.out.join("best.ckpt"), &ckpt)?;
        }
        last = Some(stats);
    }
    info!("finished after {} epochs; best validation loss {:?}", trainer.epoch, trainer.best_val);
    Ok(())
}

fn strategy(decode: &DecodeArgs, configured_beam: usize) -> CliResult<DecodeStrategy> {
    if decode.greedy {
        return Ok(DecodeStrategy::Greedy { max_len: MAX_DECODE_LEN });
    }
    let beam = decode.beam.unwrap_or(configured_beam);
    if beam == 0 {
        return Err(CliError::input(anyhow!("--beam must be at least 1")));
    }
    Ok(DecodeStrategy::Beam(BeamConfig { beam, ..BeamConfig::default() }))
}

/// Checks every dialog against the slots the model knows, plus any slot the dialogs declare.
fn validate_dialogs(dialogs: &[Dialog], vocab: Option<&Vocabulary>) -> CliResult<()> {
    let mut inv = slot_inventory(dialogs);
    for t in vocab.map(Vocabulary::tokens).unwrap_or_default() {
        if let Some(name) = slot_name(t) {
            inv.insert(name);
        }
    }
    for d in dialogs {
        d.validate(&inv).map_err(CliError::input)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SummaryRecord<'a> {
    id: &'a str,
    summary: String,
    template: String,
    fills: &'a [SlotFill],
    unresolved: usize,
    log_prob: f64,
}

pub fn cmd_summarize(args: &SummarizeArgs) -> CliResult<()> {
    match read_checkpoint_precision(&args.checkpoint)? {
        Precision::F32 => summarize_with::<f32>(args),
        Precision::F64 => summarize_with::<f64>(args),
    }
}

fn summarize_with<T: Real>(args: &SummarizeArgs) -> CliResult<()> {
    let ckpt: Checkpoint<T> = load_checkpoint(&args.checkpoint)?;
    let dialogs = read_dialogs(&args.input)?;
    validate_dialogs(&dialogs, Some(&ckpt.vocab))?;
    let strategy = strategy(&args.decode, ckpt.training.beam_size)?;
    let file = File::create(&args.output).with_context(|| format!("creating {}", args.output.display())).map_err(CliError::input)?;
    let mut out = BufWriter::new(file);
    let (mut unresolved, mut flagged) = (0, 0);
    for d in &dialogs {
        let ex = Example::from_dialog(d, &ckpt.vocab, &ckpt.domains, ckpt.training.slot_mode).map_err(CliError::input)?;
        let s = summarize(&ckpt.params, &ex, &ckpt.vocab, &strategy).map_err(CliError::input)?;
        if s.unresolved > 0 {
            unresolved += s.unresolved;
            flagged += 1;
            warn!("dialog {}: {} unresolved slot tokens", s.id, s.unresolved);
        }
        let rec = SummaryRecord {
            id: &s.id,
            summary: s.surface.join(" "),
            template: s.template.join(" "),
            fills: &s.fills,
            unresolved: s.unresolved,
            log_prob: s.log_prob,
        };
        let line = serde_json::to_string(&rec).map_err(CliError::input)?;
        writeln!(out, "{line}").with_context(|| format!("writing {}", args.output.display())).map_err(CliError::input)?;
    }
    out.flush().with_context(|| format!("writing {}", args.output.display())).map_err(CliError::input)?;
    eprintln!("summarized {} dialogs; {unresolved} unresolved slot tokens in {flagged} summaries", dialogs.len());
    Ok(())
}

fn write_report(report: &MetricReport, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    write_file(&dir.join("report.json"), &(report.to_json() + "\n"))?;
    write_file(&dir.join("report.txt"), &report.to_text())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let dialogs = read_dialogs(&args.input)?;
    let report = match &args.checkpoint {
        None => {
            validate_dialogs(&dialogs, None)?;
            evaluate_model(&mut ReferenceSummarizer, &dialogs).map_err(CliError::input)?
        }
        Some(path) => match read_checkpoint_precision(path)? {
            Precision::F32 => evaluate_with::<f32>(path, &dialogs, &args.decode)?,
            Precision::F64 => evaluate_with::<f64>(path, &dialogs, &args.decode)?,
        },
    };
    write_report(&report, &args.output)?;
    print!("{}", report.to_text());
    Ok(())
}

fn evaluate_with<T: Real>(path: &Path, dialogs: &[Dialog], decode: &DecodeArgs) -> CliResult<MetricReport> {
    let ckpt: Checkpoint<T> = load_checkpoint(path)?;
    validate_dialogs(dialogs, Some(&ckpt.vocab))?;
    let mut summarizer = ModelSummarizer {
        params: &ckpt.params,
        vocab: &ckpt.vocab,
        domains: &ckpt.domains,
        mode: ckpt.training.slot_mode,
        strategy: strategy(decode, ckpt.training.beam_size)?,
    };
    evaluate_model(&mut summarizer, dialogs).map_err(CliError::input)
}
