//! Dialog corpora: schema, slot canonicalization, delexicalization,
//! vocabularies, the MultiWOZ converter and a synthetic generator.

mod delex;
mod dialog;
pub mod multiwoz;
mod slots;
pub mod synthetic;
mod tokenize;
mod vocab;

use std::path::Path;

use thiserror::Error;

pub use delex::{delexicalize_tokens, delexicalize_turn, relexicalize_text, DelexRecord, RelexReport, SlotEntry, SlotTable};
pub use dialog::{read_jsonl, validate_spans, write_jsonl, Dialog, DomainInventory, Role, SlotSpan, Turn};
pub use multiwoz::{convert_multiwoz, split_corpus, ConversionReport, SplitSizes, Splits};
pub use slots::{slot_name, slot_token, CanonicalSlot, CanonicalizationTable, SlotInventory};
pub use synthetic::{generate_synthetic_corpus, DomainTemplate, SyntheticConfig};
pub use tokenize::{is_slot_token, normalize_value, tokenize};
pub use vocab::{build_vocab, extend_vocab, ExtendedVocab, Vocabulary, EOS, PAD, RESERVED, SOS, UNK};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid slot span: {0}")]
    Span(String),
    #[error("dialog {id}: {msg}")]
    Schema { id: String, msg: String },
    #[error("canonicalization table: {0}")]
    Table(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Json { path: String, line: usize, msg: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.display().to_string(), source }
    }
}
