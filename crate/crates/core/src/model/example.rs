use crate::corpus::{extend_vocab, DelexRecord, Dialog, DomainInventory, Vocabulary, EOS, RESERVED, PAD};

use super::ModelResult;

/// Whether slot values are replaced by slot tokens before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotMode {
    #[default]
    Delex,
    Lexical,
}

/// A dialog mapped to ids, ready for the network.
#[derive(Debug, Clone)]
pub struct Example {
    pub id: String,
    pub record: DelexRecord,
    /// Extended-vocabulary ids of the user stream.
    pub user_ids: Vec<usize>,
    pub system_ids: Vec<usize>,
    pub base_size: usize,
    /// Source tokens outside the base vocabulary, in id order.
    pub extension: Vec<String>,
    /// Reference summary ids followed by EOS.
    pub target_ids: Vec<usize>,
    pub domain_labels: Vec<f64>,
}

impl Example {
    pub fn from_dialog(dialog: &Dialog, vocab: &Vocabulary, domains: &DomainInventory, mode: SlotMode) -> ModelResult<Self> {
        let mut record = match mode {
            SlotMode::Delex => DelexRecord::from_dialog(dialog)?,
            SlotMode::Lexical => DelexRecord::lexical(dialog),
        };
        for stream in [&mut record.user_stream, &mut record.system_stream] {
            if stream.is_empty() {
                stream.push(RESERVED[PAD].to_string());
            }
        }
        let ext = extend_vocab(vocab, &[&record.user_stream, &record.system_stream]);
        let user_ids = record.user_stream.iter().map(|t| ext.id(t)).collect();
        let system_ids = record.system_stream.iter().map(|t| ext.id(t)).collect();
        let reference = match mode {
            SlotMode::Delex => &dialog.reference_summary_delex,
            SlotMode::Lexical => &dialog.reference_summary,
        };
        let mut target_ids: Vec<usize> = reference.iter().map(|t| ext.id(t)).collect();
        target_ids.push(EOS);
        Ok(Example {
            id: dialog.id.clone(),
            user_ids,
            system_ids,
            base_size: vocab.len(),
            extension: ext.extension().to_vec(),
            target_ids,
            domain_labels: domains.multi_hot(dialog)?,
            record,
        })
    }

    pub fn extended_size(&self) -> usize {
        self.base_size + self.extension.len()
    }

    pub fn token<'a>(&'a self, vocab: &'a Vocabulary, id: usize) -> &'a str {
        if id < self.base_size {
            vocab.token(id)
        } else {
            &self.extension[id - self.base_size]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, generate_synthetic_corpus, SyntheticConfig, UNK};

    #[test]
    fn ids_and_targets() {
        let cfg = SyntheticConfig::standard();
        let dialogs = generate_synthetic_corpus(1, 4, &cfg);
        let vocab = build_vocab(
            dialogs.iter().flat_map(|d| d.reference_summary_delex.iter().map(String::as_str)),
            1000,
            &cfg.slot_inventory(),
        )
        .unwrap();
        let ex = Example::from_dialog(&dialogs[0], &vocab, &cfg.domains(), SlotMode::Delex).unwrap();
        assert_eq!(ex.user_ids.len(), ex.record.user_stream.len());
        assert_eq!(*ex.target_ids.last().unwrap(), EOS);
        assert!(ex.target_ids.iter().all(|&i| i < ex.extended_size()));
        assert!(!ex.user_ids.contains(&UNK));
        for (&id, tok) in ex.user_ids.iter().zip(&ex.record.user_stream) {
            assert_eq!(ex.token(&vocab, id), tok);
        }
        assert!(ex.domain_labels.iter().sum::<f64>() >= 1.0);
    }
}
