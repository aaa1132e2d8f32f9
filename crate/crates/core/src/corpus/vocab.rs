use std::collections::{BTreeSet, HashMap};

use super::slots::SlotInventory;
use super::tokenize::is_slot_token;
use super::CorpusError;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const SOS: usize = 2;
pub const EOS: usize = 3;
pub const RESERVED: [&str; 4] = ["<pad>", "<unk>", "<s>", "</s>"];

/// Fixed token ↔ id bijection. Ids 0..4 are reserved; slot tokens never map to UNK.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from its id-ordered token list.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.len() < RESERVED.len() || tokens[..RESERVED.len()] != RESERVED {
            return Err(CorpusError::Config("vocabulary must start with the reserved tokens".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(CorpusError::Config(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn id(&self, token: &str) -> usize {
        self.get(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_slot_id(&self, id: usize) -> bool {
        id < self.len() && is_slot_token(&self.tokens[id])
    }
}

/// Reserved tokens, then every slot token (inventory plus any slot-shaped
/// corpus token), then the most frequent remaining tokens up to `max_size`.
/// Count ties are broken lexicographically.
pub fn build_vocab<'a, I>(tokens: I, max_size: usize, slots: &SlotInventory) -> Result<Vocabulary, CorpusError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut slot_tokens: BTreeSet<String> = slots.tokens().into_iter().collect();
    let mut seen_any = false;
    for t in tokens {
        seen_any = true;
        if is_slot_token(t) {
            slot_tokens.insert(t.to_string());
        } else if !RESERVED.contains(&t) {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    if !seen_any {
        return Err(CorpusError::Config("cannot build a vocabulary from an empty corpus".into()));
    }
    let fixed = RESERVED.len() + slot_tokens.len();
    if max_size < fixed {
        return Err(CorpusError::Config(format!(
            "max vocabulary size {max_size} is smaller than the {fixed} reserved and slot tokens"
        )));
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut list: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    list.extend(slot_tokens);
    list.extend(ranked.into_iter().take(max_size - fixed).map(|(t, _)| t.to_string()));
    Vocabulary::from_tokens(list)
}

/// Base vocabulary plus the out-of-vocabulary tokens of one example's source.
#[derive(Debug, Clone)]
pub struct ExtendedVocab<'v> {
    base: &'v Vocabulary,
    oov: Vec<String>,
    oov_index: HashMap<String, usize>,
}

/// OOV tokens are appended in first-occurrence order across the streams
/// (user stream first, then system stream).
pub fn extend_vocab<'v>(vocab: &'v Vocabulary, streams: &[&[String]]) -> ExtendedVocab<'v> {
    let mut ext = ExtendedVocab { base: vocab, oov: Vec::new(), oov_index: HashMap::new() };
    for stream in streams {
        for t in stream.iter() {
            if vocab.get(t).is_none() && !ext.oov_index.contains_key(t) {
                ext.oov_index.insert(t.clone(), vocab.len() + ext.oov.len());
                ext.oov.push(t.clone());
            }
        }
    }
    ext
}

impl<'v> ExtendedVocab<'v> {
    pub fn base(&self) -> &'v Vocabulary {
        self.base
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn len(&self) -> usize {
        self.base.len() + self.oov.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extension(&self) -> &[String] {
        &self.oov
    }

    /// Base id, else extension id, else UNK.
    pub fn id(&self, token: &str) -> usize {
        self.base.get(token).or_else(|| self.oov_index.get(token).copied()).unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        if id < self.base.len() {
            self.base.token(id)
        } else {
            &self.oov[id - self.base.len()]
        }
    }

    /// Id usable for an embedding lookup: extension ids become UNK.
    pub fn input_id(&self, id: usize) -> usize {
        if id < self.base.len() {
            id
        } else {
            UNK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv() -> SlotInventory {
        SlotInventory::new(["time".to_string(), "food".to_string()])
    }

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_token_corpus() {
        let v = build_vocab(["a", "a", "a"], 100, &inv()).unwrap();
        assert_eq!(v.tokens(), strs(&["<pad>", "<unk>", "<s>", "</s>", "[food]", "[time]", "a"]).as_slice());
        assert_eq!(v.id("[time]"), 5);
        assert_eq!(v.id("zzz"), UNK);
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = build_vocab(["c", "b", "a", "c", "b", "a", "d", "d", "d"], 8, &inv()).unwrap();
        assert_eq!(&v.tokens()[6..], ["d", "a"]);
    }

    #[test]
    fn too_small_is_config_error() {
        assert!(matches!(build_vocab(["a"], 5, &inv()), Err(CorpusError::Config(_))));
        assert!(build_vocab(std::iter::empty(), 50, &inv()).is_err());
    }

    #[test]
    fn extension_order_and_dedup() {
        let v = build_vocab(["x"], 100, &inv()).unwrap();
        let user = strs(&["x", "unkword"]);
        let sys = strs(&["unkword"]);
        let ext = extend_vocab(&v, &[&user, &sys]);
        assert_eq!(ext.extension(), ["unkword"]);

        let user = strs(&["p", "x", "q"]);
        let sys = strs(&["q", "r", "p"]);
        let ext = extend_vocab(&v, &[&user, &sys]);
        let base = v.len();
        assert_eq!((ext.id("p"), ext.id("q"), ext.id("r")), (base, base + 1, base + 2));
        assert_eq!(ext.token(base + 2), "r");
        assert_eq!(ext.input_id(base + 1), UNK);

        let none = extend_vocab(&v, &[&strs(&["x"]), &strs(&["[time]"])]);
        assert!(none.extension().is_empty());
    }
}
