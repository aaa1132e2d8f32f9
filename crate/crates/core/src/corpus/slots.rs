use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use super::CorpusError;

const SHIPPED_TABLE: &str = include_str!("../../data/slot_canonicalization.tsv");

/// Canonical slot name such as `time`; rendered in text as `[time]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalSlot(String);

impl CanonicalSlot {
    pub fn new(name: impl Into<String>) -> Self {
        CanonicalSlot(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn token(&self) -> String {
        slot_token(&self.0)
    }
}

pub fn slot_token(name: &str) -> String {
    format!("[{name}]")
}

/// Strips the brackets of a slot token.
pub fn slot_name(token: &str) -> Option<&str> {
    token.strip_prefix('[')?.strip_suffix(']')
}

/// Versioned mapping from domain-qualified slot names to canonical slots.
#[derive(Debug, Clone)]
pub struct CanonicalizationTable {
    version: String,
    map: BTreeMap<String, String>,
}

impl CanonicalizationTable {
    /// The table shipped in `data/slot_canonicalization.tsv`.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_TABLE).expect("shipped canonicalization table parses")
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut version = None;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(key), Some(val), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(CorpusError::Table(format!("line {}: expected two tab-separated columns", lineno + 1)));
            };
            if key == "version" {
                version = Some(val.to_string());
            } else if map.insert(key.to_lowercase(), val.to_string()).is_some() {
                return Err(CorpusError::Table(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        let version = version.ok_or_else(|| CorpusError::Table("missing version line".into()))?;
        Ok(CanonicalizationTable { version, map })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn lookup(&self, qualified: &str) -> Option<CanonicalSlot> {
        self.map.get(&qualified.to_lowercase()).map(|s| CanonicalSlot::new(s.clone()))
    }

    /// Canonical slot for a domain-qualified name; unknown names pass
    /// through (lowercased, still domain-qualified) with a warning.
    pub fn canonicalize_slot(&self, qualified: &str) -> CanonicalSlot {
        self.lookup(qualified).unwrap_or_else(|| {
            warn!("unknown slot `{qualified}` kept domain-qualified");
            CanonicalSlot::new(qualified.to_lowercase())
        })
    }

    /// Every canonical slot the table can produce.
    pub fn inventory(&self) -> SlotInventory {
        SlotInventory::new(self.map.values().cloned())
    }
}

/// Set of slot names that may appear as slot tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotInventory {
    names: BTreeSet<String>,
}

impl SlotInventory {
    pub fn new<I: IntoIterator<Item = String>>(names: I) -> Self {
        SlotInventory { names: names.into_iter().collect() }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.names.insert(name.into());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn tokens(&self) -> Vec<String> {
        self.names.iter().map(|n| slot_token(n)).collect()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_time_keeps_distinct_information_apart() {
        let t = CanonicalizationTable::shipped();
        assert_eq!(t.canonicalize_slot("restaurant-book-time").token(), "[time]");
        assert_eq!(t.canonicalize_slot("taxi-leaveAt").token(), "[time]");
        assert_eq!(t.canonicalize_slot("train-arriveBy").token(), "[time]");
        assert_eq!(t.canonicalize_slot("hotel-name").token(), "[place_name]");
        assert_eq!(t.canonicalize_slot("restaurant-food").token(), "[food]");
        assert_ne!(t.canonicalize_slot("hotel-stars"), t.canonicalize_slot("hotel-pricerange"));
        assert_eq!(t.version(), "1");
    }

    #[test]
    fn unknown_passes_through() {
        let t = CanonicalizationTable::shipped();
        assert_eq!(t.canonicalize_slot("Police-Phone").name(), "police-phone");
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(CanonicalizationTable::parse("a\tb\n").is_err());
        assert!(CanonicalizationTable::parse("version\t1\na\tb\na\tc\n").is_err());
        assert!(CanonicalizationTable::parse("version\t1\na b c\n").is_err());
    }
}
