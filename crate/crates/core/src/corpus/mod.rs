//! Expert-annotated lexical-variation corpus: items, variants, and the
//! per-country sets of predominant variants that serve as gold standard.
//!
//! All text is NFC-normalized at load time, so variant comparison is plain
//! byte equality afterwards.

mod country;
pub mod ingest;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub use country::{Country, DialectalArea, UnknownCountry};

/// One lexical item: a concept together with its competing variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexicalItem {
    pub index: String,
    pub description: String,
    pub english: String,
    pub variants: Vec<String>,
    /// Predominant ("+") variants per country. A missing key means no
    /// annotation, which scores the same as an explicit empty list.
    #[serde(default)]
    pub gold: BTreeMap<Country, Vec<String>>,
    /// Opaque passthrough (example sentences, survey wave, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

impl LexicalItem {
    pub fn variant_position(&self, variant: &str) -> Option<usize> {
        self.variants.iter().position(|v| v == variant)
    }

    fn normalize(&mut self) {
        self.index = nfc(&self.index);
        self.description = nfc(&self.description);
        self.english = nfc(&self.english);
        for v in &mut self.variants {
            *v = nfc(v);
        }
        for set in self.gold.values_mut() {
            for v in set.iter_mut() {
                *v = nfc(v);
            }
        }
    }
}

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// On-disk document shape: `{ "items": [...] }`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDocument {
    pub items: Vec<LexicalItem>,
}

impl CorpusDocument {
    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let mut doc: CorpusDocument =
            serde_json::from_str(text).map_err(|e| CorpusError::Schema {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        for item in &mut doc.items {
            item.normalize();
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    EmptyVariants,
    DuplicateVariant,
    DuplicateIndex,
    GoldNotInVariants,
    DuplicateGoldVariant,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::EmptyVariants => "empty-variants",
            ViolationKind::DuplicateVariant => "duplicate-variant",
            ViolationKind::DuplicateIndex => "duplicate-index",
            ViolationKind::GoldNotInVariants => "gold-not-in-variants",
            ViolationKind::DuplicateGoldVariant => "duplicate-gold-variant",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Zero-based position of the item record in the `items` array.
    pub record: usize,
    pub item: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub country: Option<Country>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at record {} (item {}", self.kind, self.record, self.item)?;
        if let Some(c) = self.country {
            write!(f, ", {}", c.name())?;
        }
        write!(f, "): {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub items: usize,
    pub variants: usize,
    /// Gold entries (keys present, including explicit empty lists) per country code.
    pub gold_entries: BTreeMap<String, usize>,
    /// `(item, country)` pairs annotated with an explicit empty list.
    pub explicit_empty_gold: Vec<(String, Country)>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every corpus invariant and tallies counts. Never fails.
pub fn validate_corpus(items: &[LexicalItem]) -> ValidationReport {
    let mut report = ValidationReport {
        items: items.len(),
        ..Default::default()
    };
    let mut seen_index: HashSet<&str> = HashSet::new();

    for (record, item) in items.iter().enumerate() {
        let violation = |kind, country, detail: String| Violation {
            kind,
            record,
            item: item.index.clone(),
            country,
            detail,
        };
        report.variants += item.variants.len();

        if !seen_index.insert(&item.index) {
            report.violations.push(violation(
                ViolationKind::DuplicateIndex,
                None,
                format!("index {} already used", item.index),
            ));
        }
        if item.variants.is_empty() {
            report.violations.push(violation(
                ViolationKind::EmptyVariants,
                None,
                "variant list is empty".into(),
            ));
        }
        let mut seen_variant = HashSet::new();
        for v in &item.variants {
            if !seen_variant.insert(v.as_str()) {
                report.violations.push(violation(
                    ViolationKind::DuplicateVariant,
                    None,
                    format!("variant {v:?} listed twice"),
                ));
            }
        }
        for (&country, gold) in &item.gold {
            *report.gold_entries.entry(country.code().to_string()).or_default() += 1;
            if gold.is_empty() {
                report.explicit_empty_gold.push((item.index.clone(), country));
            }
            let mut seen_gold = HashSet::new();
            for g in gold {
                if !seen_variant.contains(g.as_str()) {
                    report.violations.push(violation(
                        ViolationKind::GoldNotInVariants,
                        Some(country),
                        format!("gold variant {g:?} is not a variant of the item"),
                    ));
                }
                if !seen_gold.insert(g.as_str()) {
                    report.violations.push(violation(
                        ViolationKind::DuplicateGoldVariant,
                        Some(country),
                        format!("gold variant {g:?} listed twice"),
                    ));
                }
            }
        }
    }
    report
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("corpus invariant violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown item index {0}")]
    UnknownItem(String),
    #[error("ingest error at line {line}: {message}")]
    Ingest { line: usize, message: String },
}

/// A validated, immutable corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    items: Vec<LexicalItem>,
    by_index: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_items(items: Vec<LexicalItem>) -> Result<Self, CorpusError> {
        let report = validate_corpus(&items);
        if !report.is_valid() {
            return Err(CorpusError::Invalid(report.violations));
        }
        let by_index = items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.index.clone(), i))
            .collect();
        Ok(Corpus { items, by_index })
    }

    pub fn from_document(doc: CorpusDocument) -> Result<Self, CorpusError> {
        Corpus::from_items(doc.items)
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        Corpus::from_document(CorpusDocument::from_json(text)?)
    }

    pub fn items(&self) -> &[LexicalItem] {
        &self.items
    }

    pub fn item(&self, index: &str) -> Option<&LexicalItem> {
        self.by_index.get(index).map(|&i| &self.items[i])
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn variant_count(&self) -> usize {
        self.items.iter().map(|i| i.variants.len()).sum()
    }

    /// Predominant variants of `item` in `country`; empty when unannotated.
    pub fn gold_set(&self, item: &str, country: Country) -> Result<BTreeSet<&str>, CorpusError> {
        let item = self
            .item(item)
            .ok_or_else(|| CorpusError::UnknownItem(item.to_string()))?;
        Ok(item
            .gold
            .get(&country)
            .map(|g| g.iter().map(String::as_str).collect())
            .unwrap_or_default())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_corpus(&self.items)
    }

    pub fn to_document(&self) -> CorpusDocument {
        CorpusDocument {
            items: self.items.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("corpus serializes")
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Corpus::from_json(&text)
}
