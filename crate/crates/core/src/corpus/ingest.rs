//! Import from the long-form annotation matrix: one TSV row per
//! item-variant-country cell, marked `+` (predominant) or `-`.
//!
//! Expected tab-separated header: `index`, `description`, `english`,
//! `variant`, `country`, `mark`.

use std::collections::{BTreeMap, HashMap};

use super::{nfc, Corpus, CorpusDocument, CorpusError, Country, LexicalItem};

pub const HEADER: [&str; 6] = ["index", "description", "english", "variant", "country", "mark"];

pub fn ingest_tsv(text: &str) -> Result<Corpus, CorpusError> {
    Corpus::from_document(parse_tsv(text)?)
}

pub fn parse_tsv(text: &str) -> Result<CorpusDocument, CorpusError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(CorpusError::Ingest {
            line: 1,
            message: "missing header".into(),
        })?;
    let cols: Vec<&str> = header.1.split('\t').map(str::trim).collect();
    if cols != HEADER {
        return Err(CorpusError::Ingest {
            line: header.0 + 1,
            message: format!("expected header `{}`", HEADER.join("\\t")),
        });
    }

    let mut items: Vec<LexicalItem> = Vec::new();
    let mut position: HashMap<String, usize> = HashMap::new();

    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| CorpusError::Ingest {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != HEADER.len() {
            return Err(err(format!(
                "expected {} columns, found {}",
                HEADER.len(),
                fields.len()
            )));
        }
        let index = nfc(fields[0].trim());
        let description = nfc(fields[1].trim());
        let english = nfc(fields[2].trim());
        let variant = nfc(fields[3].trim());
        let country: Country = fields[4]
            .parse()
            .map_err(|e: super::UnknownCountry| err(e.to_string()))?;
        let predominant = match fields[5].trim() {
            "+" => true,
            "-" | "\u{2013}" => false,
            other => return Err(err(format!("mark must be + or -, found {other:?}"))),
        };
        if index.is_empty() || variant.is_empty() {
            return Err(err("index and variant must be non-empty".into()));
        }

        let slot = *position.entry(index.clone()).or_insert_with(|| {
            items.push(LexicalItem {
                index: index.clone(),
                description: description.clone(),
                english: english.clone(),
                variants: Vec::new(),
                gold: BTreeMap::new(),
                metadata: None,
            });
            items.len() - 1
        });
        let item = &mut items[slot];
        if item.description != description || item.english != english {
            return Err(err(format!(
                "item {index} has inconsistent description or gloss"
            )));
        }
        if !item.variants.contains(&variant) {
            item.variants.push(variant.clone());
        }
        let gold = item.gold.entry(country).or_default();
        if predominant && !gold.contains(&variant) {
            gold.push(variant);
        }
    }

    // Gold lists follow the item's variant order.
    for item in &mut items {
        let variants = &item.variants;
        for gold in item.gold.values_mut() {
            gold.sort_by_key(|g| variants.iter().position(|v| v == g));
        }
    }
    Ok(CorpusDocument { items })
}
