//! Survey question generation: the yes/no universe, seeded sampling, the
//! multiple-choice set with shuffled options, and prompt rendering.

mod render;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Country, LexicalItem};
use crate::rng::{SeededRng, Stream};

pub use render::render_prompt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ynqf,
    Mcqf,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Ynqf => "ynqf",
            Format::Mcqf => "mcqf",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ynqf" => Ok(Format::Ynqf),
            "mcqf" => Ok(Format::Mcqf),
            other => Err(format!("unknown format `{other}` (expected ynqf or mcqf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YnQuestion {
    pub id: String,
    pub country: Country,
    pub item: String,
    pub variant: String,
}

impl YnQuestion {
    pub fn new(country: Country, item: &str, variant: &str) -> Self {
        YnQuestion {
            id: question_id("ynqf", country, item, &[variant]),
            country,
            item: item.to_string(),
            variant: variant.to_string(),
        }
    }
}

/// Options are numbered from 1 in list order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McQuestion {
    pub id: String,
    pub country: Country,
    pub item: String,
    pub options: Vec<String>,
}

impl McQuestion {
    pub fn new(country: Country, item: &str, options: Vec<String>) -> Self {
        let refs: Vec<&str> = options.iter().map(String::as_str).collect();
        McQuestion {
            id: question_id("mcqf", country, item, &refs),
            country,
            item: item.to_string(),
            options,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Question {
    YesNo(YnQuestion),
    MultipleChoice(McQuestion),
}

impl Question {
    pub fn id(&self) -> &str {
        match self {
            Question::YesNo(q) => &q.id,
            Question::MultipleChoice(q) => &q.id,
        }
    }

    pub fn country(&self) -> Country {
        match self {
            Question::YesNo(q) => q.country,
            Question::MultipleChoice(q) => q.country,
        }
    }

    pub fn item(&self) -> &str {
        match self {
            Question::YesNo(q) => &q.item,
            Question::MultipleChoice(q) => &q.item,
        }
    }

    pub fn format(&self) -> Format {
        match self {
            Question::YesNo(_) => Format::Ynqf,
            Question::MultipleChoice(_) => Format::Mcqf,
        }
    }
}

impl From<YnQuestion> for Question {
    fn from(q: YnQuestion) -> Self {
        Question::YesNo(q)
    }
}

impl From<McQuestion> for Question {
    fn from(q: McQuestion) -> Self {
        Question::MultipleChoice(q)
    }
}

/// `SHA-256(format 0x1f country 0x1f item 0x1f part 0x1e part ...)`,
/// first 16 hex digits, prefixed by the format tag.
fn question_id(format: &str, country: Country, item: &str, parts: &[&str]) -> String {
    let mut h = Sha256::new();
    h.update(format.as_bytes());
    h.update([0x1f]);
    h.update(country.code().as_bytes());
    h.update([0x1f]);
    h.update(item.as_bytes());
    h.update([0x1f]);
    h.update(parts.join("\u{1e}").as_bytes());
    let digest = hex::encode(h.finalize());
    let tag = if format == "ynqf" { "yn" } else { "mc" };
    format!("{tag}-{}", &digest[..16])
}

/// A batch manifest. `questions` is in presentation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionBatch {
    pub format: Format,
    pub seed: u64,
    pub questions: Vec<Question>,
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("sample size {n} exceeds universe of {universe} questions")]
    SampleTooLarge { n: usize, universe: usize },
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed batch manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid batch: {0}")]
    Invalid(String),
}

impl QuestionBatch {
    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("batch serializes");
        s.push('\n');
        s
    }

    /// Hex SHA-256 of the canonical manifest text.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        let batch: QuestionBatch = serde_json::from_str(text)?;
        batch.check_shape()?;
        Ok(batch)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BatchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BatchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BatchError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| BatchError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Format consistency and id uniqueness.
    pub fn check_shape(&self) -> Result<(), BatchError> {
        let mut ids = HashSet::new();
        for q in &self.questions {
            if q.format() != self.format {
                return Err(BatchError::Invalid(format!(
                    "question {} is not a {} question",
                    q.id(),
                    self.format
                )));
            }
            if !ids.insert(q.id()) {
                return Err(BatchError::Invalid(format!("duplicate question id {}", q.id())));
            }
        }
        Ok(())
    }

    /// Every question must refer to an existing item and its variants.
    pub fn check_against(&self, corpus: &Corpus) -> Result<(), BatchError> {
        self.check_shape()?;
        for q in &self.questions {
            let item = corpus.item(q.item()).ok_or_else(|| {
                BatchError::Invalid(format!("question {} references unknown item {}", q.id(), q.item()))
            })?;
            match q {
                Question::YesNo(q) => {
                    if item.variant_position(&q.variant).is_none() {
                        return Err(BatchError::Invalid(format!(
                            "question {}: {:?} is not a variant of {}",
                            q.id, q.variant, q.item
                        )));
                    }
                }
                Question::MultipleChoice(q) => {
                    if q.options.len() < 2 || !is_permutation(&q.options, &item.variants) {
                        return Err(BatchError::Invalid(format!(
                            "question {}: options are not a permutation of the variants of {}",
                            q.id, q.item
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn is_permutation(a: &[String], b: &[String]) -> bool {
    let mut a: Vec<&String> = a.iter().collect();
    let mut b: Vec<&String> = b.iter().collect();
    a.sort();
    b.sort();
    a == b
}

fn items_by_index(corpus: &Corpus) -> Vec<&LexicalItem> {
    let mut items: Vec<&LexicalItem> = corpus.items().iter().collect();
    items.sort_by(|a, b| a.index.cmp(&b.index));
    items
}

/// Every (country, item, variant) triple: countries in canonical order,
/// items by index, variants in corpus order.
pub fn ynqf_universe(corpus: &Corpus) -> Vec<YnQuestion> {
    let items = items_by_index(corpus);
    let mut out = Vec::with_capacity(corpus.variant_count() * Country::ALL.len());
    for country in Country::ALL {
        for item in &items {
            for variant in &item.variants {
                out.push(YnQuestion::new(country, &item.index, variant));
            }
        }
    }
    out
}

/// Uniform sample of `n` questions without replacement. The selection uses
/// the sample stream; the selected questions are put back in generation
/// order and then shuffled with the presentation stream.
pub fn sample_questions(
    universe: &[YnQuestion],
    n: usize,
    seed: u64,
) -> Result<QuestionBatch, BatchError> {
    if n > universe.len() {
        return Err(BatchError::SampleTooLarge {
            n,
            universe: universe.len(),
        });
    }
    let mut picked = SeededRng::new(seed, Stream::Sample).sample_indices(universe.len(), n);
    picked.sort_unstable();
    let mut questions: Vec<Question> = picked.into_iter().map(|i| universe[i].clone().into()).collect();
    SeededRng::new(seed, Stream::Presentation).shuffle(&mut questions);
    Ok(QuestionBatch {
        format: Format::Ynqf,
        seed,
        questions,
    })
}

/// One question per (country, item) with at least two variants and a
/// non-empty gold set. Options are shuffled per question from the options
/// stream, in generation order; the batch is then presentation-shuffled.
pub fn mcqf_questions(corpus: &Corpus, seed: u64) -> QuestionBatch {
    let items = items_by_index(corpus);
    let mut options_rng = SeededRng::new(seed, Stream::Options);
    let mut questions: Vec<Question> = Vec::new();
    for country in Country::ALL {
        for item in &items {
            let has_gold = item.gold.get(&country).is_some_and(|g| !g.is_empty());
            if item.variants.len() < 2 || !has_gold {
                continue;
            }
            let mut options = item.variants.clone();
            options_rng.shuffle(&mut options);
            questions.push(McQuestion::new(country, &item.index, options).into());
        }
    }
    SeededRng::new(seed, Stream::Presentation).shuffle(&mut questions);
    QuestionBatch {
        format: Format::Mcqf,
        seed,
        questions,
    }
}
