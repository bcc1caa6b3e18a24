//! Dialectal lexical surveys of Spanish-speaking countries: corpus handling,
//! questionnaire generation, survey execution, and scoring.

pub mod analysis;
pub mod corpus;
pub mod metrics;
pub mod questionnaire;
pub mod rng;
pub mod selftest;
pub mod survey;

/// Small bundled data set and reference country tables.
pub mod fixtures {
    use crate::analysis::{read_country_tsv, CountryResult};
    use crate::corpus::Corpus;

    pub const CORPUS_JSON: &str = include_str!("../fixtures/corpus.json");
    pub const PUBLISHED_YNQF_TSV: &str = include_str!("../fixtures/published_ynqf.tsv");
    pub const PUBLISHED_MCQF_TSV: &str = include_str!("../fixtures/published_mcqf.tsv");
    pub const COVARIATES_TSV: &str = include_str!("../fixtures/covariates.tsv");

    pub fn corpus() -> Corpus {
        Corpus::from_json(CORPUS_JSON).expect("bundled corpus is valid")
    }

    /// Published per-country F1 results for yes/no questions.
    pub fn published_ynqf() -> Vec<CountryResult> {
        read_country_tsv(PUBLISHED_YNQF_TSV).expect("bundled table is valid")
    }

    /// Published per-country adjusted Jaccard results for multiple choice.
    pub fn published_mcqf() -> Vec<CountryResult> {
        read_country_tsv(PUBLISHED_MCQF_TSV).expect("bundled table is valid")
    }
}
