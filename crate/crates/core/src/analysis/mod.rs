//! Country and area result tables, rank correlations between per-country
//! quantities, and report emission.

mod correlate;
mod evaluate;
mod report;
mod spearman;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::corpus::{Country, DialectalArea};

pub use correlate::{correlate, CountrySeries, Correlation, CovariateField, CovariateTable, Field, Pair};
pub use evaluate::{evaluate_run, CountryResult, Evaluation, MetricKind, Outcome, ScoreRecord};
pub use report::{emit_report, read_country_tsv, write_area_tsv, write_country_tsv};
pub use spearman::{average_ranks, spearman, spearman_with, PValueMethod, Spearman, EXACT_MAX_N};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("run does not match batch or corpus: {0}")]
    Mismatch(String),
    #[error("question {0} has an empty gold set")]
    EmptyGold(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Batch(#[from] crate::questionnaire::BatchError),
    #[error(transparent)]
    Survey(#[from] crate::survey::SurveyError),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
    #[error("lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 observations, got {0}")]
    TooFew(usize),
    #[error("only {0} countries have both values; need at least 3")]
    InsufficientOverlap(usize),
    #[error("zero variance in input")]
    ZeroVariance,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("exact permutation p-value limited to n <= {max}, got {0}", max = EXACT_MAX_N)]
    ExactTooLarge(usize),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("nothing to report")]
    EmptyResults,
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaResult {
    pub area: DialectalArea,
    pub countries: usize,
    pub mean_metric: Option<f64>,
    pub mean_delta: Option<f64>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Unweighted mean over member countries, for each area present.
pub fn aggregate_area(results: &[CountryResult]) -> Vec<AreaResult> {
    let mut by_area: BTreeMap<DialectalArea, Vec<&CountryResult>> = BTreeMap::new();
    for r in results {
        by_area.entry(r.country.area()).or_default().push(r);
    }
    by_area
        .into_iter()
        .map(|(area, rows)| {
            let metrics: Vec<f64> = rows.iter().filter_map(|r| r.metric).collect();
            let deltas: Vec<f64> = rows.iter().filter_map(|r| r.delta).collect();
            AreaResult {
                area,
                countries: rows.len(),
                mean_metric: mean(&metrics),
                mean_delta: mean(&deltas),
            }
        })
        .collect()
}

pub fn country_of(results: &[CountryResult], country: Country) -> Option<&CountryResult> {
    results.iter().find(|r| r.country == country)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn areas_from_mcqf_table() {
        let table = fixtures::published_mcqf();
        let areas = aggregate_area(&table);
        assert_eq!(areas.len(), 8);
        let antilles = areas.iter().find(|a| a.area == DialectalArea::Antilles).unwrap();
        assert!((antilles.mean_metric.unwrap() - 0.321).abs() < 0.0005);
        let plata = areas.iter().find(|a| a.area == DialectalArea::LaPlataRiver).unwrap();
        assert!((plata.mean_metric.unwrap() - 0.386).abs() < 0.0005);
        let chile = areas.iter().find(|a| a.area == DialectalArea::Chile).unwrap();
        assert_eq!(chile.mean_metric, country_of(&table, Country::Chile).unwrap().metric);
        assert_eq!(chile.countries, 1);
    }

    #[test]
    fn missing_metrics_are_skipped() {
        let rows = vec![
            CountryResult::new(Country::Cuba, 3, 0, None, Some(0.2)),
            CountryResult::new(Country::PuertoRico, 3, 3, Some(0.5), Some(0.1)),
        ];
        let areas = aggregate_area(&rows);
        assert_eq!(areas.len(), 1);
        assert_eq!(areas[0].mean_metric, Some(0.5));
        assert_eq!(areas[0].countries, 2);
    }
}
