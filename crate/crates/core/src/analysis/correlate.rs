use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{spearman_with, AnalysisError, CountryResult, PValueMethod};
use crate::corpus::Country;

/// Column of a country result table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Metric,
    Baseline,
    Delta,
    Questions,
    Answers,
}

impl FromStr for Field {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "metric" | "f1" | "jadj" | "j_adj" => Field::Metric,
            "baseline" => Field::Baseline,
            "delta" | "delta_f1" | "delta_jadj" => Field::Delta,
            "n_q" | "nq" => Field::Questions,
            "n_a" | "na" => Field::Answers,
            _ => return Err(AnalysisError::UnknownField(s.to_string())),
        })
    }
}

impl Field {
    fn get(self, r: &CountryResult) -> Option<f64> {
        match self {
            Field::Metric => r.metric,
            Field::Baseline => r.baseline,
            Field::Delta => r.delta,
            Field::Questions => Some(r.n_q as f64),
            Field::Answers => Some(r.n_a as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovariateField {
    Tokens,
    Gdp,
}

impl FromStr for CovariateField {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tokens" => Ok(CovariateField::Tokens),
            "gdp" | "gdp_usd" => Ok(CovariateField::Gdp),
            _ => Err(AnalysisError::UnknownField(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CovariateRow {
    tokens: Option<f64>,
    gdp_usd: Option<f64>,
}

/// Per-country external quantities: a TSV with columns `country_code`,
/// `tokens`, and `gdp_usd`.
/// Empty cells are missing values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CovariateTable {
    rows: BTreeMap<Country, CovariateRow>,
}

impl CovariateTable {
    pub fn from_tsv(text: &str) -> Result<Self, AnalysisError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Ok(Self::default());
        };
        let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
        if cols != ["country_code", "tokens", "gdp_usd"] {
            return Err(AnalysisError::Parse {
                line: 1,
                message: "expected header country_code\\ttokens\\tgdp_usd".into(),
            });
        }
        let mut rows = BTreeMap::new();
        for (i, line) in lines {
            let err = |message: String| AnalysisError::Parse { line: i + 1, message };
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            if f.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", f.len())));
            }
            let country: Country = f[0].parse().map_err(|e: crate::corpus::UnknownCountry| err(e.to_string()))?;
            let num = |s: &str| -> Result<Option<f64>, AnalysisError> {
                if s.is_empty() || s.eq_ignore_ascii_case("na") {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| err(format!("not a number: {s:?}")))
                }
            };
            let row = CovariateRow {
                tokens: num(f[1])?,
                gdp_usd: num(f[2])?,
            };
            if rows.insert(country, row).is_some() {
                return Err(err(format!("duplicate row for {country}")));
            }
        }
        Ok(CovariateTable { rows })
    }

    pub fn set(&mut self, country: Country, tokens: Option<f64>, gdp_usd: Option<f64>) {
        self.rows.insert(country, CovariateRow { tokens, gdp_usd });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn series(&self, field: CovariateField) -> CountrySeries {
        let name = match field {
            CovariateField::Tokens => "tokens",
            CovariateField::Gdp => "gdp_usd",
        };
        let values = self
            .rows
            .iter()
            .filter_map(|(&c, r)| {
                let v = match field {
                    CovariateField::Tokens => r.tokens,
                    CovariateField::Gdp => r.gdp_usd,
                };
                v.map(|v| (c, v))
            })
            .collect();
        CountrySeries {
            name: name.into(),
            values,
        }
    }
}

/// A named per-country quantity; countries without a value are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CountrySeries {
    pub name: String,
    pub values: BTreeMap<Country, f64>,
}

impl CountrySeries {
    pub fn from_results(name: impl Into<String>, results: &[CountryResult], field: Field) -> Self {
        CountrySeries {
            name: name.into(),
            values: results
                .iter()
                .filter_map(|r| field.get(r).map(|v| (r.country, v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub country: Country,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    pub n: usize,
    pub rho: f64,
    pub p: f64,
    pub p_method: PValueMethod,
    pub pairs: Vec<Pair>,
}

/// Spearman correlation over the countries present in both series.
pub fn correlate(x: &CountrySeries, y: &CountrySeries, method: PValueMethod) -> Result<Correlation, AnalysisError> {
    let pairs: Vec<Pair> = x
        .values
        .iter()
        .filter_map(|(&country, &xv)| y.values.get(&country).map(|&yv| Pair { country, x: xv, y: yv }))
        .collect();
    if pairs.len() < 3 {
        return Err(AnalysisError::InsufficientOverlap(pairs.len()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.y).collect();
    let s = spearman_with(&xs, &ys, method)?;
    Ok(Correlation {
        x: x.name.clone(),
        y: y.name.clone(),
        n: pairs.len(),
        rho: s.rho,
        p: s.p,
        p_method: method,
        pairs,
    })
}
