use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{AnalysisError, AreaResult, CountryResult, Correlation};
use crate::corpus::Country;

const COUNTRY_HEADER: &str = "country\tN_Q\tN_A\tmetric\tbaseline\tdelta";
const DELTA_TOLERANCE: f64 = 1e-9;

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_country_tsv(results: &[CountryResult]) -> String {
    let mut out = String::from(COUNTRY_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.country.code(),
            r.n_q,
            r.n_a,
            cell(r.metric),
            cell(r.baseline),
            cell(r.delta)
        ));
    }
    out
}

/// Parses a country table, checking that `delta = metric - baseline`.
pub fn read_country_tsv(text: &str) -> Result<Vec<CountryResult>, AnalysisError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim_end() == COUNTRY_HEADER => {}
        _ => {
            return Err(AnalysisError::Parse {
                line: 1,
                message: format!("expected header `{}`", COUNTRY_HEADER.replace('\t', "\\t")),
            })
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in lines {
        let err = |message: String| AnalysisError::Parse { line: i + 1, message };
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", f.len())));
        }
        let country: Country = f[0].parse().map_err(|e: crate::corpus::UnknownCountry| err(e.to_string()))?;
        if !seen.insert(country) {
            return Err(err(format!("duplicate row for {country}")));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|_| err(format!("not a count: {s:?}")));
        let num = |s: &str| -> Result<Option<f64>, AnalysisError> {
            if s.eq_ignore_ascii_case("na") || s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| err(format!("not a number: {s:?}")))
            }
        };
        let (n_q, n_a) = (count(f[1])?, count(f[2])?);
        if n_a > n_q {
            return Err(err(format!("N_A {n_a} exceeds N_Q {n_q}")));
        }
        let row = CountryResult::new(country, n_q, n_a, num(f[3])?, num(f[4])?);
        let stated = num(f[5])?;
        match (row.delta, stated) {
            (Some(d), Some(s)) if (d - s).abs() <= DELTA_TOLERANCE => {}
            (None, None) => {}
            _ => return Err(err(format!("delta {:?} inconsistent with metric - baseline", stated))),
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_area_tsv(areas: &[AreaResult]) -> String {
    let mut out = String::from("area\tmean_metric\tmean_delta\n");
    for a in areas {
        out.push_str(&format!("{}\t{}\t{}\n", a.area.name(), cell(a.mean_metric), cell(a.mean_delta)));
    }
    out
}

fn scatter_csv(c: &Correlation) -> String {
    let mut out = String::from("country,x,y,area\n");
    for p in &c.pairs {
        out.push_str(&format!("{},{},{},{}\n", p.country.code(), p.x, p.y, p.country.area().name()));
    }
    out
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Writes `countries.tsv`, `areas.tsv`, `correlations.json`, and one
/// `scatter_<x>__<y>.csv` per correlation into `dir`. All content is
/// rendered before anything touches the disk.
pub fn emit_report(
    results: &[CountryResult],
    areas: &[AreaResult],
    correlations: &[Correlation],
    dir: &Path,
) -> Result<Vec<PathBuf>, AnalysisError> {
    if results.is_empty() {
        return Err(AnalysisError::EmptyResults);
    }
    let mut files: Vec<(String, String)> = vec![
        ("countries.tsv".into(), write_country_tsv(results)),
        ("areas.tsv".into(), write_area_tsv(areas)),
        (
            "correlations.json".into(),
            serde_json::to_string_pretty(correlations).expect("correlations serialize") + "\n",
        ),
    ];
    for c in correlations {
        files.push((format!("scatter_{}__{}.csv", slug(&c.x), slug(&c.y)), scatter_csv(c)));
    }

    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| AnalysisError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut staged = Vec::new();
    for (name, content) in &files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = std::fs::write(&tmp, content) {
            for t in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(io(&tmp)(e));
        }
        staged.push(tmp);
    }
    let mut written = Vec::new();
    for ((name, _), tmp) in files.iter().zip(staged) {
        let dest = dir.join(name);
        std::fs::rename(&tmp, &dest).map_err(io(&dest))?;
        written.push(dest);
    }
    Ok(written)
}
