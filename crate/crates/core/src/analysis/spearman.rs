//! Spearman rank correlation with average ranks for ties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    /// Two-sided Student t with n-2 degrees of freedom.
    #[default]
    TApprox,
    /// Exact two-sided permutation test; n <= 10.
    Exact,
}

pub const EXACT_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    pub p: f64,
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn t_pvalue(rho: f64, n: usize) -> f64 {
    if (1.0 - rho.abs()) < 1e-12 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Fraction of rank permutations of `ys` at least as extreme as observed.
fn exact_pvalue(rx: &[f64], ry: &[f64], rho: f64) -> f64 {
    let mut perm = ry.to_vec();
    let n = perm.len();
    let mut extreme = 0u64;
    let mut total = 0u64;
    let mut count = |p: &[f64]| {
        total += 1;
        if let Some(r) = pearson(rx, p) {
            if r.abs() >= rho.abs() - 1e-12 {
                extreme += 1;
            }
        }
    };
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    count(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            count(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    extreme as f64 / total as f64
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Spearman, AnalysisError> {
    spearman_with(xs, ys, PValueMethod::TApprox)
}

pub fn spearman_with(xs: &[f64], ys: &[f64], method: PValueMethod) -> Result<Spearman, AnalysisError> {
    if xs.len() != ys.len() {
        return Err(AnalysisError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(AnalysisError::TooFew(n));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let rho = pearson(&rx, &ry).ok_or(AnalysisError::ZeroVariance)?;
    let p = match method {
        PValueMethod::TApprox => t_pvalue(rho, n),
        PValueMethod::Exact => {
            if n > EXACT_MAX_N {
                return Err(AnalysisError::ExactTooLarge(n));
            }
            exact_pvalue(&rx, &ry, rho)
        }
    };
    Ok(Spearman { rho, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert_eq!((r.rho, r.p), (1.0, 0.0));
        let r = spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.rho, -1.0);
        // d = (-1,1,-1,1,0), sum d^2 = 4, rho = 1 - 6*4/(5*24) = 0.8.
        let r = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r.rho - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0, 2.0]), Err(AnalysisError::TooFew(2))));
        assert!(matches!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(AnalysisError::LengthMismatch(3, 2))));
        assert!(matches!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(AnalysisError::ZeroVariance)));
        assert!(matches!(
            spearman_with(&[0.0; 11].map(|_| 1.0), &[1.0; 11], PValueMethod::Exact),
            Err(AnalysisError::ZeroVariance)
        ));
        let xs: Vec<f64> = (0..11).map(f64::from).collect();
        assert!(matches!(spearman_with(&xs, &xs, PValueMethod::Exact), Err(AnalysisError::ExactTooLarge(11))));
    }

    #[test]
    fn t_pvalue_matches_reference() {
        // scipy.stats.spearmanr on the same data: rho=0.8, p=0.10408803866182788
        let r = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r.p - 0.10408803866182788).abs() < 1e-9, "{}", r.p);
    }

    #[test]
    fn exact_pvalue_by_enumeration() {
        // n=4, perfect order: only the identity and reversal reach |rho| = 1.
        let r = spearman_with(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0], PValueMethod::Exact).unwrap();
        assert!((r.p - 2.0 / 24.0).abs() < 1e-15);
        // n=5, rho=0.8: 16 of 120 permutations have |rho| >= 0.8.
        let r = spearman_with(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0], PValueMethod::Exact).unwrap();
        assert!((r.p - 16.0 / 120.0).abs() < 1e-15, "{}", r.p);
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_transform(
            pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)
        ) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let base = spearman(&xs, &ys);
            let ex: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            match base {
                Ok(r) => {
                    let t = spearman(&ex, &ys).unwrap();
                    prop_assert!((r.rho - t.rho).abs() < 1e-12);
                    prop_assert!((-1.0..=1.0).contains(&r.rho));
                    prop_assert!((0.0..=1.0).contains(&r.p));
                }
                Err(_) => prop_assert!(spearman(&ex, &ys).is_err()),
            }
        }
    }
}
