//! Scoring against gold: binary F1 for yes/no answers and the
//! chance-corrected Jaccard coefficient for multiple-choice answers.
//!
//! For a gold set `A` (`|A| = s`) and a predicted set `B` (`|B| = t`) drawn
//! from an item's `N` variants, the overlap `X = |A ∩ B|` under independent
//! uniform selection is hypergeometric with mean `st/N`. The expected
//! Jaccard coefficient is approximated to first order as
//! `E[X] / E[|A ∪ B|] = st / (N(s+t) - st)`, and the adjusted coefficient
//! `(J - E[J]) / (1 - E[J])` is clipped at zero.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("gold and predicted lists differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("set sizes s={s}, t={t} out of range for N={n}")]
    OutOfRange { n: usize, s: usize, t: usize },
    #[error("gold and predicted sets must be non-empty")]
    EmptySet,
    #[error("sets of union size {union} do not fit in a universe of {n}")]
    UniverseTooSmall { n: usize, union: usize },
    #[error("enumeration oracle limited to N <= {max}, got {n}")]
    EnumerationBound { n: usize, max: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl BinaryConfusion {
    pub fn from_pairs(gold: &[bool], pred: &[bool]) -> Result<Self, MetricError> {
        if gold.len() != pred.len() {
            return Err(MetricError::LengthMismatch {
                gold: gold.len(),
                pred: pred.len(),
            });
        }
        let mut c = BinaryConfusion::default();
        for (&g, &p) in gold.iter().zip(pred) {
            c.record(g, p);
        }
        Ok(c)
    }

    pub fn record(&mut self, gold: bool, pred: bool) {
        match (gold, pred) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `2tp / (2tp + fp + fn)`, or 0 when nothing is positive.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

/// F1 with "predominant" (Sí) as the positive class.
pub fn f1_binary(gold: &[bool], pred: &[bool]) -> Result<f64, MetricError> {
    Ok(BinaryConfusion::from_pairs(gold, pred)?.f1())
}

/// `|A ∩ B| / |A ∪ B|`; 1 for two empty sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let x = a.intersection(b).count();
    let union = a.len() + b.len() - x;
    if union == 0 {
        1.0
    } else {
        x as f64 / union as f64
    }
}

fn check_sizes(n: usize, s: usize, t: usize) -> Result<(), MetricError> {
    if s == 0 || t == 0 || s > n || t > n {
        Err(MetricError::OutOfRange { n, s, t })
    } else {
        Ok(())
    }
}

/// Hypergeometric mean overlap, `st/N`.
pub fn expected_intersection(n: usize, s: usize, t: usize) -> Result<f64, MetricError> {
    check_sizes(n, s, t)?;
    Ok((s * t) as f64 / n as f64)
}

/// First-order approximation `st / (N(s+t) - st)`.
pub fn expected_jaccard(n: usize, s: usize, t: usize) -> Result<f64, MetricError> {
    check_sizes(n, s, t)?;
    let st = s * t;
    Ok(st as f64 / (n * (s + t) - st) as f64)
}

/// Below this, `1 - E[J]` is treated as zero (only `s = t = N`).
const DEGENERATE: f64 = 1e-12;

/// `(J - E[J]) / (1 - E[J])` before clipping; may be negative.
pub fn adjusted_jaccard_unclipped<T: Ord>(
    a: &BTreeSet<T>,
    b: &BTreeSet<T>,
    n: usize,
) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let (s, t) = (a.len(), b.len());
    check_sizes(n, s, t)?;
    let x = a.intersection(b).count();
    let union = s + t - x;
    if union > n {
        return Err(MetricError::UniverseTooSmall { n, union });
    }
    let j = x as f64 / union as f64;
    let expected = expected_jaccard(n, s, t)?;
    let headroom = 1.0 - expected;
    if headroom < DEGENERATE {
        return Ok(1.0);
    }
    Ok((j - expected) / headroom)
}

/// Chance-corrected Jaccard, clipped to `[0, 1]`.
pub fn adjusted_jaccard<T: Ord>(
    a: &BTreeSet<T>,
    b: &BTreeSet<T>,
    n: usize,
) -> Result<f64, MetricError> {
    Ok(adjusted_jaccard_unclipped(a, b, n)?.max(0.0))
}

/// Exhaustive null-model expectations, used to cross-check the closed
/// forms. Every pair of subsets of sizes `s` and `t` of `0..N` is visited.
pub mod oracle {
    use super::MetricError;

    pub const MAX_N: usize = 12;

    fn subsets(n: usize, k: usize) -> Vec<u32> {
        (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).collect()
    }

    fn enumerate(n: usize, s: usize, t: usize, f: impl Fn(usize) -> f64) -> Result<f64, MetricError> {
        if n > MAX_N {
            return Err(MetricError::EnumerationBound { n, max: MAX_N });
        }
        if s == 0 || t == 0 || s > n || t > n {
            return Err(MetricError::OutOfRange { n, s, t });
        }
        let a_sets = subsets(n, s);
        let b_sets = subsets(n, t);
        let mut total = 0.0;
        for &a in &a_sets {
            for &b in &b_sets {
                total += f((a & b).count_ones() as usize);
            }
        }
        Ok(total / (a_sets.len() * b_sets.len()) as f64)
    }

    /// Mean `|A ∩ B|` over all subset pairs.
    pub fn exact_expected_intersection(n: usize, s: usize, t: usize) -> Result<f64, MetricError> {
        enumerate(n, s, t, |x| x as f64)
    }

    /// Exact `E[J]`: mean of `X / (s + t - X)` over all subset pairs.
    pub fn exact_expected_jaccard(n: usize, s: usize, t: usize) -> Result<f64, MetricError> {
        enumerate(n, s, t, |x| x as f64 / (s + t - x) as f64)
    }
}
