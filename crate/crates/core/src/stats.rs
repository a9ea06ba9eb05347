//! Medians and the Wilcoxon signed-rank test.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Pairs at or below this count use the exact null distribution.
pub const EXACT_MAX_PAIRS: usize = 25;

/// Median; the mean of the two central values for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    /// Sum of ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Pairs left after dropping zero differences.
    pub n_used: usize,
    pub p_value: f64,
    pub significant: bool,
    pub method: WilcoxonMethod,
}

/// Ranks of `|d|` starting at 1, ties sharing their average rank.
fn signed_ranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().partial_cmp(&diffs[b].abs()).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value from the exact null distribution of `W+`. Doubled ranks
/// are integers even with averaged ties, so the subset-sum table is exact.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut ways = vec![0f64; total + 1];
    ways[0] = 1.0;
    for &d in &doubled {
        for s in (d..=total).rev() {
            ways[s] += ways[s - d];
        }
    }
    let all = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = ways[..=w].iter().sum::<f64>() / all;
    let upper: f64 = ways[w..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

/// Two-sided p-value from the normal approximation with tie and continuity
/// corrections.
fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    libm::erfc(z / SQRT_2).min(1.0)
}

/// Paired two-sided Wilcoxon signed-rank test at level `alpha`, exact for up
/// to [`EXACT_MAX_PAIRS`] non-zero differences.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonResult> {
    let nonzero = differences(a, b)?.iter().filter(|d| **d != 0.0).count();
    let method = if nonzero <= EXACT_MAX_PAIRS {
        WilcoxonMethod::Exact
    } else {
        WilcoxonMethod::Normal
    };
    wilcoxon_with(a, b, alpha, method)
}

fn differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 pairs, got {}", a.len())));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("paired samples must be finite"));
    }
    Ok(d)
}

/// [`wilcoxon_signed_rank`] with the null distribution chosen explicitly.
pub fn wilcoxon_with(a: &[f64], b: &[f64], alpha: f64, method: WilcoxonMethod) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = differences(a, b)?.into_iter().filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            w_plus: 0.0,
            n_used: 0,
            p_value: 1.0,
            significant: false,
            method,
        });
    }
    let ranks = signed_ranks(&diffs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total: f64 = ranks.iter().sum();
    let p_value = match method {
        WilcoxonMethod::Exact => exact_p(&ranks, w_plus),
        WilcoxonMethod::Normal => normal_p(&ranks, w_plus),
    };
    Ok(WilcoxonResult {
        statistic: w_plus.min(total - w_plus),
        w_plus,
        n_used: diffs.len(),
        p_value,
        significant: p_value < alpha,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&a, &a, 0.01).unwrap();
        assert_eq!((r.statistic, r.significant, r.p_value), (0.0, false, 1.0));
    }

    #[test]
    fn six_positive_differences() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let b = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let r = wilcoxon_signed_rank(&a, &b, 0.01).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert!((r.p_value - 0.03125).abs() < 1e-12);
        assert!(!r.significant);
    }

    #[test]
    fn shifted_twenty() {
        let a: Vec<f64> = (0..20).map(|i| 100.0 + i as f64 * 0.1).collect();
        let b: Vec<f64> = (0..20).map(|i| i as f64 * 0.13).collect();
        for m in [WilcoxonMethod::Exact, WilcoxonMethod::Normal] {
            assert!(wilcoxon_with(&a, &b, 0.01, m).unwrap().significant);
        }
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(signed_ranks(&[1.0, -1.0, 2.0]), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn rejects_short_or_ragged() {
        assert!(wilcoxon_signed_rank(&[1.0; 4], &[0.0; 4], 0.01).is_err());
        assert!(wilcoxon_signed_rank(&[1.0; 5], &[0.0; 6], 0.01).is_err());
    }
}
