//! Pairwise Hamming distance-sum diversity.
//!
//! For `r` bit-strings over a common set of columns, the sum of Hamming
//! distances over unordered pairs equals `Σ_j c_j (r - c_j)` where `c_j` is the
//! number of strings with column `j` set. Keeping the column counts makes the
//! sum cheap to maintain under bit flips: each flip moves one count by one and
//! changes the sum by a closed-form delta.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-counts per column for a set of `r` bit-strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnCounts {
    counts: Vec<u32>,
    r: u32,
}

impl ColumnCounts {
    pub fn zeros(columns: usize, r: usize) -> Self {
        ColumnCounts {
            counts: vec![0; columns],
            r: r as u32,
        }
    }

    pub fn from_counts(counts: Vec<u32>, r: usize) -> Result<Self> {
        if let Some((j, c)) = counts.iter().enumerate().find(|(_, &c)| c as usize > r) {
            return Err(Error::invalid(format!("column {j} has count {c} > r = {r}")));
        }
        Ok(ColumnCounts {
            counts,
            r: r as u32,
        })
    }

    /// Counts columns over a list of equal-length bit-strings given as words.
    pub fn from_rows<'a>(columns: usize, rows: impl IntoIterator<Item = &'a [u64]>) -> Self {
        let mut counts = vec![0u32; columns];
        let mut r = 0;
        for row in rows {
            r += 1;
            for j in crate::encoding::bits::iter_set_bits(row) {
                counts[j] += 1;
            }
        }
        ColumnCounts { counts, r }
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r as usize
    }

    #[inline]
    pub fn columns(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Sum of Hamming distances over unordered pairs.
    pub fn distance_sum(&self) -> u64 {
        let r = self.r as u64;
        self.counts
            .iter()
            .map(|&c| {
                let c = c as u64;
                c * (r - c)
            })
            .sum()
    }

    /// Applies bit flips given as `(column, old_bit)` and returns the change in
    /// [`distance_sum`](Self::distance_sum). Runs in time linear in the number
    /// of flips.
    ///
    /// On error the counts may be partially updated.
    pub fn apply_flip(&mut self, flipped: &[(usize, bool)]) -> Result<i64> {
        let r = self.r as i64;
        let mut delta = 0i64;
        for &(col, old) in flipped {
            let c = *self.counts.get(col).ok_or_else(|| {
                Error::Consistency(format!("flip references column {col} of {}", self.counts.len()))
            })? as i64;
            let next = if old { c - 1 } else { c + 1 };
            if next < 0 || next > r {
                return Err(Error::Consistency(format!(
                    "column {col} count would leave [0, {r}]"
                )));
            }
            delta += next * (r - next) - c * (r - c);
            self.counts[col] = next as u32;
        }
        Ok(delta)
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Upper bound on the distance sum of `r` subsets of an `n`-element ground set
/// whose cardinalities are at most `b`.
///
/// With `h = min(b, n/2)`, the column total `⌈r/2⌉⌈h⌉ + ⌊r/2⌋⌊h⌋` is written as
/// `q·n + m` with `0 ≤ m < n`, and the bound is `n·q·(r−q) + m·(r−2q−1)`.
/// Once `b ≥ n/2` the value no longer depends on `b`.
pub fn diversity_bound(n: u64, b: u64, r: u64) -> Result<u64> {
    if n == 0 || r == 0 {
        return Err(Error::invalid(format!(
            "diversity bound needs n ≥ 1 and r ≥ 1 (got n = {n}, r = {r})"
        )));
    }
    // Work with 2h so the half-integer case n/2 stays exact.
    let twice_h = (2 * b).min(n) as u128;
    let h_ceil = twice_h.div_ceil(2);
    let h_floor = twice_h / 2;
    let (n, r) = (n as u128, r as u128);
    let total = r.div_ceil(2) * h_ceil + (r / 2) * h_floor;
    let q = total / n;
    let m = total % n;
    let value = (n * q * (r - q)) as i128 + m as i128 * (r as i128 - 2 * q as i128 - 1);
    u64::try_from(value)
        .map_err(|_| Error::Consistency(format!("diversity bound evaluated to {value}")))
}

/// Exhaustive maximum of the distance sum over all multisets of `r` subsets of
/// `{0..n}` with cardinality at most `b`. Only for tiny inputs.
pub fn brute_force_max_diversity(n: usize, b: usize, r: usize) -> Result<u64> {
    if n > 6 || r > 4 {
        return Err(Error::Resource(format!(
            "exhaustive search limited to n ≤ 6 and r ≤ 4 (got n = {n}, r = {r})"
        )));
    }
    if r == 0 {
        return Ok(0);
    }
    let subsets: Vec<u32> = (0u32..1 << n)
        .filter(|s| s.count_ones() as usize <= b)
        .collect();
    let mut chosen = Vec::with_capacity(r);
    let mut best = 0;
    search_multisets(&subsets, 0, r, &mut chosen, &mut best);
    Ok(best)
}

fn search_multisets(subsets: &[u32], start: usize, r: usize, chosen: &mut Vec<u32>, best: &mut u64) {
    if chosen.len() == r {
        let mut sum = 0u64;
        for i in 0..chosen.len() {
            for j in i + 1..chosen.len() {
                sum += (chosen[i] ^ chosen[j]).count_ones() as u64;
            }
        }
        *best = (*best).max(sum);
        return;
    }
    for k in start..subsets.len() {
        chosen.push(subsets[k]);
        search_multisets(subsets, k, r, chosen, best);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::BitString;

    fn counts_of(rows: &[&str]) -> ColumnCounts {
        let rows: Vec<BitString> = rows.iter().map(|s| s.parse().unwrap()).collect();
        ColumnCounts::from_rows(rows[0].len(), rows.iter().map(|r| r.words()))
    }

    #[test]
    fn distance_sum_examples() {
        assert_eq!(counts_of(&["0011", "0011"]).distance_sum(), 0);
        assert_eq!(counts_of(&["0011", "1100"]).distance_sum(), 4);
        assert_eq!(counts_of(&["00", "01", "11"]).distance_sum(), 4);
    }

    #[test]
    fn apply_flip_examples() {
        let mut c = counts_of(&["1", "0"]);
        assert_eq!(c.apply_flip(&[]).unwrap(), 0);
        assert_eq!(c.apply_flip(&[(0, true)]).unwrap(), -1);
        assert_eq!(c.counts(), &[0]);
        assert!(matches!(c.apply_flip(&[(0, true)]), Err(Error::Consistency(_))));
        assert!(matches!(c.apply_flip(&[(3, false)]), Err(Error::Consistency(_))));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(diversity_bound(4, 4, 2).unwrap(), 4);
        assert_eq!(diversity_bound(3, 3, 2).unwrap(), 3);
        assert_eq!(diversity_bound(4, 1, 3).unwrap(), 6);
        assert!(diversity_bound(0, 1, 1).is_err());
        assert!(diversity_bound(3, 1, 0).is_err());
    }

    #[test]
    fn bound_saturates_at_half() {
        for b in 5..20 {
            assert_eq!(diversity_bound(10, b, 7).unwrap(), diversity_bound(10, 5, 7).unwrap());
        }
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_max_diversity(2, 2, 2).unwrap(), 2);
        assert_eq!(brute_force_max_diversity(1, 0, 3).unwrap(), 0);
        assert!(matches!(brute_force_max_diversity(7, 1, 2), Err(Error::Resource(_))));
        assert!(matches!(brute_force_max_diversity(3, 1, 5), Err(Error::Resource(_))));
    }
}
