use std::cmp::Ordering;

use crate::encoding::FitnessVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    ADominates,
    BDominates,
    Equal,
    Incomparable,
}

/// Result of comparing two fitness vectors under maximization.
///
/// `strict` is set when one vector is at least as good everywhere and better
/// somewhere. Equal vectors dominate each other weakly but never strictly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DominanceRelation {
    pub outcome: Outcome,
    pub strict: bool,
}

impl DominanceRelation {
    /// Whether `a` weakly dominates `b`.
    pub fn a_weakly(&self) -> bool {
        matches!(self.outcome, Outcome::ADominates | Outcome::Equal)
    }

    pub fn b_weakly(&self) -> bool {
        matches!(self.outcome, Outcome::BDominates | Outcome::Equal)
    }
}

pub(crate) fn check_finite(points: &[FitnessVector]) -> Result<()> {
    match points.iter().position(|p| p.f1.is_nan() || p.f2.is_nan()) {
        Some(i) => Err(Error::invalid(format!("fitness vector {i} contains NaN"))),
        None => Ok(()),
    }
}

pub fn dominates(a: FitnessVector, b: FitnessVector) -> Result<DominanceRelation> {
    check_finite(&[a, b])?;
    let ge = a.f1 >= b.f1 && a.f2 >= b.f2;
    let le = a.f1 <= b.f1 && a.f2 <= b.f2;
    let outcome = match (ge, le) {
        (true, true) => Outcome::Equal,
        (true, false) => Outcome::ADominates,
        (false, true) => Outcome::BDominates,
        (false, false) => Outcome::Incomparable,
    };
    Ok(DominanceRelation {
        outcome,
        strict: matches!(outcome, Outcome::ADominates | Outcome::BDominates),
    })
}

/// `a ≻ b` for finite inputs.
#[inline]
pub fn strictly_dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    a.f1 >= b.f1 && a.f2 >= b.f2 && (a.f1 > b.f1 || a.f2 > b.f2)
}

/// Partitions `pop` into non-domination fronts, best first.
pub fn fast_nondominated_sort(pop: &[FitnessVector]) -> Result<Vec<Vec<usize>>> {
    check_finite(pop)?;
    let m = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut counter = vec![0usize; m];
    for i in 0..m {
        for j in i + 1..m {
            if strictly_dominates(&pop[i], &pop[j]) {
                dominated_by[i].push(j);
                counter[j] += 1;
            } else if strictly_dominates(&pop[j], &pop[i]) {
                dominated_by[j].push(i);
                counter[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..m).filter(|&i| counter[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counter[j] -= 1;
                if counter[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Crowding distance of each point within one front.
pub fn crowding_distance(front: &[FitnessVector]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let mut order: Vec<usize> = (0..m).collect();
    for obj in 0..2 {
        order.sort_by(|&a, &b| {
            front[a]
                .get(obj)
                .partial_cmp(&front[b].get(obj))
                .unwrap_or(Ordering::Equal)
        });
        let lo = front[order[0]].get(obj);
        let hi = front[order[m - 1]].get(obj);
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..m - 1 {
            let gap = front[order[k + 1]].get(obj) - front[order[k - 1]].get(obj);
            dist[order[k]] += gap / range;
        }
    }
    dist
}

/// Indices of the non-dominated points of `points`; among equal vectors only
/// the first occurrence is kept.
pub fn nondominated_indices(points: &[FitnessVector]) -> Vec<usize> {
    let mut keep = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if strictly_dominates(q, p) || (j < i && q == p) {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(a: f64, b: f64) -> FitnessVector {
        FitnessVector::new(a, b)
    }

    #[test]
    fn dominance_examples() {
        let r = dominates(fv(3.0, 5.0), fv(2.0, 5.0)).unwrap();
        assert_eq!(r.outcome, Outcome::ADominates);
        assert!(r.strict);
        let r = dominates(fv(3.0, 5.0), fv(5.0, 3.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Incomparable);
        let r = dominates(fv(4.0, 4.0), fv(4.0, 4.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Equal);
        assert!(r.a_weakly() && r.b_weakly() && !r.strict);
        assert!(dominates(fv(f64::NAN, 0.0), fv(0.0, 0.0)).is_err());
    }

    #[test]
    fn sort_examples() {
        let fronts = fast_nondominated_sort(&[fv(2.0, 2.0), fv(1.0, 2.0), fv(1.0, 1.0)]).unwrap();
        assert_eq!(fronts, vec![vec![0], vec![1], vec![2]]);
        let fronts = fast_nondominated_sort(&[fv(1.0, 1.0); 4]).unwrap();
        assert_eq!(fronts, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn crowding_examples() {
        assert!(crowding_distance(&[fv(0.0, 0.0)])[0].is_infinite());
        assert!(crowding_distance(&[fv(0.0, 1.0), fv(1.0, 0.0)]).iter().all(|d| d.is_infinite()));
        let d = crowding_distance(&[fv(0.0, 0.0), fv(1.0, 1.0), fv(2.0, 2.0)]);
        assert_eq!(d[1], 2.0);
        let d = crowding_distance(&[fv(0.0, 2.0), fv(1.0, 1.0), fv(1.0, 1.0), fv(2.0, 0.0)]);
        assert!(d[1].is_finite() && d[2].is_finite());
    }

    #[test]
    fn filter_keeps_one_duplicate() {
        let pts = [fv(1.0, 1.0), fv(2.0, 2.0), fv(2.0, 2.0), fv(3.0, 0.0)];
        assert_eq!(nondominated_indices(&pts), vec![1, 3]);
        assert!(nondominated_indices(&[]).is_empty());
    }
}
