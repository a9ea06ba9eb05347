use std::cmp::Ordering;

use super::dominance::{check_finite, strictly_dominates};
use crate::encoding::FitnessVector;
use crate::error::Result;

/// Strength, raw fitness, density and their sum for one candidate set.
#[derive(Clone, Debug, PartialEq)]
pub struct Spea2Fitness {
    pub strength: Vec<usize>,
    pub raw: Vec<f64>,
    pub density: Vec<f64>,
    /// `raw + density`; lower is better.
    pub fitness: Vec<f64>,
}

fn distance(a: &FitnessVector, b: &FitnessVector) -> f64 {
    (a.f1 - b.f1).hypot(a.f2 - b.f2)
}

/// SPEA2 fitness assignment over the union of population and archive.
/// Density uses the `⌊√M⌋`-th nearest neighbour in raw objective space.
pub fn spea2_fitness(points: &[FitnessVector]) -> Result<Spea2Fitness> {
    check_finite(points)?;
    let m = points.len();
    let mut strength = vec![0usize; m];
    for i in 0..m {
        strength[i] = (0..m).filter(|&j| strictly_dominates(&points[i], &points[j])).count();
    }
    let raw: Vec<f64> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| strictly_dominates(&points[j], &points[i]))
                .map(|j| strength[j] as f64)
                .sum()
        })
        .collect();
    let k = (m as f64).sqrt().floor() as usize;
    let mut row = Vec::with_capacity(m);
    let density: Vec<f64> = (0..m)
        .map(|i| {
            row.clear();
            row.extend((0..m).filter(|&j| j != i).map(|j| distance(&points[i], &points[j])));
            let sigma = if row.is_empty() {
                0.0
            } else {
                row.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                row[(k.max(1) - 1).min(row.len() - 1)]
            };
            1.0 / (sigma + 2.0)
        })
        .collect();
    let fitness = raw.iter().zip(&density).map(|(r, d)| r + d).collect();
    Ok(Spea2Fitness {
        strength,
        raw,
        density,
        fitness,
    })
}

/// Chooses `size` indices of `points` for the next archive.
///
/// Points with fitness below 1 (the non-dominated ones) are kept. Surplus is
/// truncated by repeatedly dropping the point whose sorted distance vector to
/// the remaining points is lexicographically smallest; a shortfall is filled
/// with the best dominated points by ascending fitness.
pub fn spea2_environmental_selection(points: &[FitnessVector], size: usize) -> Result<Vec<usize>> {
    let fit = spea2_fitness(points)?;
    let mut selected: Vec<usize> = (0..points.len()).filter(|&i| fit.fitness[i] < 1.0).collect();
    if selected.len() < size {
        let mut rest: Vec<usize> = (0..points.len()).filter(|&i| fit.fitness[i] >= 1.0).collect();
        rest.sort_by(|&a, &b| fit.fitness[a].partial_cmp(&fit.fitness[b]).unwrap_or(Ordering::Equal));
        selected.extend(rest.into_iter().take(size - selected.len()));
        selected.sort_unstable();
        return Ok(selected);
    }
    let dists: Vec<Vec<f64>> = selected
        .iter()
        .map(|&i| selected.iter().map(|&j| distance(&points[i], &points[j])).collect())
        .collect();
    let mut alive: Vec<usize> = (0..selected.len()).collect();
    while alive.len() > size {
        let mut best: Option<(usize, Vec<f64>)> = None;
        for (pos, &a) in alive.iter().enumerate() {
            let mut row: Vec<f64> = alive.iter().filter(|&&b| b != a).map(|&b| dists[a][b]).collect();
            row.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
            let smaller = match &best {
                None => true,
                Some((_, cur)) => row.partial_cmp(cur) == Some(Ordering::Less),
            };
            if smaller {
                best = Some((pos, row));
            }
        }
        let (pos, _) = best.expect("alive is nonempty");
        alive.remove(pos);
    }
    Ok(alive.into_iter().map(|a| selected[a]).collect())
}
