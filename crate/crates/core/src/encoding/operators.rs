use rand::seq::SliceRandom;
use rand::Rng;

use super::individual::Individual;
use crate::error::{Error, Result};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Gap to the next success of a Bernoulli(p) sequence, `ln_q = ln(1 - p)`.
#[inline]
fn geometric_gap<R: Rng + ?Sized>(rng: &mut R, ln_q: f64) -> usize {
    let u: f64 = rng.random();
    let gap = (1.0 - u).ln() / ln_q;
    if gap >= usize::MAX as f64 {
        usize::MAX
    } else {
        gap as usize
    }
}

/// Flips bits of solution `i` independently: set bits with probability
/// `rate_one`, clear bits with probability `rate_zero`. Candidates are drawn
/// at the larger rate by geometric skipping and thinned to the smaller one.
pub(crate) fn mutate_solution<R: Rng + ?Sized>(
    ind: &mut Individual,
    i: usize,
    rate_zero: f64,
    rate_one: f64,
    rng: &mut R,
) -> usize {
    let n = ind.n();
    let hi = rate_zero.max(rate_one);
    if hi <= 0.0 || n == 0 {
        return 0;
    }
    let mut flips = 0;
    if hi >= 1.0 {
        for j in 0..n {
            let bit = ind.bit(i, j);
            let rate = if bit { rate_one } else { rate_zero };
            if rate >= 1.0 || rng.random_bool(rate) {
                ind.flip_bit(i, j);
                flips += 1;
            }
        }
        return flips;
    }
    let ln_q = (1.0 - hi).ln();
    let mut j = geometric_gap(rng, ln_q);
    while j < n {
        let rate = if ind.bit(i, j) { rate_one } else { rate_zero };
        if rate >= hi || rng.random_bool(rate / hi) {
            ind.flip_bit(i, j);
            flips += 1;
        }
        j = j.saturating_add(1).saturating_add(geometric_gap(rng, ln_q));
    }
    flips
}

/// Flips each of the `r·n` bits independently with probability `chi`.
/// Cached column counts are updated per flip; fitness is invalidated when
/// any bit changes. Returns the number of flips.
pub fn standard_bit_mutation<R: Rng + ?Sized>(
    ind: &mut Individual,
    chi: f64,
    rng: &mut R,
) -> Result<usize> {
    check_probability("mutation rate", chi)?;
    let mut flips = 0;
    for i in 0..ind.r() {
        flips += mutate_solution(ind, i, chi, chi, rng);
    }
    Ok(flips)
}

/// Reorders the `r` solution blocks by a uniformly random permutation and
/// returns it (new block `i` is old block `perm[i]`). The solution multiset is
/// unchanged, so cached counts and fitness stay valid.
pub fn shuffle_solutions<R: Rng + ?Sized>(ind: &mut Individual, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..ind.r()).collect();
    if ind.r() < 2 {
        return perm;
    }
    perm.shuffle(rng);
    ind.permute_solutions(&perm);
    perm
}

/// Offspring of [`uniform_crossover_traced`] together with the block
/// permutation applied to the second parent, if crossover fired.
#[derive(Clone, Debug)]
pub struct CrossoverOutcome {
    pub first: Individual,
    pub second: Individual,
    pub permutation: Option<Vec<usize>>,
}

/// Uniform crossover on the concatenated genome.
///
/// With probability `1 - rate` the parents are returned unchanged. Otherwise
/// the second parent's solutions are shuffled first, so any solution of `a`
/// can meet any solution of `b`, and then each bit position is swapped
/// between the two offspring with probability 1/2.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rate: f64,
    rng: &mut R,
) -> Result<(Individual, Individual)> {
    let out = uniform_crossover_traced(a, b, rate, rng)?;
    Ok((out.first, out.second))
}

/// [`uniform_crossover`] that also reports how the second parent was shuffled.
/// Bit conservation holds per position against `a` and the shuffled `b`.
pub fn uniform_crossover_traced<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    rate: f64,
    rng: &mut R,
) -> Result<CrossoverOutcome> {
    check_probability("crossover rate", rate)?;
    if !a.same_shape(b) {
        return Err(Error::invalid(format!(
            "parents differ in shape: {}x{} vs {}x{}",
            a.r(),
            a.n(),
            b.r(),
            b.n()
        )));
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if !rng.random_bool(rate) {
        return Ok(CrossoverOutcome {
            first: c1,
            second: c2,
            permutation: None,
        });
    }
    let perm = shuffle_solutions(&mut c2, rng);
    for (x, y) in c1.words_mut().iter_mut().zip(c2.words_mut().iter_mut()) {
        let swap: u64 = rng.random();
        let d = (*x ^ *y) & swap;
        *x ^= d;
        *y ^= d;
    }
    c1.invalidate();
    c2.invalidate();
    Ok(CrossoverOutcome {
        first: c1,
        second: c2,
        permutation: Some(perm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::BitString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut rng = rng();
        let ind = Individual::random(3, 50, &mut rng);
        let mut m = ind.clone();
        assert_eq!(standard_bit_mutation(&mut m, 0.0, &mut rng).unwrap(), 0);
        assert_eq!(m, ind);
    }

    #[test]
    fn unit_rate_complements() {
        let mut rng = rng();
        let ind = Individual::random(3, 70, &mut rng);
        let mut m = ind.clone();
        standard_bit_mutation(&mut m, 1.0, &mut rng).unwrap();
        let g = ind.genome();
        let h = m.genome();
        assert!(g.iter().zip(h.iter()).all(|(a, b)| a != b));
    }

    #[test]
    fn rejects_bad_rates() {
        let mut rng = rng();
        let mut ind = Individual::zeros(2, 4);
        assert!(standard_bit_mutation(&mut ind, 1.5, &mut rng).is_err());
        let other = ind.clone();
        assert!(uniform_crossover(&ind, &other, -0.1, &mut rng).is_err());
    }

    #[test]
    fn mutation_keeps_counts_in_step() {
        let mut rng = rng();
        let mut ind = Individual::random(6, 40, &mut rng);
        ind.ensure_column_counts();
        for _ in 0..100 {
            standard_bit_mutation(&mut ind, 0.05, &mut rng).unwrap();
        }
        ind.audit_caches().unwrap();
    }

    #[test]
    fn shuffle_single_block_is_identity() {
        let mut rng = rng();
        let ind = Individual::random(1, 33, &mut rng);
        let mut s = ind.clone();
        shuffle_solutions(&mut s, &mut rng);
        assert_eq!(s, ind);
    }

    #[test]
    fn shuffle_of_identical_blocks_is_identity() {
        let x: BitString = "1101001".parse().unwrap();
        let ind = Individual::encode(&[x.clone(), x.clone(), x.clone(), x]).unwrap();
        let mut s = ind.clone();
        shuffle_solutions(&mut s, &mut rng());
        assert_eq!(s, ind);
    }

    #[test]
    fn crossover_of_equal_parents() {
        let mut rng = rng();
        let x: BitString = "10110".parse().unwrap();
        let a = Individual::encode(&[x.clone(), x]).unwrap();
        let (c1, c2) = uniform_crossover(&a, &a, 1.0, &mut rng).unwrap();
        assert_eq!(c1, a);
        assert_eq!(c2, a);
    }

    #[test]
    fn crossover_rate_zero_copies() {
        let mut rng = rng();
        let a = Individual::random(4, 20, &mut rng);
        let b = Individual::random(4, 20, &mut rng);
        let (c1, c2) = uniform_crossover(&a, &b, 0.0, &mut rng).unwrap();
        assert_eq!((c1, c2), (a, b));
    }

    #[test]
    fn crossover_zeros_ones_complementary() {
        let mut rng = rng();
        let a = Individual::zeros(3, 45);
        let mut b = Individual::zeros(3, 45);
        standard_bit_mutation(&mut b, 1.0, &mut rng).unwrap();
        let (c1, c2) = uniform_crossover(&a, &b, 1.0, &mut rng).unwrap();
        let (g1, g2) = (c1.genome(), c2.genome());
        assert!(g1.iter().zip(g2.iter()).all(|(x, y)| x != y));
    }

    #[test]
    fn crossover_shape_mismatch() {
        let mut rng = rng();
        let a = Individual::zeros(3, 5);
        let b = Individual::zeros(5, 3);
        assert!(uniform_crossover(&a, &b, 1.0, &mut rng).is_err());
    }
}
