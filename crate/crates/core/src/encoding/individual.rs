use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bits::{iter_set_bits, tail_mask, words_for, BitString, Solution};
use crate::diversity::ColumnCounts;
use crate::error::{Error, Result};

/// Bi-objective fitness; both coordinates are maximized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    /// Aggregated objective quality.
    pub f1: f64,
    /// Diversity.
    pub f2: f64,
}

impl FitnessVector {
    pub const fn new(f1: f64, f2: f64) -> Self {
        FitnessVector { f1, f2 }
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite()
    }

    #[inline]
    pub fn get(&self, objective: usize) -> f64 {
        match objective {
            0 => self.f1,
            1 => self.f2,
            _ => panic!("fitness has two objectives, asked for {objective}"),
        }
    }
}

/// A multiset of `r` solutions over `n` vertices, encoded as the concatenation
/// `x_1 x_2 … x_r` of their indicator strings.
///
/// Logical bit `i·n + j` is bit `j` of solution `i`. Internally every solution
/// starts on a word boundary; pad bits are always zero.
#[derive(Clone, Debug)]
pub struct Individual {
    r: usize,
    n: usize,
    stride: usize,
    words: Vec<u64>,
    column_counts: Option<ColumnCounts>,
    fitness: Option<FitnessVector>,
    violation: Option<f64>,
}

impl PartialEq for Individual {
    /// Genome equality; caches are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.n == other.n && self.words == other.words
    }
}

impl Eq for Individual {}

impl Individual {
    /// All-zero individual of `r` solutions over `n` vertices.
    pub fn zeros(r: usize, n: usize) -> Self {
        let stride = words_for(n);
        Individual {
            r,
            n,
            stride,
            words: vec![0; r * stride],
            column_counts: None,
            fitness: None,
            violation: None,
        }
    }

    /// Every bit set independently with probability 1/2.
    pub fn random<R: Rng + ?Sized>(r: usize, n: usize, rng: &mut R) -> Self {
        let mut ind = Individual::zeros(r, n);
        let mask = tail_mask(n);
        for i in 0..r {
            let block = ind.solution_words_mut(i);
            for w in block.iter_mut() {
                *w = rng.random();
            }
            if let Some(last) = block.last_mut() {
                *last &= mask;
            }
        }
        ind
    }

    /// Concatenates `solutions` in order.
    pub fn encode(solutions: &[Solution]) -> Result<Self> {
        let Some(first) = solutions.first() else {
            return Err(Error::invalid("an individual needs at least one solution"));
        };
        let n = first.len();
        if let Some(bad) = solutions.iter().find(|s| s.len() != n) {
            return Err(Error::invalid(format!(
                "solution lengths differ: {n} vs {}",
                bad.len()
            )));
        }
        let mut ind = Individual::zeros(solutions.len(), n);
        for (i, s) in solutions.iter().enumerate() {
            ind.solution_words_mut(i).copy_from_slice(s.words());
        }
        Ok(ind)
    }

    /// Splits the concatenated genome back into its solutions.
    pub fn decode(&self) -> Vec<Solution> {
        (0..self.r).map(|i| self.solution(i)).collect()
    }

    /// Reads a flat genome of `r·n` bits. Fails unless `n` divides the length.
    pub fn from_genome(genome: &BitString, n: usize) -> Result<Self> {
        if n == 0 || !genome.len().is_multiple_of(n) || genome.is_empty() {
            return Err(Error::invalid(format!(
                "genome of length {} is not a whole number of {n}-bit solutions",
                genome.len()
            )));
        }
        let r = genome.len() / n;
        let mut ind = Individual::zeros(r, n);
        for p in genome.ones_iter() {
            ind.set_bit(p / n, p % n, true);
        }
        Ok(ind)
    }

    /// The flat `r·n`-bit genome.
    pub fn genome(&self) -> BitString {
        let mut out = BitString::zeros(self.r * self.n);
        for i in 0..self.r {
            for j in iter_set_bits(self.solution_words(i)) {
                out.set(i * self.n + j, true);
            }
        }
        out
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn genome_len(&self) -> usize {
        self.r * self.n
    }

    pub fn same_shape(&self, other: &Individual) -> bool {
        self.r == other.r && self.n == other.n
    }

    pub fn solution(&self, i: usize) -> Solution {
        BitString::from_words(self.solution_words(i).to_vec(), self.n)
            .expect("pad bits are kept zero")
    }

    #[inline]
    pub fn solution_words(&self, i: usize) -> &[u64] {
        &self.words[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn solution_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.words[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn bit(&self, solution: usize, vertex: usize) -> bool {
        debug_assert!(solution < self.r && vertex < self.n);
        self.words[solution * self.stride + vertex / 64] >> (vertex % 64) & 1 == 1
    }

    pub(crate) fn set_bit(&mut self, solution: usize, vertex: usize, value: bool) {
        let idx = solution * self.stride + vertex / 64;
        let mask = 1u64 << (vertex % 64);
        if value {
            self.words[idx] |= mask;
        } else {
            self.words[idx] &= !mask;
        }
    }

    /// Flips one bit, keeping cached column counts in step. Returns the old bit.
    pub(crate) fn flip_bit(&mut self, solution: usize, vertex: usize) -> bool {
        let idx = solution * self.stride + vertex / 64;
        let mask = 1u64 << (vertex % 64);
        let old = self.words[idx] & mask != 0;
        self.words[idx] ^= mask;
        if let Some(counts) = self.column_counts.as_mut() {
            counts
                .apply_flip(&[(vertex, old)])
                .expect("cached counts track the genome");
        }
        self.fitness = None;
        self.violation = None;
        old
    }

    pub fn fitness(&self) -> Option<FitnessVector> {
        self.fitness
    }

    pub fn violation(&self) -> Option<f64> {
        self.violation
    }

    pub fn column_counts(&self) -> Option<&ColumnCounts> {
        self.column_counts.as_ref()
    }

    /// Vertex-column counts, computed now if not cached.
    pub fn ensure_column_counts(&mut self) -> &ColumnCounts {
        if self.column_counts.is_none() {
            self.column_counts = Some(self.recount_columns());
        }
        self.column_counts.as_ref().unwrap()
    }

    pub fn recount_columns(&self) -> ColumnCounts {
        ColumnCounts::from_rows(self.n, (0..self.r).map(|i| self.solution_words(i)))
    }

    pub(crate) fn set_evaluation(&mut self, fitness: FitnessVector, violation: f64) {
        self.fitness = Some(fitness);
        self.violation = Some(violation);
    }

    pub(crate) fn set_column_counts(&mut self, counts: ColumnCounts) {
        self.column_counts = Some(counts);
    }

    /// Drops every cache; used after operators that rewrite bits wholesale.
    pub(crate) fn invalidate(&mut self) {
        self.column_counts = None;
        self.fitness = None;
        self.violation = None;
    }

    /// Checks that cached column counts agree with a fresh recount.
    pub fn audit_caches(&self) -> Result<()> {
        if let Some(cached) = &self.column_counts {
            let fresh = self.recount_columns();
            if &fresh != cached {
                return Err(Error::Consistency(
                    "cached column counts disagree with the genome".into(),
                ));
            }
        }
        Ok(())
    }

    /// Reorders solution blocks so that new block `i` is old block `perm[i]`.
    pub(crate) fn permute_solutions(&mut self, perm: &[usize]) {
        debug_assert_eq!(perm.len(), self.r);
        let mut words = vec![0u64; self.words.len()];
        for (dst, &src) in perm.iter().enumerate() {
            words[dst * self.stride..(dst + 1) * self.stride]
                .copy_from_slice(self.solution_words(src));
        }
        self.words = words;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sols(xs: &[&str]) -> Vec<Solution> {
        xs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn encode_concatenates() {
        let ind = Individual::encode(&sols(&["101", "010"])).unwrap();
        assert_eq!(ind.genome().to_string(), "101010");
        assert!(ind.fitness().is_none());
        let ind = Individual::encode(&sols(&["0000"])).unwrap();
        assert_eq!(ind.genome().to_string(), "0000");
    }

    #[test]
    fn encode_rejects_ragged() {
        assert!(Individual::encode(&sols(&["101", "01"])).is_err());
        assert!(Individual::encode(&[]).is_err());
    }

    #[test]
    fn decode_splits() {
        let g: BitString = "101010".parse().unwrap();
        let ind = Individual::from_genome(&g, 3).unwrap();
        assert_eq!(ind.decode(), sols(&["101", "010"]));
        let g: BitString = "0000".parse().unwrap();
        let ind = Individual::from_genome(&g, 1).unwrap();
        assert_eq!(ind.r(), 4);
        assert_eq!(ind.decode(), sols(&["0", "0", "0", "0"]));
        assert!(Individual::from_genome(&g, 3).is_err());
    }

    #[test]
    fn wide_solutions_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ind = Individual::random(5, 130, &mut rng);
        let back = Individual::from_genome(&ind.genome(), 130).unwrap();
        assert_eq!(back, ind);
        assert_eq!(Individual::encode(&ind.decode()).unwrap(), ind);
    }

    #[test]
    fn flip_bit_tracks_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut ind = Individual::random(4, 20, &mut rng);
        ind.ensure_column_counts();
        for k in 0..50 {
            ind.flip_bit(k % 4, (k * 7) % 20);
        }
        ind.audit_caches().unwrap();
    }
}
