//! NSGA-II and SPEA2 over individuals, with budget-terminated runs.

mod dominance;
mod spea2;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use log::{debug, log_enabled, Level};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use dominance::{
    crowding_distance, dominates, fast_nondominated_sort, nondominated_indices,
    strictly_dominates, DominanceRelation, Outcome,
};
pub use spea2::{spea2_environmental_selection, spea2_fitness, Spea2Fitness};

use crate::archive::{ArchivePoint, RunArchive, RunMeta, SOFTWARE_VERSION};
use crate::encoding::{standard_bit_mutation, uniform_crossover, FitnessVector, Individual};
use crate::error::{Error, Result};
use crate::indicators::{hypervolume_2d, NormalizationFrame};
use crate::problems::{coverage_biased_mutation, Aggregation, ProblemInstance, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nsga2,
    Spea2,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Spea2 => "spea2",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "nsga2" | "nsgaii" => Ok(Algorithm::Nsga2),
            "spea2" => Ok(Algorithm::Spea2),
            other => Err(Error::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Which mutation operator produces offspring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MutationKind {
    Standard,
    /// Coverage-only: set bits flip faster in solutions over the threshold.
    Biased,
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutationKind::Standard => "standard",
            MutationKind::Biased => "biased",
        })
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" => Ok(MutationKind::Standard),
            "biased" => Ok(MutationKind::Biased),
            other => Err(Error::config(format!("unknown mutation `{other}`"))),
        }
    }
}

/// Parameters of a single run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub r: usize,
    pub population_size: usize,
    /// Budget is `budget_multiplier · r · n · N` individual evaluations.
    pub budget_multiplier: f64,
    pub crossover_rate: f64,
    /// Per-bit mutation rate is `chi_numerator / n`.
    pub chi_numerator: f64,
    pub mutation: MutationKind,
    pub repair: bool,
    pub seed: u64,
    pub run_index: usize,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, r: usize) -> Self {
        RunConfig {
            algorithm,
            r,
            population_size: 20,
            budget_multiplier: 5.0,
            crossover_rate: 0.8,
            chi_numerator: 0.5,
            mutation: MutationKind::Standard,
            repair: false,
            seed: 0,
            run_index: 0,
        }
    }

    pub fn budget(&self, n: usize) -> u64 {
        (self.budget_multiplier * (self.r * n * self.population_size) as f64).round() as u64
    }

    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        inst.validate()?;
        if self.r == 0 || self.population_size == 0 {
            return Err(Error::config("r and N must be at least 1"));
        }
        if inst.n() == 0 {
            return Err(Error::config(format!("instance {} has no vertices", inst.name)));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::config(format!(
                "crossover rate must lie in [0, 1], got {}",
                self.crossover_rate
            )));
        }
        let chi = self.chi_numerator / inst.n() as f64;
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::config(format!("mutation rate {chi} is outside [0, 1]")));
        }
        if self.mutation == MutationKind::Biased && inst.kind != ProblemKind::MaxCoverage {
            return Err(Error::config("biased mutation is only defined for maxcoverage"));
        }
        if self.repair && inst.kind != ProblemKind::MinVertexCover {
            return Err(Error::config("repair is only defined for minvertexcover"));
        }
        if !(self.budget_multiplier.is_finite() && self.budget_multiplier >= 0.0) {
            return Err(Error::config("budget multiplier must be a non-negative number"));
        }
        let budget = self.budget(inst.n());
        if budget < self.population_size as u64 {
            return Err(Error::config(format!(
                "budget of {budget} evaluations is smaller than the population of {}",
                self.population_size
            )));
        }
        Ok(())
    }
}

/// Samples two indices uniformly with replacement and returns the better one
/// under `cmp` (`Less` means the first argument wins); ties are a coin flip.
pub fn binary_tournament<R: Rng + ?Sized>(
    len: usize,
    cmp: impl Fn(usize, usize) -> Ordering,
    rng: &mut R,
) -> usize {
    assert!(len > 0, "tournament over an empty population");
    let a = rng.random_range(0..len);
    let b = rng.random_range(0..len);
    match cmp(a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

struct Engine<'a> {
    inst: &'a ProblemInstance,
    agg: Aggregation,
    cfg: &'a RunConfig,
    chi: f64,
    rng: ChaCha8Rng,
    evaluations: u64,
    budget: u64,
    generations: u64,
    frame: Option<NormalizationFrame>,
}

impl Engine<'_> {
    fn evaluate(&mut self, ind: &mut Individual) -> Result<()> {
        self.inst.evaluate_in_place(self.agg, ind, self.cfg.repair)?;
        self.evaluations += 1;
        Ok(())
    }

    fn repair(&mut self, ind: &mut Individual) -> Result<()> {
        if self.cfg.repair {
            self.inst.repair_individual(ind, &mut self.rng)?;
        }
        Ok(())
    }

    fn fresh(&mut self) -> Result<Individual> {
        let mut ind = Individual::random(self.cfg.r, self.inst.n(), &mut self.rng);
        self.repair(&mut ind)?;
        self.evaluate(&mut ind)?;
        Ok(ind)
    }

    fn mutate(&mut self, ind: &mut Individual) -> Result<()> {
        match self.cfg.mutation {
            MutationKind::Standard => {
                standard_bit_mutation(ind, self.chi, &mut self.rng)?;
            }
            MutationKind::Biased => {
                let report = self.inst.violations(ind);
                coverage_biased_mutation(ind, self.chi, &report, &mut self.rng)?;
            }
        }
        Ok(())
    }

    /// Crossover, mutation and repair; the children are not yet evaluated.
    fn vary(&mut self, a: &Individual, b: &Individual) -> Result<(Individual, Individual)> {
        let (mut c1, mut c2) = uniform_crossover(a, b, self.cfg.crossover_rate, &mut self.rng)?;
        for c in [&mut c1, &mut c2] {
            self.mutate(c)?;
            self.repair(c)?;
        }
        Ok((c1, c2))
    }

    /// Produces up to `N` evaluated offspring, never exceeding the budget.
    fn offspring(&mut self, parents: &[Individual], cmp: impl Fn(usize, usize) -> Ordering) -> Result<Vec<Individual>> {
        let k = (self.cfg.population_size as u64).min(self.budget - self.evaluations) as usize;
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let i = binary_tournament(parents.len(), &cmp, &mut self.rng);
            let j = binary_tournament(parents.len(), &cmp, &mut self.rng);
            let (mut c1, mut c2) = self.vary(&parents[i], &parents[j])?;
            self.evaluate(&mut c1)?;
            out.push(c1);
            if out.len() < k {
                self.evaluate(&mut c2)?;
                out.push(c2);
            }
        }
        Ok(out)
    }

    fn trace(&self, pop: &[Individual]) {
        if !log_enabled!(Level::Debug) {
            return;
        }
        let fits = fitness_of(pop);
        let front: Vec<FitnessVector> = nondominated_indices(&fits).into_iter().map(|i| fits[i]).collect();
        let hv = self.frame.as_ref().map(|f| {
            let pts: Vec<FitnessVector> = front.iter().map(|&p| f.normalize(p)).collect();
            hypervolume_2d(&pts, FitnessVector::new(0.0, 0.0))
        });
        debug!(
            "{} gen {} evals {}/{}: front {} hv {:?}",
            self.cfg.algorithm,
            self.generations,
            self.evaluations,
            self.budget,
            front.len(),
            hv
        );
    }

    fn nsga2(&mut self) -> Result<Vec<Individual>> {
        let n_pop = self.cfg.population_size;
        let mut pop = (0..n_pop).map(|_| self.fresh()).collect::<Result<Vec<_>>>()?;
        let (mut rank, mut crowd) = rank_and_crowding(&fitness_of(&pop))?;
        while self.evaluations < self.budget {
            let off = {
                let (rank, crowd) = (&rank, &crowd);
                self.offspring(&pop, |a, b| {
                    rank[a].cmp(&rank[b]).then_with(|| {
                        crowd[b].partial_cmp(&crowd[a]).unwrap_or(Ordering::Equal)
                    })
                })?
            };
            pop.extend(off);
            let fits = fitness_of(&pop);
            let (keep, new_rank, new_crowd) = nsga2_replacement(&fits, n_pop)?;
            let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
            pop = keep.iter().map(|&i| slots[i].take().expect("indices are unique")).collect();
            rank = new_rank;
            crowd = new_crowd;
            self.generations += 1;
            self.trace(&pop);
        }
        Ok(pop)
    }

    fn spea2(&mut self) -> Result<Vec<Individual>> {
        let n_pop = self.cfg.population_size;
        let mut pop = (0..n_pop).map(|_| self.fresh()).collect::<Result<Vec<_>>>()?;
        let mut archive: Vec<Individual> = Vec::new();
        loop {
            let mut union = std::mem::take(&mut archive);
            union.append(&mut pop);
            let fits = fitness_of(&union);
            let fit = spea2_fitness(&fits)?.fitness;
            let keep = spea2_environmental_selection(&fits, n_pop)?;
            let arch_fit: Vec<f64> = keep.iter().map(|&i| fit[i]).collect();
            let mut slots: Vec<Option<Individual>> = union.into_iter().map(Some).collect();
            archive = keep.iter().map(|&i| slots[i].take().expect("indices are unique")).collect();
            self.trace(&archive);
            if self.evaluations >= self.budget {
                break;
            }
            pop = self.offspring(&archive, |a, b| {
                arch_fit[a].partial_cmp(&arch_fit[b]).unwrap_or(Ordering::Equal)
            })?;
            self.generations += 1;
        }
        Ok(archive)
    }
}

fn fitness_of(pop: &[Individual]) -> Vec<FitnessVector> {
    pop.iter()
        .map(|i| i.fitness().expect("population members are evaluated"))
        .collect()
}

fn rank_and_crowding(fits: &[FitnessVector]) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut rank = vec![0; fits.len()];
    let mut crowd = vec![0.0; fits.len()];
    for (r, front) in fast_nondominated_sort(fits)?.iter().enumerate() {
        let pts: Vec<FitnessVector> = front.iter().map(|&i| fits[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    Ok((rank, crowd))
}

/// Picks `size` survivors from `fits` by front, then by crowding distance
/// within the last admitted front (ties keep the lower index). Returns the
/// survivor indices with their ranks and crowding distances.
pub fn nsga2_replacement(fits: &[FitnessVector], size: usize) -> Result<(Vec<usize>, Vec<usize>, Vec<f64>)> {
    let mut keep = Vec::with_capacity(size);
    let mut rank = Vec::with_capacity(size);
    let mut crowd = Vec::with_capacity(size);
    for (r, front) in fast_nondominated_sort(fits)?.into_iter().enumerate() {
        if keep.len() >= size {
            break;
        }
        let pts: Vec<FitnessVector> = front.iter().map(|&i| fits[i]).collect();
        let dist = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        if keep.len() + front.len() > size {
            order.sort_by(|&a, &b| {
                dist[b]
                    .partial_cmp(&dist[a])
                    .unwrap_or(Ordering::Equal)
                    .then(front[a].cmp(&front[b]))
            });
            order.truncate(size - keep.len());
        }
        for k in order {
            keep.push(front[k]);
            rank.push(r);
            crowd.push(dist[k]);
        }
    }
    Ok((keep, rank, crowd))
}

/// Runs one EMO optimization and returns its final non-dominated individuals.
pub fn run(inst: &ProblemInstance, agg: Aggregation, cfg: &RunConfig) -> Result<RunArchive> {
    cfg.validate(inst)?;
    let n = inst.n();
    let budget = cfg.budget(n);
    let frame = match (inst.known_opt, inst.diversity_bound(cfg.r)) {
        (Some(opt), Some(g)) => Some(NormalizationFrame::extreme(opt, g as f64)),
        _ => None,
    };
    let mut engine = Engine {
        inst,
        agg,
        cfg,
        chi: cfg.chi_numerator / n as f64,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        evaluations: 0,
        budget,
        generations: 0,
        frame,
    };
    let final_pop = match cfg.algorithm {
        Algorithm::Nsga2 => engine.nsga2()?,
        Algorithm::Spea2 => engine.spea2()?,
    };
    debug_assert!(engine.evaluations <= budget);
    let fits = fitness_of(&final_pop);
    let points = nondominated_indices(&fits)
        .into_iter()
        .map(|i| ArchivePoint::from_individual(&final_pop[i]))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunArchive {
        meta: RunMeta {
            software_version: SOFTWARE_VERSION.to_string(),
            instance: inst.name.clone(),
            problem: inst.kind,
            algorithm: cfg.algorithm,
            aggregation: agg,
            r: cfg.r,
            n,
            population_size: cfg.population_size,
            run_index: cfg.run_index,
            seed: cfg.seed,
            budget,
            evaluations: engine.evaluations,
            generations: engine.generations,
            crossover_rate: cfg.crossover_rate,
            mutation_rate: engine.chi,
            mutation: cfg.mutation,
            repair: cfg.repair,
            threshold: inst.threshold,
            known_opt: inst.known_opt,
            diversity_bound: inst.diversity_bound(cfg.r),
        },
        points,
    })
}
