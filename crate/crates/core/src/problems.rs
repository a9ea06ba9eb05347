//! Maximum cut, maximum coverage and minimum vertex cover on graphs, and the
//! individual-level bi-objective fitness built from them.
//!
//! All objectives are maximized. Coverage and vertex cover are constrained;
//! their violation degree `C(I) = Σ_x C(x)` penalizes both fitness
//! coordinates unless the vertex-cover repair keeps every solution feasible.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diversity::{diversity_bound, ColumnCounts};
use crate::encoding::bits::{iter_set_bits, tail_mask};
use crate::encoding::{mutate_solution, BitString, FitnessVector, Individual, Solution};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    MaxCut,
    MaxCoverage,
    MinVertexCover,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::MaxCoverage => "maxcoverage",
            ProblemKind::MinVertexCover => "minvertexcover",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxcut" => Ok(ProblemKind::MaxCut),
            "maxcoverage" | "coverage" => Ok(ProblemKind::MaxCoverage),
            "minvertexcover" | "mvc" | "vertexcover" => Ok(ProblemKind::MinVertexCover),
            other => Err(Error::config(format!("unknown problem `{other}`"))),
        }
    }
}

/// How per-solution objective values are reduced to `f1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Min,
    Avg,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Min => "min",
            Aggregation::Avg => "avg",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Aggregation::Min),
            "avg" | "average" | "mean" => Ok(Aggregation::Avg),
            other => Err(Error::config(format!("unknown aggregation `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub name: String,
    pub graph: Arc<Graph>,
    pub kind: ProblemKind,
    /// Cardinality threshold `B` (maximum coverage only).
    pub threshold: Option<usize>,
    /// Optimal objective value, used for normalization.
    pub known_opt: Option<f64>,
    /// Whether `graph` is the complement of the file contents.
    pub complemented: bool,
}

/// Per-solution violation degrees `C(x)` and their total `C(I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport {
    pub per_solution: Vec<f64>,
    pub total: f64,
}

impl ViolationReport {
    pub fn new(per_solution: Vec<f64>) -> Self {
        let total = per_solution.iter().sum();
        ViolationReport {
            per_solution,
            total,
        }
    }

    pub fn zero(r: usize) -> Self {
        ViolationReport::new(vec![0.0; r])
    }
}

/// Everything computed when evaluating an individual.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub fitness: FitnessVector,
    pub objectives: Vec<f64>,
    pub violations: ViolationReport,
    /// Distance sum over the diversity columns, before any penalty.
    pub distance_sum: u64,
    /// Vertex-space column counts (coverage and vertex cover).
    pub vertex_counts: Option<ColumnCounts>,
}

/// Whether the penalty `w·C(I)` on `f2` exceeds any achievable distance sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PenaltyOrdering {
    pub weight: u64,
    pub max_distance_sum: u64,
    pub dominates: bool,
}

// ---------------------------------------------------------------------------
// Per-solution functions on raw words.

fn cut_size_words(g: &Graph, x: &[u64]) -> usize {
    let bit = |v: u32| x[v as usize / 64] >> (v % 64) & 1;
    g.edges().iter().map(|&(u, v)| (bit(u) ^ bit(v)) as usize).sum()
}

fn closed_neighborhood_size(g: &Graph, x: &[u64], buf: &mut Vec<u64>) -> usize {
    buf.clear();
    buf.extend_from_slice(x);
    for v in iter_set_bits(x) {
        for (b, r) in buf.iter_mut().zip(g.adjacency_row(v)) {
            *b |= r;
        }
    }
    buf.iter().map(|w| w.count_ones() as usize).sum()
}

/// Iterates the clear bits of `x` that lie within `n`.
fn zero_bits(x: &[u64], n: usize) -> impl Iterator<Item = usize> + '_ {
    let last = x.len().saturating_sub(1);
    let mask = tail_mask(n);
    x.iter().enumerate().flat_map(move |(wi, &w)| {
        let mut rest = !w & if wi == last { mask } else { u64::MAX };
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            }
        })
    })
}

#[inline]
fn has_neighbor_outside(g: &Graph, v: usize, x: &[u64]) -> bool {
    g.adjacency_row(v).iter().zip(x).any(|(r, w)| r & !w != 0)
}

fn uncovered_edges_words(g: &Graph, x: &[u64]) -> usize {
    let twice: usize = zero_bits(x, g.vertex_count())
        .map(|v| {
            g.adjacency_row(v)
                .iter()
                .zip(x)
                .map(|(r, w)| (r & !w).count_ones() as usize)
                .sum::<usize>()
        })
        .sum();
    twice / 2
}

fn is_cover_words(g: &Graph, x: &[u64]) -> bool {
    zero_bits(x, g.vertex_count()).all(|v| !has_neighbor_outside(g, v, x))
}

/// Two-phase repair in place. Phase 1 visits clear bits in random order and
/// sets any vertex still incident to an uncovered edge; phase 2 visits set bits
/// in random order and clears any vertex whose neighbours are all selected.
fn repair_words<R: Rng + ?Sized>(g: &Graph, x: &mut [u64], rng: &mut R, order: &mut Vec<usize>) {
    let n = g.vertex_count();
    order.clear();
    order.extend(zero_bits(x, n));
    order.shuffle(rng);
    for &v in order.iter() {
        if has_neighbor_outside(g, v, x) {
            x[v / 64] |= 1 << (v % 64);
        }
    }
    order.clear();
    order.extend(iter_set_bits(x));
    order.shuffle(rng);
    for &v in order.iter() {
        if !has_neighbor_outside(g, v, x) {
            x[v / 64] &= !(1 << (v % 64));
        }
    }
}

fn check_len(g: &Graph, x: &Solution) {
    assert_eq!(
        x.len(),
        g.vertex_count(),
        "solution length must equal the vertex count"
    );
}

// ---------------------------------------------------------------------------
// Public per-solution operations.

/// Number of edges with exactly one endpoint in `x`.
pub fn maxcut_objective(g: &Graph, x: &Solution) -> usize {
    check_len(g, x);
    cut_size_words(g, x.words())
}

/// Indicator over edge ids of the edges cut by `x`.
pub fn maxcut_cut_indicator(g: &Graph, x: &Solution) -> BitString {
    check_len(g, x);
    let mut out = BitString::zeros(g.edge_count());
    for (id, &(u, v)) in g.edges().iter().enumerate() {
        if x.get(u as usize) != x.get(v as usize) {
            out.set(id, true);
        }
    }
    out
}

/// Size of the closed neighbourhood of `x`.
pub fn maxcoverage_objective(g: &Graph, x: &Solution) -> usize {
    check_len(g, x);
    closed_neighborhood_size(g, x.words(), &mut Vec::new())
}

/// `max(|x| - B, 0)`.
pub fn maxcoverage_violation(x: &Solution, threshold: usize) -> usize {
    x.count_ones().saturating_sub(threshold)
}

/// Number of unselected vertices.
pub fn mvc_objective(g: &Graph, x: &Solution) -> usize {
    check_len(g, x);
    g.vertex_count() - x.count_ones()
}

/// Number of edges with neither endpoint in `x`.
pub fn mvc_violation(g: &Graph, x: &Solution) -> usize {
    check_len(g, x);
    uncovered_edges_words(g, x.words())
}

pub fn is_vertex_cover(g: &Graph, x: &Solution) -> bool {
    check_len(g, x);
    is_cover_words(g, x.words())
}

/// Repairs `x` into a vertex cover from which no single vertex can be
/// dropped. Random visiting orders come from `rng`.
pub fn mvc_repair<R: Rng + ?Sized>(g: &Graph, x: &Solution, rng: &mut R) -> Solution {
    check_len(g, x);
    let mut words = x.words().to_vec();
    repair_words(g, &mut words, rng, &mut Vec::new());
    let mut out = x.clone();
    out.words_mut().copy_from_slice(&words);
    out
}

/// Mutation for coverage: within solution `x`, set bits flip with probability
/// `chi·(C(x)+1)` (capped at 1) and clear bits with probability `chi`.
pub fn coverage_biased_mutation<R: Rng + ?Sized>(
    ind: &mut Individual,
    chi: f64,
    violations: &ViolationReport,
    rng: &mut R,
) -> Result<usize> {
    if !(0.0..=1.0).contains(&chi) {
        return Err(Error::invalid(format!("mutation rate must lie in [0, 1], got {chi}")));
    }
    if violations.per_solution.len() != ind.r() {
        return Err(Error::invalid(format!(
            "violation report covers {} solutions, individual has {}",
            violations.per_solution.len(),
            ind.r()
        )));
    }
    let mut flips = 0;
    for (i, &c) in violations.per_solution.iter().enumerate() {
        let rate_one = (chi * (c + 1.0)).min(1.0);
        flips += mutate_solution(ind, i, chi, rate_one, rng);
    }
    Ok(flips)
}

// ---------------------------------------------------------------------------
// Instance-level behaviour.

impl ProblemInstance {
    pub fn new(name: impl Into<String>, graph: Graph, kind: ProblemKind) -> Self {
        ProblemInstance {
            name: name.into(),
            graph: Arc::new(graph),
            kind,
            threshold: None,
            known_opt: None,
            complemented: false,
        }
    }

    pub fn with_threshold(mut self, b: usize) -> Self {
        self.threshold = Some(b);
        self
    }

    pub fn with_known_opt(mut self, opt: f64) -> Self {
        self.known_opt = Some(opt);
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.vertex_count()
    }

    fn coverage_threshold(&self) -> Result<usize> {
        self.threshold.ok_or_else(|| Error::MissingMetadata {
            instance: self.name.clone(),
            key: "B".into(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ProblemKind::MaxCoverage {
            self.coverage_threshold()?;
        }
        Ok(())
    }

    /// Number of diversity columns: edges for max cut, vertices otherwise.
    pub fn diversity_columns(&self) -> usize {
        match self.kind {
            ProblemKind::MaxCut => self.graph.edge_count(),
            _ => self.n(),
        }
    }

    /// Upper bound on `f2` for `r` solutions: `g(|E|, OPT, r)` for max cut,
    /// `g(n, B, r)` for coverage and `g(n, OPT, r)` for vertex cover.
    ///
    /// For max cut the optimum is at least `|E|/2`, where the bound saturates,
    /// so it never depends on knowing `OPT`. Vertex cover needs `OPT`.
    pub fn diversity_bound(&self, r: usize) -> Option<u64> {
        let r = r as u64;
        match self.kind {
            ProblemKind::MaxCut => {
                let m = self.graph.edge_count() as u64;
                if m == 0 {
                    return Some(0);
                }
                let b = self.known_opt.map_or(m, |o| o.max(0.0) as u64);
                diversity_bound(m, b, r).ok()
            }
            ProblemKind::MaxCoverage => {
                diversity_bound(self.n() as u64, self.threshold? as u64, r).ok()
            }
            ProblemKind::MinVertexCover => {
                let opt = self.known_opt?;
                diversity_bound(self.n() as u64, opt.max(0.0) as u64, r).ok()
            }
        }
    }

    /// Penalty weight on `f2` per unit of violation: `r·|V|` for coverage,
    /// `r·|E|` for vertex cover.
    pub fn penalty_weight(&self, r: usize) -> u64 {
        match self.kind {
            ProblemKind::MaxCut => 0,
            ProblemKind::MaxCoverage => (r * self.n()) as u64,
            ProblemKind::MinVertexCover => (r * self.graph.edge_count()) as u64,
        }
    }

    /// Compares the penalty weight against the largest distance sum any `r`
    /// solutions can reach on this instance.
    pub fn penalty_ordering(&self, r: usize) -> PenaltyOrdering {
        let cols = self.diversity_columns() as u64;
        let max_distance_sum = if cols == 0 || r == 0 {
            0
        } else {
            diversity_bound(cols, cols, r as u64).unwrap_or(u64::MAX)
        };
        let weight = self.penalty_weight(r);
        PenaltyOrdering {
            weight,
            max_distance_sum,
            dominates: weight > max_distance_sum,
        }
    }

    pub fn objective(&self, x: &Solution) -> f64 {
        match self.kind {
            ProblemKind::MaxCut => maxcut_objective(&self.graph, x) as f64,
            ProblemKind::MaxCoverage => maxcoverage_objective(&self.graph, x) as f64,
            ProblemKind::MinVertexCover => mvc_objective(&self.graph, x) as f64,
        }
    }

    pub fn violation(&self, x: &Solution) -> f64 {
        match self.kind {
            ProblemKind::MaxCut => 0.0,
            ProblemKind::MaxCoverage => {
                maxcoverage_violation(x, self.threshold.unwrap_or(usize::MAX)) as f64
            }
            ProblemKind::MinVertexCover => mvc_violation(&self.graph, x) as f64,
        }
    }

    /// Violation degrees of every solution in `ind`.
    pub fn violations(&self, ind: &Individual) -> ViolationReport {
        let per = (0..ind.r())
            .map(|i| {
                let x = ind.solution_words(i);
                match self.kind {
                    ProblemKind::MaxCut => 0.0,
                    ProblemKind::MaxCoverage => {
                        let ones: usize = x.iter().map(|w| w.count_ones() as usize).sum();
                        ones.saturating_sub(self.threshold.unwrap_or(usize::MAX)) as f64
                    }
                    ProblemKind::MinVertexCover => uncovered_edges_words(&self.graph, x) as f64,
                }
            })
            .collect();
        ViolationReport::new(per)
    }

    /// Repairs every infeasible solution of `ind` in place; feasible ones are
    /// left alone. Returns how many solutions were repaired.
    pub fn repair_individual<R: Rng + ?Sized>(&self, ind: &mut Individual, rng: &mut R) -> Result<usize> {
        if self.kind != ProblemKind::MinVertexCover {
            return Err(Error::config(format!(
                "repair is only defined for minvertexcover, not {}",
                self.kind
            )));
        }
        let mut order = Vec::new();
        let mut repaired = 0;
        let mut touched = false;
        for i in 0..ind.r() {
            if is_cover_words(&self.graph, ind.solution_words(i)) {
                continue;
            }
            let mut words = ind.solution_words(i).to_vec();
            repair_words(&self.graph, &mut words, rng, &mut order);
            ind.solution_words_mut(i).copy_from_slice(&words);
            repaired += 1;
            touched = true;
        }
        if touched {
            ind.invalidate();
        }
        Ok(repaired)
    }

    /// Bi-objective fitness of `ind` under aggregation `agg`.
    ///
    /// With `repair_active` (vertex cover only) the solutions are assumed to
    /// have been repaired and the violation degree is not computed.
    pub fn evaluate(&self, agg: Aggregation, ind: &Individual, repair_active: bool) -> Result<Evaluation> {
        if repair_active && self.kind != ProblemKind::MinVertexCover {
            return Err(Error::config(format!(
                "repair is only defined for minvertexcover, not {}",
                self.kind
            )));
        }
        if ind.n() != self.n() {
            return Err(Error::invalid(format!(
                "individual over {} vertices, instance has {}",
                ind.n(),
                self.n()
            )));
        }
        let r = ind.r();
        match self.kind {
            ProblemKind::MaxCut => {
                let (objectives, distance_sum) = self.maxcut_columns(ind);
                let f1 = aggregate(agg, &objectives);
                Ok(Evaluation {
                    fitness: FitnessVector::new(f1, distance_sum as f64),
                    objectives,
                    violations: ViolationReport::zero(r),
                    distance_sum,
                    vertex_counts: None,
                })
            }
            ProblemKind::MaxCoverage | ProblemKind::MinVertexCover => {
                let counts = match ind.column_counts() {
                    Some(c) => c.clone(),
                    None => ind.recount_columns(),
                };
                let distance_sum = counts.distance_sum();
                let mut buf = Vec::new();
                let objectives: Vec<f64> = (0..r)
                    .map(|i| {
                        let x = ind.solution_words(i);
                        match self.kind {
                            ProblemKind::MaxCoverage => {
                                closed_neighborhood_size(&self.graph, x, &mut buf) as f64
                            }
                            _ => {
                                let ones: usize = x.iter().map(|w| w.count_ones() as usize).sum();
                                (self.n() - ones) as f64
                            }
                        }
                    })
                    .collect();
                if self.kind == ProblemKind::MaxCoverage {
                    self.coverage_threshold()?;
                }
                let violations = if repair_active {
                    ViolationReport::zero(r)
                } else {
                    self.violations(ind)
                };
                let c_total = violations.total;
                let f1 = match agg {
                    Aggregation::Min if c_total == 0.0 => aggregate(Aggregation::Min, &objectives),
                    Aggregation::Min => -c_total,
                    Aggregation::Avg => {
                        let feasible: f64 = objectives
                            .iter()
                            .zip(&violations.per_solution)
                            .filter(|(_, &c)| c == 0.0)
                            .map(|(f, _)| f)
                            .sum();
                        feasible / r as f64 - c_total
                    }
                };
                let f2 = distance_sum as f64 - self.penalty_weight(r) as f64 * c_total;
                Ok(Evaluation {
                    fitness: FitnessVector::new(f1, f2),
                    objectives,
                    violations,
                    distance_sum,
                    vertex_counts: Some(counts),
                })
            }
        }
    }

    /// Evaluates `ind` and stores fitness, violation and column counts on it.
    pub fn evaluate_in_place(&self, agg: Aggregation, ind: &mut Individual, repair_active: bool) -> Result<FitnessVector> {
        let eval = self.evaluate(agg, ind, repair_active)?;
        if let Some(counts) = eval.vertex_counts {
            ind.set_column_counts(counts);
        }
        ind.set_evaluation(eval.fitness, eval.violations.total);
        Ok(eval.fitness)
    }

    /// Per-solution cut sizes and the edge-space distance sum.
    fn maxcut_columns(&self, ind: &Individual) -> (Vec<f64>, u64) {
        let g = &self.graph;
        let r = ind.r();
        if r > 64 {
            let counts = edge_column_counts(g, ind);
            let objectives = (0..r)
                .map(|i| cut_size_words(g, ind.solution_words(i)) as f64)
                .collect();
            return (objectives, counts.distance_sum());
        }
        // Bit i of masks[v] says whether vertex v is in solution i, so the
        // XOR over an edge lists the solutions cutting it.
        let mut masks = vec![0u64; g.vertex_count()];
        for i in 0..r {
            for v in iter_set_bits(ind.solution_words(i)) {
                masks[v] |= 1 << i;
            }
        }
        let mut cuts = vec![0u64; r];
        let mut distance_sum = 0u64;
        let r64 = r as u64;
        for &(u, v) in g.edges() {
            let mut m = masks[u as usize] ^ masks[v as usize];
            let c = m.count_ones() as u64;
            distance_sum += c * (r64 - c);
            while m != 0 {
                cuts[m.trailing_zeros() as usize] += 1;
                m &= m - 1;
            }
        }
        (cuts.into_iter().map(|c| c as f64).collect(), distance_sum)
    }
}

/// Edge-space column counts: for each edge, how many solutions cut it.
pub fn edge_column_counts(g: &Graph, ind: &Individual) -> ColumnCounts {
    let rows: Vec<BitString> = ind
        .decode()
        .iter()
        .map(|x| maxcut_cut_indicator(g, x))
        .collect();
    ColumnCounts::from_rows(g.edge_count(), rows.iter().map(|b| b.words()))
}

fn aggregate(agg: Aggregation, values: &[f64]) -> f64 {
    match agg {
        Aggregation::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregation::Avg => values.iter().sum::<f64>() / values.len() as f64,
    }
}
