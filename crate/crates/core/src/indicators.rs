//! Normalized fronts, IGD+ and hypervolume, and the per-group indicator
//! table built from many run archives.
//!
//! Fitness is mapped into `[0, 1]²` maximization space. The hypervolume
//! reference point is the origin. Two frames are used: the extreme frame
//! `[0, OPT] × [0, g]` with the ideal point `(1, 1)` as IGD+ reference, and
//! the aggregated frame spanned by the union of all runs, whose non-dominated
//! points form the reference set.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use serde::Serialize;

use crate::archive::RunArchive;
use crate::emo::{nondominated_indices, Algorithm};
use crate::encoding::FitnessVector;
use crate::error::{Error, Result};
use crate::problems::{Aggregation, ProblemKind};
use crate::stats::{median, wilcoxon_signed_rank};

/// Significance level of the pairwise algorithm comparison.
pub const ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    Extreme,
    Aggregated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationFrame {
    pub f1_lo: f64,
    pub f1_hi: f64,
    pub f2_lo: f64,
    pub f2_hi: f64,
    pub mode: FrameMode,
    /// Set when an axis bound had to be taken from observed values.
    pub fallback: bool,
}

impl NormalizationFrame {
    /// A zero-width axis is widened to unit width.
    pub fn new(f1: (f64, f64), f2: (f64, f64), mode: FrameMode) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo, lo + 1.0) };
        let (f1_lo, f1_hi) = widen(f1);
        let (f2_lo, f2_hi) = widen(f2);
        NormalizationFrame {
            f1_lo,
            f1_hi,
            f2_lo,
            f2_hi,
            mode,
            fallback: false,
        }
    }

    pub fn extreme(opt: f64, diversity_bound: f64) -> Self {
        NormalizationFrame::new((0.0, opt), (0.0, diversity_bound), FrameMode::Extreme)
    }

    /// Bounding box of `points`; `None` when there are none.
    pub fn aggregated(points: &[FitnessVector]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let lo1 = points.iter().map(|p| p.f1).fold(f64::INFINITY, f64::min);
        let hi1 = points.iter().map(|p| p.f1).fold(f64::NEG_INFINITY, f64::max);
        let lo2 = points.iter().map(|p| p.f2).fold(f64::INFINITY, f64::min);
        let hi2 = points.iter().map(|p| p.f2).fold(f64::NEG_INFINITY, f64::max);
        Some(NormalizationFrame::new((lo1, hi1), (lo2, hi2), FrameMode::Aggregated))
    }

    pub fn normalize(&self, p: FitnessVector) -> FitnessVector {
        let map = |x: f64, lo: f64, hi: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        FitnessVector::new(map(p.f1, self.f1_lo, self.f1_hi), map(p.f2, self.f2_lo, self.f2_hi))
    }

    pub fn normalize_all(&self, points: &[FitnessVector]) -> Vec<FitnessVector> {
        points.iter().map(|&p| self.normalize(p)).collect()
    }
}

/// Maximal mutually non-dominated subset; equal points are kept once.
pub fn nondominated_filter(points: &[FitnessVector]) -> Vec<FitnessVector> {
    nondominated_indices(points).into_iter().map(|i| points[i]).collect()
}

/// Area dominated by `front` and dominating `reference`. Points below the
/// reference are clamped onto it.
pub fn hypervolume_2d(front: &[FitnessVector], reference: FitnessVector) -> f64 {
    let mut pts: Vec<FitnessVector> = front
        .iter()
        .map(|p| {
            if p.f1 < reference.f1 || p.f2 < reference.f2 {
                warn!("point ({}, {}) lies below the reference; clamped", p.f1, p.f2);
            }
            FitnessVector::new(p.f1.max(reference.f1), p.f2.max(reference.f2))
        })
        .collect();
    pts = nondominated_filter(&pts);
    pts.sort_by(|a, b| b.f1.partial_cmp(&a.f1).unwrap_or(Ordering::Equal));
    let mut area = 0.0;
    let mut prev = reference.f2;
    for p in pts {
        if p.f2 > prev {
            area += (p.f1 - reference.f1) * (p.f2 - prev);
            prev = p.f2;
        }
    }
    area
}

/// Mean over reference points of the smallest shortfall distance to the
/// front. An empty front scores infinity.
pub fn igd_plus(front: &[FitnessVector], refset: &[FitnessVector]) -> Result<f64> {
    if refset.is_empty() {
        return Err(Error::invalid("IGD+ needs a nonempty reference set"));
    }
    if front.is_empty() {
        return Ok(f64::INFINITY);
    }
    let total: f64 = refset
        .iter()
        .map(|z| {
            front
                .iter()
                .map(|a| {
                    let d1 = (z.f1 - a.f1).max(0.0);
                    let d2 = (z.f2 - a.f2).max(0.0);
                    (d1 * d1 + d2 * d2).sqrt()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / refset.len() as f64)
}

/// Archives sharing instance, problem, `r` and aggregation mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub instance: String,
    pub problem: ProblemKind,
    pub r: usize,
    pub aggregation: Aggregation,
}

pub fn group_archives(archives: Vec<RunArchive>) -> Result<BTreeMap<GroupKey, Vec<RunArchive>>> {
    let mut groups: BTreeMap<GroupKey, Vec<RunArchive>> = BTreeMap::new();
    for a in archives {
        let key = GroupKey {
            instance: a.meta.instance.clone(),
            problem: a.meta.problem,
            r: a.meta.r,
            aggregation: a.meta.aggregation,
        };
        if let Some(first) = groups.get(&key).and_then(|g| g.first()) {
            let (m, f) = (&a.meta, &first.meta);
            if m.n != f.n || m.known_opt != f.known_opt || m.diversity_bound != f.diversity_bound || m.threshold != f.threshold {
                return Err(Error::Grouping(format!(
                    "archives for {} r={} {} disagree on instance metadata",
                    key.instance, key.r, key.aggregation
                )));
            }
            if groups[&key].iter().any(|g| g.meta.algorithm == m.algorithm && g.meta.run_index == m.run_index) {
                return Err(Error::Grouping(format!(
                    "duplicate {} run {} for {} r={} {}",
                    m.algorithm, m.run_index, key.instance, key.r, key.aggregation
                )));
            }
        }
        groups.entry(key).or_default().push(a);
    }
    Ok(groups)
}

/// Both frames of one group with their normalized reference sets.
#[derive(Clone, Debug)]
pub struct Frames {
    pub extreme: NormalizationFrame,
    pub extreme_refset: Vec<FitnessVector>,
    pub aggregated: NormalizationFrame,
    pub aggregated_refset: Vec<FitnessVector>,
}

pub fn build_frames_and_refsets(archives: &[RunArchive]) -> Result<Frames> {
    let first = archives
        .first()
        .ok_or_else(|| Error::Grouping("no archives to build frames from".into()))?;
    let union: Vec<FitnessVector> = archives.iter().flat_map(|a| a.feasible_fitness()).collect();
    let Some(aggregated) = NormalizationFrame::aggregated(&union) else {
        return Err(Error::Grouping(format!(
            "no feasible points in any archive of {}",
            first.meta.instance
        )));
    };
    let observed1 = union.iter().map(|p| p.f1).fold(f64::NEG_INFINITY, f64::max);
    let observed2 = union.iter().map(|p| p.f2).fold(f64::NEG_INFINITY, f64::max);
    let opt = first.meta.known_opt;
    let bound = first.meta.diversity_bound.map(|g| g as f64);
    let mut extreme = NormalizationFrame::extreme(opt.unwrap_or(observed1), bound.unwrap_or(observed2));
    if opt.is_none() || bound.is_none() {
        warn!(
            "{}: no known optimum or diversity bound; extreme frame uses observed maxima",
            first.meta.instance
        );
        extreme.fallback = true;
    }
    let aggregated_refset = nondominated_filter(&aggregated.normalize_all(&nondominated_filter(&union)));
    Ok(Frames {
        extreme,
        extreme_refset: vec![FitnessVector::new(1.0, 1.0)],
        aggregated,
        aggregated_refset,
    })
}

/// Indicator values of a single run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunScores {
    pub algorithm: Algorithm,
    pub run_index: usize,
    pub igd_plus: f64,
    pub hv: f64,
    pub igd_plus_star: f64,
    pub hv_star: f64,
    /// Feasible non-dominated individuals in the archive.
    pub count: usize,
}

pub fn score_run(archive: &RunArchive, frames: &Frames) -> Result<RunScores> {
    let front = nondominated_filter(&archive.feasible_fitness());
    let origin = FitnessVector::new(0.0, 0.0);
    let ext = frames.extreme.normalize_all(&front);
    let agg = frames.aggregated.normalize_all(&front);
    Ok(RunScores {
        algorithm: archive.meta.algorithm,
        run_index: archive.meta.run_index,
        igd_plus: igd_plus(&ext, &frames.extreme_refset)?,
        hv: hypervolume_2d(&ext, origin),
        igd_plus_star: igd_plus(&agg, &frames.aggregated_refset)?,
        hv_star: hypervolume_2d(&agg, origin),
        count: front.len(),
    })
}

/// One line of the indicator table: medians over the runs of one algorithm.
/// The `better_*` flags mark a median that beats the other algorithm's with
/// a significant Wilcoxon test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicatorRow {
    pub instance: String,
    pub problem: ProblemKind,
    pub r: usize,
    pub aggregation: Aggregation,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub igd_plus: f64,
    pub hv: f64,
    pub igd_plus_star: f64,
    pub hv_star: f64,
    pub count: f64,
    pub better_igd_plus: bool,
    pub better_hv: bool,
    pub better_igd_plus_star: bool,
    pub better_hv_star: bool,
    pub extreme_fallback: bool,
}

const INDICATORS: [(&str, bool); 4] = [
    ("igd_plus", false),
    ("hv", true),
    ("igd_plus_star", false),
    ("hv_star", true),
];

fn pick(s: &RunScores, k: usize) -> f64 {
    match k {
        0 => s.igd_plus,
        1 => s.hv,
        2 => s.igd_plus_star,
        _ => s.hv_star,
    }
}

/// Whether `mine` is significantly better than `theirs` on indicator `k`,
/// pairing runs by index.
fn significantly_better(mine: &[RunScores], theirs: &[RunScores], k: usize) -> bool {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in mine {
        if let Some(t) = theirs.iter().find(|t| t.run_index == s.run_index) {
            a.push(pick(s, k));
            b.push(pick(t, k));
        }
    }
    let test = match wilcoxon_signed_rank(&a, &b, ALPHA) {
        Ok(t) => t,
        Err(_) => return false,
    };
    let (ma, mb) = (median(&a).unwrap_or(f64::NAN), median(&b).unwrap_or(f64::NAN));
    let better = if INDICATORS[k].1 { ma > mb } else { ma < mb };
    test.significant && better
}

/// Indicator rows for one group, one per algorithm present.
pub fn summarize(key: &GroupKey, archives: &[RunArchive]) -> Result<(Vec<IndicatorRow>, Vec<RunScores>)> {
    let frames = build_frames_and_refsets(archives)?;
    let mut by_alg: BTreeMap<Algorithm, Vec<RunScores>> = BTreeMap::new();
    for a in archives {
        by_alg.entry(a.meta.algorithm).or_default().push(score_run(a, &frames)?);
    }
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for (alg, scores) in &by_alg {
        let med = |k: usize| median(&scores.iter().map(|s| pick(s, k)).collect::<Vec<_>>()).unwrap_or(f64::NAN);
        let count = median(&scores.iter().map(|s| s.count as f64).collect::<Vec<_>>()).unwrap_or(0.0);
        let mut better = [false; 4];
        for (other, theirs) in &by_alg {
            if other != alg {
                for (k, flag) in better.iter_mut().enumerate() {
                    *flag |= significantly_better(scores, theirs, k);
                }
            }
        }
        rows.push(IndicatorRow {
            instance: key.instance.clone(),
            problem: key.problem,
            r: key.r,
            aggregation: key.aggregation,
            algorithm: *alg,
            runs: scores.len(),
            igd_plus: med(0),
            hv: med(1),
            igd_plus_star: med(2),
            hv_star: med(3),
            count,
            better_igd_plus: better[0],
            better_hv: better[1],
            better_igd_plus_star: better[2],
            better_hv_star: better[3],
            extreme_fallback: frames.extreme.fallback,
        });
        all.extend(scores.iter().cloned());
    }
    Ok((rows, all))
}

pub const TABLE_HEADER: &str = "instance,problem,r,agg,algorithm,runs,igd_plus,hv,igd_plus_star,hv_star,count,better_igd_plus,better_hv,better_igd_plus_star,better_hv_star,extreme_fallback";

pub fn rows_to_csv(rows: &[IndicatorRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.5},{:.5},{:.5},{:.5},{},{},{},{},{},{}",
            r.instance,
            r.problem,
            r.r,
            r.aggregation,
            r.algorithm,
            r.runs,
            r.igd_plus,
            r.hv,
            r.igd_plus_star,
            r.hv_star,
            r.count,
            r.better_igd_plus,
            r.better_hv,
            r.better_igd_plus_star,
            r.better_hv_star,
            r.extreme_fallback
        );
    }
    out
}
