//! Instance generators and brute-force reference implementations shared by
//! the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use edo_core::encoding::{FitnessVector, Individual};
use edo_core::graph::Graph;
use edo_core::instance_io::INSTANCE_DIR_ENV;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vertices are the 2^bits binary words, adjacent when at Hamming distance
/// at least `d`.
pub fn hamming_graph(bits: u32, d: u32) -> Graph {
    let n = 1usize << bits;
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| (u ^ v).count_ones() >= d);
    Graph::from_edges(n, edges).unwrap()
}

/// Model RB instance in clique form: vertex `x·d + a` stands for variable
/// `x` taking value `a`; two vertices of different variables are adjacent
/// unless a constraint forbids the pair. `m = round(r·n·ln n)` constraints
/// each forbid `round(p·d²)` pairs, never the pair used by a hidden
/// solution, so a clique of size `n` always exists.
pub fn model_rb_clique(n: usize, d: usize, p: f64, r: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let hidden: Vec<usize> = (0..n).map(|_| rng.random_range(0..d)).collect();
    let m = (r * n as f64 * (n as f64).ln()).round() as usize;
    let k = (p * (d * d) as f64).round() as usize;
    let mut forbidden: HashSet<(usize, usize)> = HashSet::new();
    for _ in 0..m {
        let pick = sample(&mut rng, n, 2);
        let (x, y) = (pick.index(0).min(pick.index(1)), pick.index(0).max(pick.index(1)));
        let keep = hidden[x] * d + hidden[y];
        let mut chosen = 0;
        for idx in sample(&mut rng, d * d - 1, k).iter() {
            let idx = if idx >= keep { idx + 1 } else { idx };
            let (a, b) = (idx / d, idx % d);
            forbidden.insert((x * d + a, y * d + b));
            chosen += 1;
        }
        assert_eq!(chosen, k);
    }
    let mut edges = Vec::new();
    for u in 0..n * d {
        for v in u + 1..n * d {
            if u / d != v / d && !forbidden.contains(&(u, v)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n * d, edges).unwrap()
}

/// Uniform random simple graph with exactly `m` edges.
pub fn gnm(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let total = n * (n - 1) / 2;
    let mut edges: Vec<(usize, usize)> = sample(&mut rng, total, m)
        .iter()
        .map(|k| unrank_pair(k, n))
        .collect();
    edges.sort_unstable();
    Graph::from_edges(n, edges).unwrap()
}

fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut u = 0;
    while k >= n - 1 - u {
        k -= n - 1 - u;
        u += 1;
    }
    (u, u + 1 + k)
}

/// Random simple graph where each edge is present with probability `p`.
pub fn gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn write_dimacs(path: &Path, g: &Graph) {
    let mut s = format!("p edge {} {}\n", g.vertex_count(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "e {} {}", u + 1, v + 1);
    }
    fs::write(path, s).unwrap();
}

pub fn write_gset(path: &Path, g: &Graph) {
    let mut s = format!("{} {}\n", g.vertex_count(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "{} {} 1", u + 1, v + 1);
    }
    fs::write(path, s).unwrap();
}

/// Where benchmark instances come from: a user-provided directory holding the
/// named files, or a temporary directory of generated stand-ins.
pub struct InstanceSource {
    pub dir: PathBuf,
    pub generated: bool,
    _tmp: Option<tempfile::TempDir>,
}

/// Uses `$EDO_INSTANCE_DIR` if it holds all of `files`, else calls `make` to
/// populate a fresh temporary directory.
pub fn instance_source(files: &[&str], make: impl FnOnce(&Path)) -> InstanceSource {
    if let Some(dir) = std::env::var_os(INSTANCE_DIR_ENV).map(PathBuf::from) {
        if files.iter().all(|f| dir.join(f).is_file()) {
            return InstanceSource {
                dir,
                generated: false,
                _tmp: None,
            };
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    make(tmp.path());
    InstanceSource {
        dir: tmp.path().to_path_buf(),
        generated: true,
        _tmp: Some(tmp),
    }
}

// ---------------------------------------------------------------------------
// Reference implementations.

pub fn naive_strictly_dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    let ge = a.f1 >= b.f1 && a.f2 >= b.f2;
    let gt = a.f1 > b.f1 || a.f2 > b.f2;
    ge && gt
}

/// Non-dominated points with equal vectors kept once, in input order.
pub fn naive_nondominated(points: &[FitnessVector]) -> Vec<FitnessVector> {
    let mut out: Vec<FitnessVector> = Vec::new();
    for p in points {
        if points.iter().any(|q| naive_strictly_dominates(q, p)) {
            continue;
        }
        if !out.contains(p) {
            out.push(*p);
        }
    }
    out
}

/// Fronts by repeated peeling of the non-dominated remainder.
pub fn naive_fronts(points: &[FitnessVector]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| naive_strictly_dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Sum of pairwise Hamming distances between the solutions of `ind`.
pub fn naive_distance_sum(ind: &Individual) -> u64 {
    let sols = ind.decode();
    let mut total = 0;
    for i in 0..sols.len() {
        for j in i + 1..sols.len() {
            total += sols[i].hamming(&sols[j]) as u64;
        }
    }
    total
}

/// IGD+ straight from the definition.
pub fn naive_igd_plus(front: &[FitnessVector], refset: &[FitnessVector]) -> f64 {
    let mut sum = 0.0;
    for z in refset {
        let mut best = f64::INFINITY;
        for a in front {
            let d1 = (z.f1 - a.f1).max(0.0);
            let d2 = (z.f2 - a.f2).max(0.0);
            let d = (d1 * d1 + d2 * d2).sqrt();
            if d < best {
                best = d;
            }
        }
        sum += best;
    }
    sum / refset.len() as f64
}

/// Monte-Carlo estimate of the area of `[0,1]²` weakly dominated by `front`,
/// with its standard error.
pub fn monte_carlo_hv(front: &[FitnessVector], samples: usize, rng: &mut impl Rng) -> (f64, f64) {
    let hits = (0..samples)
        .filter(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            front.iter().any(|p| p.f1 >= x && p.f2 >= y)
        })
        .count();
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

pub fn random_front(rng: &mut impl Rng, size: usize) -> Vec<FitnessVector> {
    let pts: Vec<FitnessVector> = (0..size)
        .map(|_| FitnessVector::new(rng.random(), rng.random()))
        .collect();
    naive_nondominated(&pts)
}

/// Random fitness vectors on a coarse grid so that ties and duplicates occur.
pub fn random_population(rng: &mut impl Rng, size: usize) -> Vec<FitnessVector> {
    (0..size)
        .map(|_| FitnessVector::new(rng.random_range(0..8) as f64, rng.random_range(0..8) as f64))
        .collect()
}
