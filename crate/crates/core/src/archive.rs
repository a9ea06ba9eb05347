//! Per-run output records and their JSON files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emo::{Algorithm, MutationKind};
use crate::encoding::{BitString, FitnessVector, Individual};
use crate::error::{Error, Result};
use crate::problems::{Aggregation, ProblemKind};

pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One individual of a final front. The genome is the flat `r·n`-bit string,
/// hex-packed most significant bit first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchivePoint {
    pub f1: f64,
    pub f2: f64,
    /// Total violation degree `C(I)`; zero when feasible.
    pub violation: f64,
    pub genome: String,
}

impl ArchivePoint {
    pub fn from_individual(ind: &Individual) -> Result<Self> {
        let fitness = ind
            .fitness()
            .ok_or_else(|| Error::Consistency("archived individual was never evaluated".into()))?;
        Ok(ArchivePoint {
            f1: fitness.f1,
            f2: fitness.f2,
            violation: ind.violation().unwrap_or(0.0),
            genome: ind.genome().to_hex(),
        })
    }

    pub fn fitness(&self) -> FitnessVector {
        FitnessVector::new(self.f1, self.f2)
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }

    pub fn individual(&self, r: usize, n: usize) -> Result<Individual> {
        let genome = BitString::from_hex(&self.genome, r * n)?;
        Individual::from_genome(&genome, n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub software_version: String,
    pub instance: String,
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub aggregation: Aggregation,
    pub r: usize,
    pub n: usize,
    pub population_size: usize,
    pub run_index: usize,
    pub seed: u64,
    pub budget: u64,
    pub evaluations: u64,
    pub generations: u64,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation: MutationKind,
    pub repair: bool,
    pub threshold: Option<usize>,
    pub known_opt: Option<f64>,
    /// Upper bound on `f2` for this instance and `r`, when known.
    pub diversity_bound: Option<u64>,
}

/// Final non-dominated individuals of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArchive {
    pub meta: RunMeta,
    pub points: Vec<ArchivePoint>,
}

impl RunArchive {
    pub fn fitness(&self) -> Vec<FitnessVector> {
        self.points.iter().map(ArchivePoint::fitness).collect()
    }

    /// Fitness of the feasible points only.
    pub fn feasible_fitness(&self) -> Vec<FitnessVector> {
        self.points
            .iter()
            .filter(|p| p.is_feasible())
            .map(ArchivePoint::fitness)
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// `<instance>_r<r>_<agg>_<algorithm>_run<index>.json`
    pub fn file_name(&self) -> String {
        let m = &self.meta;
        format!(
            "{}_r{}_{}_{}_run{:03}.json",
            m.instance.replace(['/', '\\'], "_"),
            m.r,
            m.aggregation,
            m.algorithm,
            m.run_index
        )
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        write_atomic(&path, self.to_json().as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunArchive::from_json(&text, path)
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Loads every `*.json` archive in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<RunArchive>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| RunArchive::load(p)).collect()
}
