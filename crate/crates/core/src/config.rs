//! Experiment configuration: a `key = value` TOML file plus overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emo::{Algorithm, MutationKind, RunConfig};
use crate::error::{Error, Result};
use crate::problems::{Aggregation, ProblemKind};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<String>,
    instance: Option<String>,
    instance_dir: Option<PathBuf>,
    aggregation: Option<String>,
    r: Option<usize>,
    #[serde(alias = "N")]
    population_size: Option<usize>,
    crossover_rate: Option<f64>,
    chi_numerator: Option<f64>,
    budget_multiplier: Option<f64>,
    mutation: Option<String>,
    repair: Option<bool>,
    runs: Option<usize>,
    #[serde(alias = "seed")]
    base_seed: Option<u64>,
    algorithms: Option<OneOrMany>,
    output_dir: Option<PathBuf>,
    workers: Option<usize>,
}

impl RawConfig {
    fn merge(&mut self, other: RawConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            problem, instance, instance_dir, aggregation, r, population_size, crossover_rate,
            chi_numerator, budget_multiplier, mutation, repair, runs, base_seed, algorithms,
            output_dir, workers
        );
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_dir: Option<PathBuf>,
    pub aggregation: Aggregation,
    pub r: usize,
    pub population_size: usize,
    pub crossover_rate: f64,
    pub chi_numerator: f64,
    pub budget_multiplier: f64,
    pub mutation: MutationKind,
    pub repair: bool,
    pub runs: usize,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub output_dir: PathBuf,
    /// Worker threads for independent runs; `None` uses all cores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn parse_raw(text: &str, origin: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::config(format!("{origin}: {}", e.message())))
}

/// Parses one `key=value` override. Bare words are read as strings.
fn parse_override(item: &str) -> Result<RawConfig> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{item}` is not key=value")))?;
    let (key, value) = (key.trim(), value.trim());
    parse_raw(&format!("{key} = {value}"), item)
        .or_else(|_| parse_raw(&format!("{key} = {}", toml_quote(value)), item))
}

fn toml_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl ExperimentConfig {
    /// Builds a configuration from file contents and overrides; later
    /// overrides win.
    pub fn from_sources(text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut raw = match text {
            Some(t) => parse_raw(t, "config file")?,
            None => RawConfig::default(),
        };
        for o in overrides {
            raw.merge(parse_override(o)?);
        }
        ExperimentConfig::resolve(raw)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => Some(fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => None,
        };
        ExperimentConfig::from_sources(text.as_deref(), overrides)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let problem: ProblemKind = raw
            .problem
            .ok_or_else(|| Error::config("`problem` is required"))?
            .parse()?;
        let instance = raw.instance.ok_or_else(|| Error::config("`instance` is required"))?;
        let mutation = match raw.mutation {
            Some(m) => m.parse()?,
            None if problem == ProblemKind::MaxCoverage => MutationKind::Biased,
            None => MutationKind::Standard,
        };
        let algorithms = match raw.algorithms {
            None => vec![Algorithm::Nsga2, Algorithm::Spea2],
            Some(OneOrMany::One(s)) => s
                .split(',')
                .map(|a| a.trim().parse())
                .collect::<Result<Vec<_>>>()?,
            Some(OneOrMany::Many(v)) => v.iter().map(|a| a.parse()).collect::<Result<Vec<_>>>()?,
        };
        let cfg = ExperimentConfig {
            problem,
            instance,
            instance_dir: raw.instance_dir,
            aggregation: raw.aggregation.as_deref().unwrap_or("min").parse()?,
            r: raw.r.unwrap_or(10),
            population_size: raw.population_size.unwrap_or(20),
            crossover_rate: raw.crossover_rate.unwrap_or(0.8),
            chi_numerator: raw.chi_numerator.unwrap_or(0.5),
            budget_multiplier: raw.budget_multiplier.unwrap_or(5.0),
            mutation,
            repair: raw.repair.unwrap_or(false),
            runs: raw.runs.unwrap_or(20),
            base_seed: raw.base_seed.unwrap_or(0),
            algorithms,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            workers: raw.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.population_size == 0 || self.runs == 0 {
            return Err(Error::config("r, population_size and runs must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::config(format!(
                "crossover_rate must lie in [0, 1], got {}",
                self.crossover_rate
            )));
        }
        if self.chi_numerator.is_nan() || self.chi_numerator < 0.0 {
            return Err(Error::config("chi_numerator must be non-negative"));
        }
        if !(self.budget_multiplier.is_finite() && self.budget_multiplier > 0.0) {
            return Err(Error::config("budget_multiplier must be positive"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers must be at least 1"));
        }
        if self.repair && self.problem != ProblemKind::MinVertexCover {
            return Err(Error::config("repair is only defined for minvertexcover"));
        }
        if self.mutation == MutationKind::Biased && self.problem != ProblemKind::MaxCoverage {
            return Err(Error::config("biased mutation is only defined for maxcoverage"));
        }
        Ok(())
    }

    pub fn run_config(&self, algorithm: Algorithm, run_index: usize) -> RunConfig {
        RunConfig {
            algorithm,
            r: self.r,
            population_size: self.population_size,
            budget_multiplier: self.budget_multiplier,
            crossover_rate: self.crossover_rate,
            chi_numerator: self.chi_numerator,
            mutation: self.mutation,
            repair: self.repair,
            seed: self.base_seed + run_index as u64,
            run_index,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let text = "problem = \"minvertexcover\"\ninstance = \"hamming6-2\"\nrepair = true\nr = 20\n";
        let cfg = ExperimentConfig::from_sources(Some(text), &["r=10".into(), "algorithms=spea2".into()]).unwrap();
        assert_eq!(cfg.r, 10);
        assert_eq!(cfg.population_size, 20);
        assert_eq!(cfg.algorithms, vec![Algorithm::Spea2]);
        assert_eq!(cfg.mutation, MutationKind::Standard);
        assert_eq!(cfg.run_config(Algorithm::Spea2, 3).seed, 3);
    }

    #[test]
    fn coverage_defaults_to_biased() {
        let cfg = ExperimentConfig::from_sources(None, &["problem=maxcoverage".into(), "instance=x-10".into()]).unwrap();
        assert_eq!(cfg.mutation, MutationKind::Biased);
    }

    #[test]
    fn rejects_bad_input() {
        let base = ["problem=maxcut".to_string(), "instance=G1".to_string()];
        for bad in ["crossover_rate=1.5", "runs=0", "repair=true", "colour=blue", "mutation=biased", "noequals"] {
            let mut o = base.to_vec();
            o.push(bad.to_string());
            assert!(ExperimentConfig::from_sources(None, &o).is_err(), "{bad}");
        }
        assert!(ExperimentConfig::from_sources(None, &[]).is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::from_sources(None, &["problem=maxcut".into(), "instance=G1".into(), "N=8".into()]).unwrap();
        let again = ExperimentConfig::from_sources(Some(&cfg.to_toml()), &[]).unwrap();
        assert_eq!(cfg, again);
    }
}
