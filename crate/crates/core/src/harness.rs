//! Multi-run execution, indicator tables and plot data on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use crate::archive::{load_dir, write_atomic, RunArchive};
use crate::config::ExperimentConfig;
use crate::diversity::diversity_bound;
use crate::emo::{self, Algorithm};
use crate::error::{Error, Result};
use crate::indicators::{
    build_frames_and_refsets, group_archives, nondominated_filter, rows_to_csv, summarize,
    GroupKey, IndicatorRow, NormalizationFrame,
};
use crate::instance_io::{default_instance_dir, resolve_instance};
use crate::problems::ProblemInstance;

pub const TIMINGS_FILE: &str = "timings.csv";
pub const CONFIG_FILE: &str = "config.toml";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn load_instance(cfg: &ExperimentConfig) -> Result<ProblemInstance> {
    let dir = cfg.instance_dir.clone().unwrap_or_else(default_instance_dir);
    let inst = resolve_instance(&cfg.instance, cfg.problem, &dir)?;
    let order = inst.penalty_ordering(cfg.r);
    if inst.penalty_weight(cfg.r) > 0 && !order.dominates && !cfg.repair {
        warn!(
            "{}: penalty weight {} does not exceed the largest distance sum {}; an infeasible individual can outrank a feasible one on f2",
            inst.name, order.weight, order.max_distance_sum
        );
    }
    Ok(inst)
}

/// Runs every (algorithm, run index) pair of `cfg` and writes one archive per
/// run into the output directory, along with the resolved configuration and
/// wall-clock timings. Returns the archive paths in job order.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let inst = load_instance(cfg)?;
    info!(
        "{}: n={} |E|={} problem={} r={} runs={}",
        inst.name,
        inst.n(),
        inst.graph.edge_count(),
        inst.kind,
        cfg.r,
        cfg.runs
    );
    for alg in &cfg.algorithms {
        cfg.run_config(*alg, 0).validate(&inst)?;
    }
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    write_atomic(&out.join(CONFIG_FILE), cfg.to_toml().as_bytes())?;

    let jobs: Vec<(Algorithm, usize)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| (0..cfg.runs).map(move |i| (a, i)))
        .collect();
    let work = |&(alg, idx): &(Algorithm, usize)| -> Result<(PathBuf, f64)> {
        let start = Instant::now();
        let archive = emo::run(&inst, cfg.aggregation, &cfg.run_config(alg, idx))?;
        let secs = start.elapsed().as_secs_f64();
        let path = archive.save(out)?;
        info!("{} run {} done in {:.1}s: {} points", alg, idx, secs, archive.points.len());
        Ok((path, secs))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(PathBuf, f64)> = pool.install(|| jobs.par_iter().map(work).collect::<Result<Vec<_>>>())?;

    let mut timings = String::from("algorithm,run,seed,seconds\n");
    for ((alg, idx), (_, secs)) in jobs.iter().zip(&results) {
        let _ = writeln!(timings, "{alg},{idx},{},{secs:.3}", cfg.run_config(*alg, *idx).seed);
    }
    write_atomic(&out.join(TIMINGS_FILE), timings.as_bytes())?;
    Ok(results.into_iter().map(|(p, _)| p).collect())
}

fn group_stem(prefix: &str, key: &GroupKey) -> String {
    format!(
        "{prefix}_{}_r{}_{}.csv",
        key.instance.replace(['/', '\\'], "_"),
        key.r,
        key.aggregation
    )
}

/// Reads all archives in `archive_dir` and writes `indicators.csv`, per-run
/// scores in `runs.csv`, and one aggregated best-front file per group.
pub fn cmd_indicators(archive_dir: &Path, out_dir: &Path) -> Result<Vec<IndicatorRow>> {
    let archives = load_dir(archive_dir)?;
    if archives.is_empty() {
        return Err(Error::invalid(format!("no archives in {}", archive_dir.display())));
    }
    ensure_dir(out_dir)?;
    let mut rows = Vec::new();
    let mut runs = String::from("instance,r,agg,algorithm,run,igd_plus,hv,igd_plus_star,hv_star,count\n");
    for (key, group) in group_archives(archives)? {
        let (mut group_rows, scores) = summarize(&key, &group)?;
        for s in &scores {
            let _ = writeln!(
                runs,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
                key.instance, key.r, key.aggregation, s.algorithm, s.run_index, s.igd_plus, s.hv, s.igd_plus_star, s.hv_star, s.count
            );
        }
        let frames = build_frames_and_refsets(&group)?;
        let union: Vec<_> = group.iter().flat_map(|a| a.feasible_fitness()).collect();
        let mut front = nondominated_filter(&union);
        front.sort_by(|a, b| a.f1.total_cmp(&b.f1).then(b.f2.total_cmp(&a.f2)));
        let mut text = String::from("f1,f2,norm_f1,norm_f2\n");
        for p in front {
            let q = frames.aggregated.normalize(p);
            let _ = writeln!(text, "{},{},{:.6},{:.6}", p.f1, p.f2, q.f1, q.f2);
        }
        write_atomic(&out_dir.join(group_stem("front", &key)), text.as_bytes())?;
        rows.append(&mut group_rows);
    }
    write_atomic(&out_dir.join("indicators.csv"), rows_to_csv(&rows).as_bytes())?;
    write_atomic(&out_dir.join("runs.csv"), runs.as_bytes())?;
    Ok(rows)
}

pub fn cmd_bound(n: u64, b: u64, r: u64) -> Result<u64> {
    diversity_bound(n, b, r)
}

fn extreme_frame(group: &[RunArchive]) -> Option<NormalizationFrame> {
    build_frames_and_refsets(group).ok().map(|f| f.extreme)
}

/// Writes one scatter file per group with every archived point of every run.
/// Each run's archive is already free of points it dominates; points from
/// different runs may dominate one another.
pub fn cmd_plotdata(archive_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let archives = load_dir(archive_dir)?;
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    for (key, group) in group_archives(archives)? {
        let frame = extreme_frame(&group);
        let mut text = String::from("algorithm,run,f1,f2,norm_f1,norm_f2,violation\n");
        for a in &group {
            for p in &a.points {
                let (n1, n2) = match (&frame, p.is_feasible()) {
                    (Some(f), true) => {
                        let q = f.normalize(p.fitness());
                        (format!("{:.6}", q.f1), format!("{:.6}", q.f2))
                    }
                    _ => (String::new(), String::new()),
                };
                let _ = writeln!(
                    text,
                    "{},{},{},{},{n1},{n2},{}",
                    a.meta.algorithm, a.meta.run_index, p.f1, p.f2, p.violation
                );
            }
        }
        let path = out_dir.join(group_stem("scatter", &key));
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
