//! Experiment protocols behind the batch subcommands.
//!
//! Every randomized protocol takes a base seed and a seed count; each
//! (instance, seed) cell derives its own seeds and runs independently, so
//! cells may execute in parallel without changing any number.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cvrp_core::island::{available_parallelism, RunReport};
use cvrp_core::memetic::{evolve, local_search_sa, SaSchedule};
use cvrp_core::oracle::{brute_force_best_route, DEFAULT_MAX_CLIENTS};
use cvrp_core::rng::{derive_seed, stream_rng, Phase, StreamKey};
use cvrp_core::tsplib::{generate_random_instance, read_tsplib};
use cvrp_core::{
    cost_model, run_island_model, BaseCycleCover, CrossoverKind, Genome, Instance, IslandConfig,
    MemeticParams, RoutePlan, Weight,
};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::optima::Optima;
use crate::record::{ExperimentRecord, Solver, PAIRING_RULE};

/// Coordinate bound of generated Euclidean instances.
pub const DEFAULT_COORD_BOUND: i64 = 1000;

pub fn record_from_report(command: Vec<String>, inst: &Instance, report: &RunReport) -> ExperimentRecord {
    ExperimentRecord {
        command,
        instance: inst.name().to_string(),
        dimension: inst.n(),
        capacity: report.capacity,
        solver: Solver::Memetic,
        islands: Some(report.config.num_islands),
        params: Some(report.config.params.clone()),
        pairing_rule: Some(PAIRING_RULE.into()),
        result_weight: report.best_weight,
        optimum: None,
        prd: None,
        iterations_used: report.iterations_used,
        reached_target_at: report.reached_target_at,
        stop_reason: Some(report.stop_reason),
        plan: report.best_plan().blocks().map(<[usize]>::to_vec).collect(),
        warnings: Vec::new(),
        wall_time_secs: report.wall_time_secs,
        available_parallelism: report.available_parallelism,
    }
}

pub fn record_from_cover(
    command: Vec<String>,
    inst: &Instance,
    cover: &BaseCycleCover,
    weight: Weight,
    wall_time_secs: f64,
) -> ExperimentRecord {
    ExperimentRecord {
        command,
        instance: inst.name().to_string(),
        dimension: inst.n(),
        capacity: 2,
        solver: Solver::ExactC2,
        islands: None,
        params: None,
        pairing_rule: None,
        result_weight: weight,
        optimum: None,
        prd: None,
        iterations_used: 0,
        reached_target_at: None,
        stop_reason: None,
        plan: cover.cycles.clone(),
        warnings: Vec::new(),
        wall_time_secs,
        available_parallelism: available_parallelism(),
    }
}

/// Median of sorted-able values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// Median where `None` is a censored value above every finite one.
/// Returns `None` when the median itself is censored.
pub fn censored_median(values: &[Option<usize>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by_key(|x| x.unwrap_or(usize::MAX));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid].map(|x| x as f64)
    } else {
        Some((v[mid - 1]? as f64 + v[mid]? as f64) / 2.0)
    }
}

/// Operator-free best-known weight: the exhaustive optimum for small
/// instances, otherwise the best of several long annealing runs.
pub fn reference_weight(inst: &Instance, capacity: usize, seed: u64, restarts: usize) -> Result<Weight> {
    if inst.num_clients() <= DEFAULT_MAX_CLIENTS {
        return Ok(brute_force_best_route(inst, capacity, DEFAULT_MAX_CLIENTS)?.1);
    }
    let steps = 4000 * inst.num_clients();
    let schedule = SaSchedule {
        initial_temp: inst.mean_edge_weight() / 10.0,
        cooling: (1e-4f64).powf(1.0 / steps as f64),
        steps,
    };
    let mut best = Weight::MAX;
    for r in 0..restarts.max(1) {
        let mut rng = stream_rng(seed, StreamKey::new(r, 0, Phase::Experiment, 0));
        let mut perm: Vec<usize> = inst.clients().collect();
        perm.shuffle(&mut rng);
        let g = Genome::evaluated(inst, RoutePlan::new(perm, capacity)?);
        let out = local_search_sa(&g, inst, &schedule, &mut rng);
        best = best.min(out.weight().expect("annealing returns evaluated genomes"));
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct CrossoverBenchConfig {
    /// Client counts.
    pub sizes: Vec<usize>,
    pub seeds: usize,
    pub base_seed: u64,
    pub capacity: usize,
    /// A run succeeds once its best weight is at most `quality × reference`.
    pub reference_quality: f64,
    pub reference_restarts: usize,
    /// Iteration budget per run; exhausting it censors the run.
    pub budget: usize,
    pub params: MemeticParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverCell {
    pub clients: usize,
    pub seed_index: usize,
    pub instance: String,
    pub reference_weight: Weight,
    pub threshold: Weight,
    pub crossover: CrossoverKind,
    /// `None` when the budget ran out first.
    pub iterations: Option<usize>,
    pub best_weight: Weight,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverSummary {
    pub clients: usize,
    /// Median iterations per operator in `CrossoverKind::ALL` order;
    /// `None` marks a censored median.
    pub medians: Vec<(CrossoverKind, Option<f64>)>,
}

impl CrossoverSummary {
    pub fn median_of(&self, kind: CrossoverKind) -> Option<f64> {
        self.medians.iter().find(|(k, _)| *k == kind).and_then(|(_, m)| *m)
    }
}

pub fn bench_instance(clients: usize, base_seed: u64, seed_index: usize) -> Result<Instance> {
    let seed = derive_seed(base_seed, &[clients as u64, seed_index as u64]);
    Ok(generate_random_instance(clients + 1, seed, DEFAULT_COORD_BOUND)?)
}

pub fn run_crossover_bench(cfg: &CrossoverBenchConfig) -> Result<Vec<CrossoverCell>> {
    if cfg.sizes.iter().any(|&n| n < 2) {
        bail!("sizes must have at least 2 clients");
    }
    if !(cfg.reference_quality >= 1.0) {
        bail!("reference quality must be at least 1");
    }
    let cells: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.seeds).map(move |s| (n, s)))
        .collect();
    let per_instance: Vec<Vec<CrossoverCell>> = cells
        .par_iter()
        .map(|&(n, s)| {
            let inst = bench_instance(n, cfg.base_seed, s)?;
            let capacity = cfg.capacity.min(n);
            let ref_seed = derive_seed(cfg.base_seed, &[n as u64, s as u64, 1]);
            let reference = reference_weight(&inst, capacity, ref_seed, cfg.reference_restarts)?;
            let threshold = (reference as f64 * cfg.reference_quality).floor() as Weight;
            let run_seed = derive_seed(cfg.base_seed, &[n as u64, s as u64, 2]);
            CrossoverKind::ALL
                .iter()
                .map(|&kind| {
                    let params = MemeticParams {
                        crossover: kind,
                        iterations: cfg.budget,
                        seed: run_seed,
                        stagnation_limit: None,
                        ..cfg.params.clone()
                    };
                    let out = evolve(&inst, capacity, &params, Some(threshold))?;
                    Ok(CrossoverCell {
                        clients: n,
                        seed_index: s,
                        instance: inst.name().to_string(),
                        reference_weight: reference,
                        threshold,
                        crossover: kind,
                        iterations: out.reached_target_at,
                        best_weight: out.population.best_weight(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

pub fn summarize_crossover(cells: &[CrossoverCell]) -> Vec<CrossoverSummary> {
    let mut sizes: Vec<usize> = cells.iter().map(|c| c.clients).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| CrossoverSummary {
            clients: n,
            medians: CrossoverKind::ALL
                .iter()
                .map(|&k| {
                    let v: Vec<Option<usize>> = cells
                        .iter()
                        .filter(|c| c.clients == n && c.crossover == k)
                        .map(|c| c.iterations)
                        .collect();
                    (k, censored_median(&v))
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MutationBenchConfig {
    pub values: Vec<f64>,
    pub seeds: usize,
    pub base_seed: u64,
    pub clients: usize,
    pub capacity: usize,
    pub instance_seed: u64,
    pub params: MemeticParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationRow {
    pub pr_mut: f64,
    pub iteration: usize,
    pub median_best_weight: f64,
}

/// Per-iteration median best weight for each mutation probability.
pub fn run_mutation_bench(cfg: &MutationBenchConfig) -> Result<Vec<MutationRow>> {
    if cfg.values.iter().any(|p| !(0.0..=1.0).contains(p)) {
        bail!("mutation probabilities must lie in [0, 1]");
    }
    let inst = generate_random_instance(cfg.clients + 1, cfg.instance_seed, DEFAULT_COORD_BOUND)?;
    let capacity = cfg.capacity.min(cfg.clients);
    let cells: Vec<(usize, usize)> = (0..cfg.values.len())
        .flat_map(|v| (0..cfg.seeds).map(move |s| (v, s)))
        .collect();
    let histories: Vec<Vec<Weight>> = cells
        .par_iter()
        .map(|&(v, s)| {
            let params = MemeticParams {
                pr_mut: cfg.values[v],
                seed: derive_seed(cfg.base_seed, &[s as u64]),
                stagnation_limit: None,
                ..cfg.params.clone()
            };
            Ok(evolve(&inst, capacity, &params, None)?.history)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.values.len() * cfg.params.iterations);
    for (v, &pr_mut) in cfg.values.iter().enumerate() {
        let runs: Vec<&Vec<Weight>> = cells
            .iter()
            .zip(&histories)
            .filter(|((cv, _), _)| *cv == v)
            .map(|(_, h)| h)
            .collect();
        for t in 0..cfg.params.iterations {
            let at: Vec<f64> = runs.iter().map(|h| h[t] as f64).collect();
            rows.push(MutationRow {
                pr_mut,
                iteration: t + 1,
                median_best_weight: median(&at).unwrap_or(f64::NAN),
            });
        }
    }
    Ok(rows)
}

/// Final median weight per mutation probability.
pub fn final_medians(rows: &[MutationRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(p, _)| *p == r.pr_mut) {
            Some(slot) => slot.1 = r.median_best_weight,
            None => out.push((r.pr_mut, r.median_best_weight)),
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct TspPrdConfig {
    pub islands: usize,
    pub params: MemeticParams,
    pub budget_secs: f64,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TspPrdRow {
    pub instance: String,
    pub dimension: usize,
    pub optimum: Option<Weight>,
    pub weight: Weight,
    pub prd: Option<f64>,
    pub iterations: usize,
    pub wall_time_secs: f64,
}

/// `.tsp` files of a directory in name order.
pub fn tsp_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsp"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs one instance in TSP mode, stopping early at the known optimum.
pub fn tsp_prd_instance(inst: &Instance, optimum: Option<Weight>, cfg: &TspPrdConfig) -> Result<TspPrdRow> {
    let mut island_cfg = IslandConfig::new(cfg.islands, cfg.params.clone());
    island_cfg.time_limit = Some(std::time::Duration::from_secs_f64(cfg.budget_secs));
    island_cfg.target_weight = optimum;
    island_cfg.workers = cfg.workers;
    let report = run_island_model(inst, inst.num_clients(), &island_cfg)?;
    Ok(TspPrdRow {
        instance: inst.name().to_string(),
        dimension: inst.n(),
        optimum,
        weight: report.best_weight,
        prd: optimum.map(|o| crate::record::prd(report.best_weight, o)).transpose()?,
        iterations: report.iterations_used,
        wall_time_secs: report.wall_time_secs,
    })
}

pub fn run_tsp_prd(dir: &Path, optima: &Optima, cfg: &TspPrdConfig) -> Result<(Vec<TspPrdRow>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for path in tsp_files(dir)? {
        let inst = read_tsplib(&path).with_context(|| format!("parsing {}", path.display()))?;
        let optimum = optima.get(inst.name());
        if optimum.is_none() {
            warnings.push(format!("no optimum known for {}; PRD omitted", inst.name()));
        }
        rows.push(tsp_prd_instance(&inst, optimum, cfg)?);
    }
    Ok((rows, warnings))
}

#[derive(Debug, Clone)]
pub struct SpeedupConfig {
    pub g_max: usize,
    pub iterations: usize,
    pub repeats: usize,
    pub params: MemeticParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupRow {
    pub g: usize,
    pub s_theoretical: f64,
    pub s_measured: f64,
    pub t_sequential_secs: f64,
    pub t_parallel_secs: f64,
    pub available_parallelism: usize,
}

fn timed_run(inst: &Instance, capacity: usize, islands: usize, params: &MemeticParams) -> Result<f64> {
    let start = Instant::now();
    run_island_model(inst, capacity, &IslandConfig::new(islands, params.clone()))?;
    Ok(start.elapsed().as_secs_f64())
}

/// Equal-total-work speedup: one island for `i·g` iterations against `g`
/// islands for `i` iterations, median of `repeats` timings each.
pub fn measure_speedup(inst: &Instance, capacity: usize, cfg: &SpeedupConfig) -> Result<Vec<SpeedupRow>> {
    if cfg.g_max < 1 || cfg.repeats < 1 || cfg.iterations < 1 {
        bail!("g_max, repeats and iterations must be positive");
    }
    let cores = available_parallelism();
    (1..=cfg.g_max)
        .map(|g| {
            let mut seq = Vec::new();
            let mut par = Vec::new();
            for r in 0..cfg.repeats {
                let seed = derive_seed(cfg.params.seed, &[g as u64, r as u64]);
                let long = MemeticParams {
                    iterations: cfg.iterations * g,
                    seed,
                    ..cfg.params.clone()
                };
                let short = MemeticParams {
                    iterations: cfg.iterations,
                    seed,
                    ..cfg.params.clone()
                };
                seq.push(timed_run(inst, capacity, 1, &long)?);
                par.push(timed_run(inst, capacity, g, &short)?);
            }
            let (ts, tp) = (median(&seq).unwrap_or(0.0), median(&par).unwrap_or(0.0));
            Ok(SpeedupRow {
                g,
                s_theoretical: cost_model::speedup(g, cfg.params.migration_freq as f64)?,
                s_measured: if tp > 0.0 { ts / tp } else { f64::NAN },
                t_sequential_secs: ts,
                t_parallel_secs: tp,
                available_parallelism: cores,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(censored_median(&[Some(3), None, Some(1)]), Some(3.0));
        assert_eq!(censored_median(&[None, None, Some(1)]), None);
        assert_eq!(censored_median(&[Some(2), Some(4), None, None]), None);
        assert_eq!(censored_median(&[Some(2), Some(4), Some(9), None]), Some(6.5));
    }

    #[test]
    fn small_reference_is_exact() {
        let inst = bench_instance(6, 1, 0).unwrap();
        let exact = brute_force_best_route(&inst, 3, DEFAULT_MAX_CLIENTS).unwrap().1;
        assert_eq!(reference_weight(&inst, 3, 0, 1).unwrap(), exact);
    }
}
