//! Island model: independent populations with periodic all-to-all migration.
//!
//! Islands advance in epochs of `migration_freq` iterations on worker threads
//! and meet at a barrier between epochs. Migration and every stop decision
//! happen at the barrier on the calling thread, in island order, so the result
//! does not depend on how islands are spread over workers.

use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, RoutePlan, Weight};
use crate::memetic::{
    select_truncate, step, Genome, MemeticParams, Population, SaSchedule, Streams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandConfig {
    pub num_islands: usize,
    pub params: MemeticParams,
    /// Worker threads; `None` uses one per island. Never affects results.
    pub workers: Option<usize>,
    /// Wall-clock budget, checked between iterations.
    pub time_limit: Option<Duration>,
    /// Stop once any island's best weight is at most this.
    pub target_weight: Option<Weight>,
}

impl IslandConfig {
    pub fn new(num_islands: usize, params: MemeticParams) -> Self {
        Self {
            num_islands,
            params,
            workers: None,
            time_limit: None,
            target_weight: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_islands < 1 {
            return Err(Error::InvalidParam("at least one island is required".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParam("worker count must be positive".into()));
        }
        self.params.validate()
    }

    fn worker_count(&self) -> usize {
        self.workers.unwrap_or(self.num_islands).min(self.num_islands)
    }
}

/// Genomes one island broadcasts at a barrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MigrationMessage {
    pub source_island: usize,
    pub iteration: usize,
    pub genomes: Vec<Genome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Iterations,
    Target,
    Stagnation,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub capacity: usize,
    pub config: IslandConfig,
    pub best_genome: Genome,
    pub best_weight: Weight,
    pub best_island: usize,
    /// Best weight of each island after each of its iterations.
    pub per_island_history: Vec<Vec<Weight>>,
    pub iterations_used: usize,
    pub reached_target_at: Option<usize>,
    pub stop_reason: StopReason,
    pub wall_time_secs: f64,
    pub workers: usize,
    pub available_parallelism: usize,
}

impl RunReport {
    pub fn best_plan(&self) -> &RoutePlan {
        self.best_genome.plan()
    }

    /// Global best weight after each iteration.
    pub fn global_history(&self) -> Vec<Weight> {
        let len = self.per_island_history.iter().map(Vec::len).max().unwrap_or(0);
        (0..len)
            .map(|t| {
                self.per_island_history
                    .iter()
                    .filter_map(|h| h.get(t).or(h.last()))
                    .copied()
                    .min()
                    .expect("at least one island")
            })
            .collect()
    }

    /// Equality ignoring timing and worker placement.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self {
            wall_time_secs: 0.0,
            workers: 0,
            available_parallelism: 0,
            config: IslandConfig {
                workers: None,
                ..r.config.clone()
            },
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

/// The `e` best genomes of `pop`, copied.
pub fn select_migration(pop: &Population, e: usize) -> Result<Vec<Genome>> {
    if e > pop.len() {
        return Err(Error::InvalidParam(format!(
            "cannot select {e} migrants from {} genomes",
            pop.len()
        )));
    }
    Ok(pop.members()[..e].to_vec())
}

/// Adds evaluated migrants to `pop` and truncates to `target`.
pub fn integrate_migrants(pop: Population, migrants: Vec<Genome>, target: usize) -> Result<Population> {
    if migrants.iter().any(|g| g.weight().is_none()) {
        return Err(Error::InvalidParam("migrants must carry their weight".into()));
    }
    if let Some(g) = migrants.first() {
        let resident = pop.best();
        if g.len() != resident.len() || g.capacity() != resident.capacity() {
            return Err(Error::SizeMismatch {
                expected: resident.len(),
                found: g.len(),
            });
        }
    }
    let mut members = pop.into_members();
    members.extend(migrants);
    select_truncate(Population::sorted(members), target)
}

struct Island {
    index: usize,
    streams: Streams,
    pop: Population,
    history: Vec<Weight>,
    reached_at: Option<usize>,
}

impl Island {
    fn run_epoch(
        &mut self,
        inst: &Instance,
        params: &MemeticParams,
        schedule: &SaSchedule,
        end: usize,
        target: Option<Weight>,
        deadline: Option<Instant>,
    ) -> Result<()> {
        while self.history.len() < end {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                break;
            }
            let it = self.history.len();
            let pop = std::mem::replace(&mut self.pop, Population::sorted(Vec::new()));
            self.pop = step(pop, inst, params, schedule, &self.streams, it)?;
            let w = self.pop.best_weight();
            self.history.push(w);
            if target.is_some_and(|t| w <= t) {
                self.reached_at = Some(self.history.len());
                break;
            }
        }
        Ok(())
    }
}

/// Runs `cfg.num_islands` populations with all-to-all migration.
pub fn run_island_model(inst: &Instance, capacity: usize, cfg: &IslandConfig) -> Result<RunReport> {
    cfg.validate()?;
    if inst.num_clients() < 2 {
        return Err(Error::InvalidInstance(format!(
            "{} clients; the search needs at least 2",
            inst.num_clients()
        )));
    }
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let params = &cfg.params;
    let schedule = SaSchedule::from_params(params, inst);
    let mut islands = (0..cfg.num_islands)
        .map(|index| {
            let streams = Streams::new(params.seed, index);
            let pop = crate::memetic::initial_population(inst, capacity, params, &streams)?;
            Ok(Island {
                index,
                streams,
                pop,
                history: Vec::new(),
                reached_at: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let initial_best = islands.iter().map(|i| i.pop.best_weight()).min().expect("islands");
    let workers = cfg.worker_count();
    let per_worker = cfg.num_islands.div_ceil(workers);
    let mut done = 0;
    let stop_reason = loop {
        if cfg.target_weight.is_some_and(|t| initial_best <= t) {
            for isl in &mut islands {
                isl.reached_at = Some(0);
            }
            break StopReason::Target;
        }
        let end = (done + params.migration_freq).min(params.iterations);
        let run = |chunk: &mut [Island]| -> Result<()> {
            for isl in chunk {
                isl.run_epoch(inst, params, &schedule, end, cfg.target_weight, deadline)?;
            }
            Ok(())
        };
        if workers == 1 {
            run(&mut islands)?;
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = islands
                    .chunks_mut(per_worker)
                    .map(|chunk| s.spawn(move || run(chunk)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("island worker panicked"))
                    .collect::<Result<Vec<()>>>()
            })?;
        }
        done = islands.iter().map(|i| i.history.len()).max().unwrap_or(done);

        if islands.iter().any(|i| i.reached_at.is_some()) {
            break StopReason::Target;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break StopReason::TimeLimit;
        }
        if done >= params.iterations {
            break StopReason::Iterations;
        }
        if let Some(limit) = params.stagnation_limit {
            if stagnant_for(&islands, initial_best) >= limit {
                break StopReason::Stagnation;
            }
        }
        migrate(&mut islands, params, done)?;
    };

    let (best_island, best_genome) = islands
        .iter()
        .map(|i| (i.index, i.pop.best()))
        .min_by(|a, b| a.1.rank_key().cmp(&b.1.rank_key()).then(a.0.cmp(&b.0)))
        .map(|(i, g)| (i, g.clone()))
        .expect("at least one island");
    Ok(RunReport {
        instance: inst.name().to_string(),
        capacity,
        config: cfg.clone(),
        best_weight: best_genome.weight().expect("evaluated"),
        best_genome,
        best_island,
        iterations_used: islands.iter().map(|i| i.history.len()).max().unwrap_or(0),
        reached_target_at: islands.iter().filter_map(|i| i.reached_at).min(),
        per_island_history: islands.into_iter().map(|i| i.history).collect(),
        stop_reason,
        wall_time_secs: start.elapsed().as_secs_f64(),
        workers,
        available_parallelism: available_parallelism(),
    })
}

/// Trailing iterations without a new global best.
fn stagnant_for(islands: &[Island], initial_best: Weight) -> usize {
    let len = islands.iter().map(|i| i.history.len()).max().unwrap_or(0);
    let mut best = initial_best;
    let mut since = 0;
    for t in 0..len {
        let w = islands.iter().filter_map(|i| i.history.get(t)).copied().min();
        match w {
            Some(w) if w < best => {
                best = w;
                since = 0;
            }
            _ => since += 1,
        }
    }
    since
}

fn migrate(islands: &mut [Island], params: &MemeticParams, iteration: usize) -> Result<()> {
    if islands.len() < 2 || params.migration_count == 0 {
        return Ok(());
    }
    let messages = islands
        .iter()
        .map(|isl| {
            Ok(MigrationMessage {
                source_island: isl.index,
                iteration,
                genomes: select_migration(&isl.pop, params.migration_count)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for isl in islands.iter_mut() {
        let incoming: Vec<Genome> = messages
            .iter()
            .filter(|m| m.source_island != isl.index)
            .flat_map(|m| m.genomes.iter().cloned())
            .collect();
        let pop = std::mem::replace(&mut isl.pop, Population::sorted(Vec::new()));
        isl.pop = integrate_migrants(pop, incoming, params.population_size)?;
    }
    Ok(())
}

pub fn available_parallelism() -> usize {
    thread::available_parallelism().map_or(1, |n| n.get())
}
