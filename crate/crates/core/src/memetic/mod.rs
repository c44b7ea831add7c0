//! Memetic search over client permutations.
//!
//! A genome is a [`RoutePlan`]; its fitness is the route weight (lower is
//! better). One iteration of [`step`] evaluates the population, mutates,
//! recombines, polishes every genome with simulated annealing, and truncates
//! back to the population size.

mod local_search;
mod operators;
mod population;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{perm_weight, Instance, RoutePlan, Weight};
use crate::rng::{stream_rng, Phase, SolverRng, StreamKey};

pub use local_search::{local_search_sa, SaSchedule};
pub use operators::{
    crossover, crossover_cx, crossover_ox, crossover_pmx, cycle_crossover, mutate_swap,
    order_crossover, pmx_crossover, random_cuts,
};
pub use population::{evolve, random_population, select_truncate, step, EvolveOutcome, Population};
pub(crate) use population::initial_population;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverKind {
    Cx,
    Ox,
    Pmx,
}

impl CrossoverKind {
    pub const ALL: [CrossoverKind; 3] = [CrossoverKind::Ox, CrossoverKind::Pmx, CrossoverKind::Cx];
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cx => "CX",
            Self::Ox => "OX",
            Self::Pmx => "PMX",
        })
    }
}

impl FromStr for CrossoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cx" => Ok(Self::Cx),
            "ox" => Ok(Self::Ox),
            "pmx" => Ok(Self::Pmx),
            _ => Err(Error::InvalidParam(format!("unknown crossover {s:?}"))),
        }
    }
}

/// Tunables of the memetic search and its island model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemeticParams {
    pub population_size: usize,
    /// Probability that each unordered pair of members recombines.
    pub pr_cross: f64,
    /// Probability that each member spawns a swap mutant.
    pub pr_mut: f64,
    pub iterations: usize,
    /// Islands exchange migrants every `migration_freq` iterations.
    pub migration_freq: usize,
    /// Genomes each island broadcasts per exchange.
    pub migration_count: usize,
    /// `None` uses the instance's mean edge weight.
    pub sa_initial_temp: Option<f64>,
    pub sa_cooling: f64,
    pub sa_steps: usize,
    pub crossover: CrossoverKind,
    pub seed: u64,
    /// Stop after this many iterations without improving the best weight.
    pub stagnation_limit: Option<usize>,
}

pub const DEFAULT_POPULATION_SIZE: usize = 64;
pub const DEFAULT_PR_MUT: f64 = 0.15;
pub const DEFAULT_MIGRATION_FREQ: usize = 50;
pub const DEFAULT_MIGRATION_COUNT: usize = 2;
pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_SA_COOLING: f64 = 0.95;
pub const DEFAULT_SA_STEPS: usize = 100;

/// Pair crossover probability giving about `size - 1` offspring per iteration.
pub fn default_pr_cross(population_size: usize) -> f64 {
    (2.0 / population_size as f64).min(1.0)
}

impl Default for MemeticParams {
    fn default() -> Self {
        Self {
            population_size: DEFAULT_POPULATION_SIZE,
            pr_cross: default_pr_cross(DEFAULT_POPULATION_SIZE),
            pr_mut: DEFAULT_PR_MUT,
            iterations: DEFAULT_ITERATIONS,
            migration_freq: DEFAULT_MIGRATION_FREQ,
            migration_count: DEFAULT_MIGRATION_COUNT,
            sa_initial_temp: None,
            sa_cooling: DEFAULT_SA_COOLING,
            sa_steps: DEFAULT_SA_STEPS,
            crossover: CrossoverKind::Cx,
            seed: 0,
            stagnation_limit: None,
        }
    }
}

impl MemeticParams {
    /// Defaults with the given population size and its matching `pr_cross`.
    pub fn with_population_size(population_size: usize) -> Self {
        Self {
            population_size,
            pr_cross: default_pr_cross(population_size),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.population_size < 2 {
            return bad(format!("population size {} below 2", self.population_size));
        }
        if !(0.0..=1.0).contains(&self.pr_cross) {
            return bad(format!("pr_cross {} outside [0, 1]", self.pr_cross));
        }
        if !(0.0..=1.0).contains(&self.pr_mut) {
            return bad(format!("pr_mut {} outside [0, 1]", self.pr_mut));
        }
        if self.iterations < 1 {
            return bad("iterations must be at least 1".into());
        }
        if self.migration_freq < 1 {
            return bad("migration frequency must be at least 1".into());
        }
        if self.migration_count > self.population_size {
            return bad(format!(
                "migration count {} exceeds population size {}",
                self.migration_count, self.population_size
            ));
        }
        if let Some(t) = self.sa_initial_temp {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("SA initial temperature {t} must be finite and nonnegative"));
            }
        }
        if !(self.sa_cooling > 0.0 && self.sa_cooling < 1.0) {
            return bad(format!("SA cooling {} outside (0, 1)", self.sa_cooling));
        }
        if self.stagnation_limit == Some(0) {
            return bad("stagnation limit must be positive".into());
        }
        Ok(())
    }
}

/// A candidate plan with its route weight once evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genome {
    plan: RoutePlan,
    weight: Option<Weight>,
}

impl Genome {
    pub fn new(plan: RoutePlan) -> Self {
        Self { plan, weight: None }
    }

    pub fn evaluated(inst: &Instance, plan: RoutePlan) -> Self {
        let w = perm_weight(inst, plan.perm(), plan.capacity());
        Self {
            plan,
            weight: Some(w),
        }
    }

    pub fn plan(&self) -> &RoutePlan {
        &self.plan
    }

    pub fn perm(&self) -> &[usize] {
        self.plan.perm()
    }

    pub fn capacity(&self) -> usize {
        self.plan.capacity()
    }

    pub fn len(&self) -> usize {
        self.plan.num_clients()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached weight, if evaluated.
    pub fn weight(&self) -> Option<Weight> {
        self.weight
    }

    /// Fills the cache if needed and returns the weight.
    pub fn evaluate(&mut self, inst: &Instance) -> Weight {
        *self
            .weight
            .get_or_insert_with(|| perm_weight(inst, self.plan.perm(), self.plan.capacity()))
    }

    /// True if the cached weight (when present) matches a fresh evaluation.
    pub fn is_consistent(&self, inst: &Instance) -> bool {
        self.weight
            .map_or(true, |w| w == perm_weight(inst, self.plan.perm(), self.plan.capacity()))
    }

    pub fn into_plan(self) -> RoutePlan {
        self.plan
    }

    pub(crate) fn from_perm(perm: Vec<usize>, capacity: usize) -> Self {
        Self::new(RoutePlan::from_parts_unchecked(perm, capacity))
    }

    pub(crate) fn with_weight(plan: RoutePlan, weight: Weight) -> Self {
        Self {
            plan,
            weight: Some(weight),
        }
    }

    /// Selection order: weight, then permutation.
    pub(crate) fn rank_key(&self) -> (Weight, &[usize]) {
        (self.weight.unwrap_or(Weight::MAX), self.plan.perm())
    }
}

/// Random streams of one island, keyed by iteration, phase and index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    pub seed: u64,
    pub island: usize,
}

impl Streams {
    pub fn new(seed: u64, island: usize) -> Self {
        Self { seed, island }
    }

    pub fn rng(&self, iteration: usize, phase: Phase, index: usize) -> SolverRng {
        stream_rng(self.seed, StreamKey::new(self.island, iteration, phase, index))
    }
}
