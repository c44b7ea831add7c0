use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{crossover, local_search_sa, mutate_swap, Genome, MemeticParams, SaSchedule, Streams};
use crate::error::{Error, Result};
use crate::graph::{Instance, RoutePlan, Weight};
use crate::rng::Phase;

/// Evaluated genomes kept sorted by weight, ties broken by permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Population {
    members: Vec<Genome>,
}

impl Population {
    /// Evaluates and sorts; fails on an empty list or mixed shapes.
    pub fn from_genomes(inst: &Instance, mut members: Vec<Genome>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidParam("empty population".into()));
        };
        let (len, capacity) = (first.len(), first.capacity());
        for g in &members {
            if g.len() != len {
                return Err(Error::SizeMismatch {
                    expected: len,
                    found: g.len(),
                });
            }
            if g.capacity() != capacity {
                return Err(Error::InvalidParam(format!(
                    "mixed capacities {capacity} and {}",
                    g.capacity()
                )));
            }
        }
        if len != inst.num_clients() {
            return Err(Error::SizeMismatch {
                expected: inst.num_clients(),
                found: len,
            });
        }
        for g in &mut members {
            g.evaluate(inst);
        }
        Ok(Self::sorted(members))
    }

    /// `members` must already be evaluated.
    pub(crate) fn sorted(mut members: Vec<Genome>) -> Self {
        debug_assert!(members.iter().all(|g| g.weight().is_some()));
        members.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
        Self { members }
    }

    pub fn members(&self) -> &[Genome] {
        &self.members
    }

    pub fn best(&self) -> &Genome {
        &self.members[0]
    }

    pub fn best_weight(&self) -> Weight {
        self.best().weight().expect("population members are evaluated")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<Genome> {
        self.members
    }
}

/// `size` uniformly random plans, evaluated and sorted.
pub fn random_population<R: Rng + ?Sized>(
    inst: &Instance,
    capacity: usize,
    size: usize,
    rng: &mut R,
) -> Result<Population> {
    if size < 1 {
        return Err(Error::InvalidParam("population size must be positive".into()));
    }
    let base = RoutePlan::identity(inst, capacity)?;
    let members = (0..size)
        .map(|_| {
            let mut perm = base.perm().to_vec();
            perm.shuffle(rng);
            Genome::evaluated(inst, RoutePlan::from_parts_unchecked(perm, capacity))
        })
        .collect();
    Ok(Population::sorted(members))
}

/// Keeps the `target` best members.
pub fn select_truncate(pop: Population, target: usize) -> Result<Population> {
    if target < 1 {
        return Err(Error::InvalidParam("selection target must be positive".into()));
    }
    let mut members = pop.members;
    members.truncate(target);
    Ok(Population { members })
}

/// One generation: mutation, crossover, local search, truncation.
///
/// Each member spawns a swap mutant with probability `pr_mut`; mutants join
/// the pool as offspring and replace their parent only as a crossover partner.
/// Every unordered pair of partners then recombines with probability
/// `pr_cross`. Members, mutants and children are all polished by simulated
/// annealing before the pool is cut back to `population_size`. Randomness is
/// drawn from per-item streams, so the result depends only on the inputs.
pub fn step(
    pop: Population,
    inst: &Instance,
    params: &MemeticParams,
    schedule: &SaSchedule,
    streams: &Streams,
    iteration: usize,
) -> Result<Population> {
    let members = pop.into_members();
    let mut offspring = Vec::new();
    let mut partners: Vec<Genome> = Vec::with_capacity(members.len());
    for (k, g) in members.iter().enumerate() {
        let mut rng = streams.rng(iteration, Phase::Mutation, k);
        let m = mutate_swap(g, params.pr_mut, &mut rng);
        if m.perm() != g.perm() {
            offspring.push(m.clone());
            partners.push(m);
        } else {
            partners.push(g.clone());
        }
    }

    if params.pr_cross > 0.0 {
        let mut pairing = streams.rng(iteration, Phase::Pairing, 0);
        let mut event = 0;
        for i in 0..partners.len() {
            for j in i + 1..partners.len() {
                if !pairing.gen_bool(params.pr_cross) {
                    continue;
                }
                let mut rng = streams.rng(iteration, Phase::Crossover, event);
                offspring.extend(crossover(params.crossover, &partners[i], &partners[j], &mut rng)?);
                event += 1;
            }
        }
    }

    let pool: Vec<Genome> = members
        .into_iter()
        .chain(offspring)
        .enumerate()
        .map(|(k, mut g)| {
            g.evaluate(inst);
            let mut rng = streams.rng(iteration, Phase::LocalSearch, k);
            local_search_sa(&g, inst, schedule, &mut rng)
        })
        .collect();
    select_truncate(Population::sorted(pool), params.population_size)
}

/// Result of a single-population run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvolveOutcome {
    pub population: Population,
    pub initial_best: Weight,
    /// Best weight after each completed iteration.
    pub history: Vec<Weight>,
    pub iterations_used: usize,
    /// Iterations completed when the best first reached the target weight.
    pub reached_target_at: Option<usize>,
}

/// Runs one population from a random start for up to `params.iterations`.
///
/// Stops early once the best weight is at most `target` or after
/// `params.stagnation_limit` iterations without improvement.
pub fn evolve(
    inst: &Instance,
    capacity: usize,
    params: &MemeticParams,
    target: Option<Weight>,
) -> Result<EvolveOutcome> {
    params.validate()?;
    let streams = Streams::new(params.seed, 0);
    let schedule = SaSchedule::from_params(params, inst);
    let mut pop = initial_population(inst, capacity, params, &streams)?;
    let initial_best = pop.best_weight();
    let mut history = Vec::new();
    let mut reached = target.filter(|&t| initial_best <= t).map(|_| 0);
    let mut since_improvement = 0;
    let mut best = initial_best;
    while reached.is_none() && history.len() < params.iterations {
        pop = step(pop, inst, params, &schedule, &streams, history.len())?;
        let w = pop.best_weight();
        history.push(w);
        if target.is_some_and(|t| w <= t) {
            reached = Some(history.len());
        }
        if w < best {
            best = w;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if params.stagnation_limit.is_some_and(|s| since_improvement >= s) {
                break;
            }
        }
    }
    Ok(EvolveOutcome {
        population: pop,
        initial_best,
        iterations_used: history.len(),
        history,
        reached_target_at: reached,
    })
}

/// Random start of an island, drawn from its init stream.
pub(crate) fn initial_population(
    inst: &Instance,
    capacity: usize,
    params: &MemeticParams,
    streams: &Streams,
) -> Result<Population> {
    let mut rng = streams.rng(0, Phase::Init, 0);
    random_population(inst, capacity, params.population_size, &mut rng)
}
