use rand::Rng;

use super::{Genome, MemeticParams};
use crate::graph::{trip_weight, Instance, Weight, BASE};

/// Resolved annealing schedule for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaSchedule {
    pub initial_temp: f64,
    pub cooling: f64,
    pub steps: usize,
}

impl SaSchedule {
    pub fn from_params(params: &MemeticParams, inst: &Instance) -> Self {
        Self {
            initial_temp: params
                .sa_initial_temp
                .unwrap_or_else(|| inst.mean_edge_weight()),
            cooling: params.sa_cooling,
            steps: params.sa_steps,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Reverse(usize, usize),
    Swap(usize, usize),
}

impl Move {
    /// Every move is its own inverse.
    fn apply(self, perm: &mut [usize]) {
        match self {
            Move::Reverse(i, j) => perm[i..=j].reverse(),
            Move::Swap(i, j) => perm.swap(i, j),
        }
    }
}

struct Trips<'a> {
    inst: &'a Instance,
    capacity: usize,
}

impl Trips<'_> {
    #[inline]
    fn w(&self, u: usize, v: usize) -> i64 {
        self.inst.weight(u, v) as i64
    }

    #[inline]
    fn prev(&self, perm: &[usize], pos: usize) -> usize {
        if pos % self.capacity == 0 {
            BASE
        } else {
            perm[pos - 1]
        }
    }

    #[inline]
    fn next(&self, perm: &[usize], pos: usize) -> usize {
        if pos % self.capacity == self.capacity - 1 || pos + 1 == perm.len() {
            BASE
        } else {
            perm[pos + 1]
        }
    }

    fn span_weight(&self, perm: &[usize], first_trip: usize, last_trip: usize) -> i64 {
        let start = first_trip * self.capacity;
        let end = ((last_trip + 1) * self.capacity).min(perm.len());
        perm[start..end]
            .chunks(self.capacity)
            .map(|t| trip_weight(self.inst, t) as i64)
            .sum()
    }

    /// Weight change of `mv`; `perm` is left as it was.
    fn delta(&self, perm: &mut [usize], mv: Move) -> i64 {
        match mv {
            Move::Swap(i, j) => {
                let (a, b) = (perm[i], perm[j]);
                let (pi, ni) = (self.prev(perm, i), self.next(perm, i));
                let (pj, nj) = (self.prev(perm, j), self.next(perm, j));
                if j == i + 1 && i / self.capacity == j / self.capacity {
                    self.w(pi, b) + self.w(a, nj) - self.w(pi, a) - self.w(b, nj)
                } else {
                    self.w(pi, b) + self.w(b, ni) + self.w(pj, a) + self.w(a, nj)
                        - self.w(pi, a)
                        - self.w(a, ni)
                        - self.w(pj, b)
                        - self.w(b, nj)
                }
            }
            Move::Reverse(i, j) if i / self.capacity == j / self.capacity => {
                let (a, b) = (perm[i], perm[j]);
                let (pi, nj) = (self.prev(perm, i), self.next(perm, j));
                self.w(pi, b) + self.w(a, nj) - self.w(pi, a) - self.w(b, nj)
            }
            Move::Reverse(i, j) => {
                let (ti, tj) = (i / self.capacity, j / self.capacity);
                let before = self.span_weight(perm, ti, tj);
                mv.apply(perm);
                let after = self.span_weight(perm, ti, tj);
                mv.apply(perm);
                after - before
            }
        }
    }
}

/// Simulated annealing over segment reversals and position swaps.
///
/// Each step proposes one of the two move kinds with equal probability on two
/// distinct random positions. Improving moves are always taken, worsening
/// ones with probability `exp(-Δ/T)`; `T` is multiplied by the cooling factor
/// after every step and a zero temperature means pure descent. The best plan
/// visited is returned, so the result never weighs more than the input.
pub fn local_search_sa<R: Rng + ?Sized>(
    g: &Genome,
    inst: &Instance,
    schedule: &SaSchedule,
    rng: &mut R,
) -> Genome {
    anneal(g, inst, schedule, rng, |_| {})
}

/// The annealing walk; `observe` sees the current weight after every step.
fn anneal<R: Rng + ?Sized>(
    g: &Genome,
    inst: &Instance,
    schedule: &SaSchedule,
    rng: &mut R,
    mut observe: impl FnMut(i64),
) -> Genome {
    let n = g.len();
    let mut start = g.clone();
    let start_weight = start.evaluate(inst);
    if schedule.steps == 0 || n < 2 {
        return start;
    }
    let trips = Trips {
        inst,
        capacity: g.capacity(),
    };
    let mut perm = g.perm().to_vec();
    let mut current = start_weight as i64;
    let mut best = current;
    let mut best_perm: Option<Vec<usize>> = None;
    let mut temp = schedule.initial_temp;

    for _ in 0..schedule.steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (i, j) = (i.min(j), i.max(j));
        let mv = if rng.gen_bool(0.5) {
            Move::Reverse(i, j)
        } else {
            Move::Swap(i, j)
        };
        let delta = trips.delta(&mut perm, mv);
        let accept = delta <= 0 || (temp > 0.0 && rng.gen::<f64>() < (-(delta as f64) / temp).exp());
        if accept {
            mv.apply(&mut perm);
            current += delta;
            if current < best {
                best = current;
                best_perm = Some(perm.clone());
            }
        }
        observe(current);
        temp *= schedule.cooling;
    }

    match best_perm {
        Some(p) => {
            let plan = crate::graph::RoutePlan::from_parts_unchecked(p, g.capacity());
            Genome::with_weight(plan, best as Weight)
        }
        None => start,
    }
}
