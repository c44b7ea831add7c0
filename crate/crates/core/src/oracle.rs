//! Exhaustive solvers used as test oracles.
//!
//! Both refuse inputs above a hard size limit instead of running for hours.

use crate::error::{Error, Result};
use crate::exact::{Matching, MatchingProblem};
use crate::graph::{perm_weight, trip_weight, Instance, RoutePlan, Weight};

/// Default client limit for [`brute_force_best_route`].
pub const DEFAULT_MAX_CLIENTS: usize = 10;

/// Vertex limit for [`brute_force_matching`].
pub const MATCHING_MAX_VERTICES: usize = 12;

/// Minimum-weight plan over every ordering of the clients.
///
/// Reversing a trip or reordering the full trips does not change the weight,
/// so only canonical orderings are enumerated: each trip of two or more
/// clients starts with the smaller of its two end clients, and full trips
/// appear in increasing order of their first client (a short trip, if any,
/// comes last). The lexicographically smallest optimal permutation is always
/// canonical, and canonical orderings are visited in lexicographic order, so
/// the result matches [`brute_force_best_route_naive`] exactly.
pub fn brute_force_best_route(
    inst: &Instance,
    capacity: usize,
    max_clients: usize,
) -> Result<(RoutePlan, Weight)> {
    let clients = check_route_input(inst, capacity, max_clients)?;
    let mut search = CanonicalSearch {
        inst,
        capacity,
        clients,
        used: vec![false; inst.n()],
        perm: Vec::with_capacity(clients),
        best: None,
    };
    search.extend(0);
    let (perm, weight) = search.best.expect("at least one ordering exists");
    Ok((RoutePlan::new(perm, capacity)?, weight))
}

/// Plain enumeration of all `(n-1)!` permutations in lexicographic order.
pub fn brute_force_best_route_naive(
    inst: &Instance,
    capacity: usize,
    max_clients: usize,
) -> Result<(RoutePlan, Weight)> {
    check_route_input(inst, capacity, max_clients)?;
    let mut perm: Vec<usize> = inst.clients().collect();
    let mut best = (perm.clone(), perm_weight(inst, &perm, capacity));
    while next_permutation(&mut perm) {
        let w = perm_weight(inst, &perm, capacity);
        if w < best.1 {
            best = (perm.clone(), w);
        }
    }
    Ok((RoutePlan::new(best.0, capacity)?, best.1))
}

fn check_route_input(inst: &Instance, capacity: usize, max_clients: usize) -> Result<usize> {
    let clients = inst.num_clients();
    if clients > max_clients {
        return Err(Error::TooLarge {
            what: "brute-force route search",
            size: clients,
            limit: max_clients,
        });
    }
    if capacity == 0 || capacity > clients {
        return Err(Error::InvalidParam(format!(
            "capacity {capacity} outside 1..={clients}"
        )));
    }
    Ok(clients)
}

struct CanonicalSearch<'a> {
    inst: &'a Instance,
    capacity: usize,
    clients: usize,
    used: Vec<bool>,
    perm: Vec<usize>,
    best: Option<(Vec<usize>, Weight)>,
}

impl CanonicalSearch<'_> {
    /// `closed` is the total weight of the trips already completed in `perm`.
    fn extend(&mut self, closed: Weight) {
        let pos = self.perm.len();
        if pos == self.clients {
            if self.best.as_ref().map_or(true, |(_, w)| closed < *w) {
                self.best = Some((self.perm.clone(), closed));
            }
            return;
        }
        let block_start = pos - pos % self.capacity;
        let block_len = self.capacity.min(self.clients - block_start);
        let offset = pos - block_start;
        for c in 1..=self.clients {
            if self.used[c] {
                continue;
            }
            if offset == 0 && block_start > 0 && block_len == self.capacity {
                // Full trips in increasing order of their first client.
                if c < self.perm[block_start - self.capacity] {
                    continue;
                }
            }
            if offset == block_len - 1 && block_len >= 2 && c < self.perm[block_start] {
                // Trip direction: first client below last client.
                continue;
            }
            self.used[c] = true;
            self.perm.push(c);
            let closed = if offset == block_len - 1 {
                closed + trip_weight(self.inst, &self.perm[block_start..])
            } else {
                closed
            };
            self.extend(closed);
            self.perm.pop();
            self.used[c] = false;
        }
    }
}

/// Advances `perm` to the next permutation in lexicographic order.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).expect("pivot has a successor");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Minimum perfect matching by enumerating all `(m-1)!!` matchings.
///
/// The lowest free vertex is paired with each free partner in increasing
/// order, which visits sorted pair lists lexicographically; the first optimum
/// found is kept.
pub fn brute_force_matching(prob: &MatchingProblem) -> Result<(Matching, Weight)> {
    let m = prob.m();
    if m > MATCHING_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "brute-force matching",
            size: m,
            limit: MATCHING_MAX_VERTICES,
        });
    }
    if m % 2 == 1 {
        return Err(Error::OddVertexCount { count: m });
    }
    fn go(
        prob: &MatchingProblem,
        free: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        acc: Weight,
        best: &mut Option<(Vec<(usize, usize)>, Weight)>,
    ) {
        let Some(i) = free.iter().position(|&f| f) else {
            if best.as_ref().map_or(true, |(_, w)| acc < *w) {
                *best = Some((pairs.clone(), acc));
            }
            return;
        };
        free[i] = false;
        for j in i + 1..free.len() {
            if !free[j] {
                continue;
            }
            free[j] = false;
            pairs.push((i, j));
            go(prob, free, pairs, acc + prob.weight(i, j), best);
            pairs.pop();
            free[j] = true;
        }
        free[i] = true;
    }
    let mut best = None;
    go(prob, &mut vec![true; m], &mut Vec::new(), 0, &mut best);
    let (pairs, w) = best.expect("even vertex count has a perfect matching");
    Ok((Matching { pairs }, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsplib::generate_random_instance;

    #[test]
    fn triangle_capacity_two() {
        let inst = Instance::from_fn("t", 3, |_, _| 1).unwrap();
        let (plan, w) = brute_force_best_route(&inst, 2, DEFAULT_MAX_CLIENTS).unwrap();
        assert_eq!(w, 3);
        assert_eq!(plan.perm(), &[1, 2]);
    }

    #[test]
    fn capacity_one_is_out_and_back() {
        let inst =
            Instance::from_matrix("t", &[vec![0, 4, 7], vec![4, 0, 1], vec![7, 1, 0]]).unwrap();
        let (_, w) = brute_force_best_route(&inst, 1, DEFAULT_MAX_CLIENTS).unwrap();
        assert_eq!(w, 2 * 4 + 2 * 7);
    }

    #[test]
    fn refuses_large_inputs() {
        let inst = generate_random_instance(12, 1, 100).unwrap();
        assert!(matches!(
            brute_force_best_route(&inst, 3, DEFAULT_MAX_CLIENTS),
            Err(Error::TooLarge { .. })
        ));
        let prob = MatchingProblem::from_fn(14, |_, _| 1).unwrap();
        assert!(matches!(brute_force_matching(&prob), Err(Error::TooLarge { .. })));
        assert!(brute_force_best_route(&inst, 0, 20).is_err());
    }

    #[test]
    fn canonical_enumeration_matches_naive() {
        for n in 2..=8 {
            for capacity in 1..n {
                for seed in 0..4 {
                    let inst = generate_random_instance(n, 1000 * n as u64 + seed, 60).unwrap();
                    let fast = brute_force_best_route(&inst, capacity, 7).unwrap();
                    let slow = brute_force_best_route_naive(&inst, capacity, 7).unwrap();
                    assert_eq!(fast, slow, "n={n} c={capacity} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn k2_and_k4_matchings() {
        let k2 = MatchingProblem::from_fn(2, |_, _| 4).unwrap();
        assert_eq!(brute_force_matching(&k2).unwrap(), (Matching { pairs: vec![(0, 1)] }, 4));
        let k4 = MatchingProblem::from_fn(4, |i, j| match (i, j) {
            (0, 1) => 1,
            (2, 3) => 2,
            _ => 10,
        })
        .unwrap();
        assert_eq!(brute_force_matching(&k4).unwrap().1, 3);
    }

    #[test]
    fn next_permutation_walks_all_orders() {
        let mut p = vec![1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(p, vec![4, 3, 2, 1]);
    }
}
