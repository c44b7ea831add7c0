//! Exact solver for capacity 2 with an even number of clients.
//!
//! Two reductions turn the routing problem into minimum-weight perfect
//! matching. First every client pair `(u, v)` gets the weight of the whole
//! triangle `base → u → v → base` and base-incident edges become free. Then
//! the base is dropped: a perfect matching on the clients is exactly a set of
//! two-client trips, with equal weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cover_weight, BaseCycleCover, Instance, Weight, BASE};

/// Largest vertex count the subset dynamic program accepts (2^24 table entries).
pub const DP_MAX_VERTICES: usize = 24;

/// Complete graph with an even number of vertices to be perfectly matched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingProblem {
    m: usize,
    weights: Vec<Weight>,
}

impl MatchingProblem {
    pub fn from_flat(m: usize, weights: Vec<Weight>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParam(format!(
                "matching needs at least 2 vertices, got {m}"
            )));
        }
        if m % 2 == 1 {
            return Err(Error::OddVertexCount { count: m });
        }
        if weights.len() != m * m {
            return Err(Error::SizeMismatch {
                expected: m * m,
                found: weights.len(),
            });
        }
        for i in 0..m {
            if weights[i * m + i] != 0 {
                return Err(Error::InvalidParam(format!("diagonal entry ({i},{i}) nonzero")));
            }
            for j in (i + 1)..m {
                if weights[i * m + j] != weights[j * m + i] {
                    return Err(Error::InvalidParam(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { m, weights })
    }

    pub fn from_fn(m: usize, mut weight: impl FnMut(usize, usize) -> Weight) -> Result<Self> {
        let mut flat = vec![0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let w = weight(i, j);
                flat[i * m + j] = w;
                flat[j * m + i] = w;
            }
        }
        Self::from_flat(m, flat)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> Weight {
        self.weights[i * self.m + j]
    }
}

/// A set of vertex pairs, each stored as `(low, high)` and sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Normalizes pair orientation and order.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<_> = pairs
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        Self { pairs }
    }

    pub fn weight(&self, prob: &MatchingProblem) -> Weight {
        self.pairs.iter().map(|&(a, b)| prob.weight(a, b)).sum()
    }

    /// True when every vertex `0..m` appears in exactly one pair.
    pub fn is_perfect(&self, m: usize) -> bool {
        let mut seen = vec![false; m];
        for &(a, b) in &self.pairs {
            if a == b || a >= m || b >= m {
                return false;
            }
            if std::mem::replace(&mut seen[a], true) || std::mem::replace(&mut seen[b], true) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Zeroes base-incident edges and charges each client pair its full triangle.
pub fn reduce_to_zero_base(inst: &Instance) -> Instance {
    let name = format!("{}-zero-base", inst.name());
    Instance::from_fn(name, inst.n(), |u, v| {
        if u == BASE || v == BASE {
            0
        } else {
            inst.weight(BASE, u) + inst.weight(u, v) + inst.weight(v, BASE)
        }
    })
    .expect("transformed weights stay symmetric with a zero diagonal")
}

/// Drops the base of a zero-base instance, leaving the client submatrix.
///
/// Client `k` of the instance becomes matching vertex `k - 1`.
pub fn reduce_to_matching(inst: &Instance) -> Result<MatchingProblem> {
    if let Some(v) = inst.clients().find(|&v| inst.weight(BASE, v) != 0) {
        return Err(Error::InvalidInstance(format!(
            "base-incident edge (0,{v}) has weight {}; reduce to a zero-base instance first",
            inst.weight(BASE, v)
        )));
    }
    let m = inst.num_clients();
    if m % 2 == 1 {
        return Err(Error::OddVertexCount { count: m });
    }
    MatchingProblem::from_fn(m, |i, j| inst.weight(i + 1, j + 1))
}

/// Exact minimum-weight perfect matching by dynamic programming over vertex subsets.
///
/// `best[mask]` is the cheapest perfect matching of the vertices in `mask`;
/// the lowest vertex of `mask` is paired with each other member in turn, so
/// the table costs `O(2^m · m)`. Among optimal matchings the lexicographically
/// smallest sorted pair list is returned.
pub fn min_perfect_matching(prob: &MatchingProblem) -> Result<Matching> {
    let m = prob.m();
    if m > DP_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "matching problem",
            size: m,
            limit: DP_MAX_VERTICES,
        });
    }
    let full = (1usize << m) - 1;
    let mut best = vec![Weight::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut value = Weight::MAX;
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            let sub = best[rest & !(1 << j)];
            value = value.min(sub + prob.weight(i, j));
        }
        best[mask] = value;
    }

    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let j = (i + 1..m)
            .find(|&j| rest & (1 << j) != 0 && best[rest & !(1 << j)] + prob.weight(i, j) == best[mask])
            .expect("optimal partner exists");
        pairs.push((i, j));
        mask = rest & !(1 << j);
    }
    Ok(Matching { pairs })
}

/// Optimal capacity-2 routes: two-client trips built from a minimum matching.
///
/// The returned weight is measured in the original instance.
pub fn solve_capacity2(inst: &Instance) -> Result<(BaseCycleCover, Weight)> {
    if inst.num_clients() % 2 == 1 {
        return Err(Error::OddVertexCount {
            count: inst.num_clients(),
        });
    }
    let zero_base = reduce_to_zero_base(inst);
    let prob = reduce_to_matching(&zero_base)?;
    let matching = min_perfect_matching(&prob)?;
    let cover = BaseCycleCover::new(
        matching
            .pairs
            .iter()
            .map(|&(a, b)| vec![a + 1, b + 1])
            .collect(),
    );
    let weight = cover_weight(inst, &cover)?;
    debug_assert_eq!(weight, matching.weight(&prob));
    Ok((cover, weight))
}
