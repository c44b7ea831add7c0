//! Problem instances and the two solution shapes used throughout the crate.
//!
//! An [`Instance`] is a complete undirected graph with integer weights whose
//! vertex 0 is the base station. Every other vertex is a client demanding a
//! single package. A solution is either a [`RoutePlan`] (a permutation of the
//! clients cut into consecutive trips of `capacity` clients) or an explicit
//! [`BaseCycleCover`] (a set of trips, each one a cycle through the base).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge weights and route totals.
pub type Weight = u64;

/// Index of the base station in every [`Instance`].
pub const BASE: usize = 0;

/// Complete weighted undirected graph with the base station at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    n: usize,
    weights: Vec<Weight>,
}

impl Instance {
    /// Builds an instance from a row-major `n × n` weight matrix.
    pub fn from_flat(name: impl Into<String>, n: usize, weights: Vec<Weight>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 vertices, got {n}"
            )));
        }
        if weights.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: weights.len(),
            });
        }
        for i in 0..n {
            if weights[i * n + i] != 0 {
                return Err(Error::InvalidInstance(format!(
                    "diagonal entry ({i},{i}) is {}",
                    weights[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                if weights[i * n + j] != weights[j * n + i] {
                    return Err(Error::InvalidInstance(format!(
                        "asymmetric weights: w({i},{j})={} but w({j},{i})={}",
                        weights[i * n + j],
                        weights[j * n + i]
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            n,
            weights,
        })
    }

    pub fn from_matrix(name: impl Into<String>, rows: &[Vec<Weight>]) -> Result<Self> {
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(name, n, flat)
    }

    /// Builds a symmetric instance from a weight function evaluated on `i < j`.
    pub fn from_fn(
        name: impl Into<String>,
        n: usize,
        mut weight: impl FnMut(usize, usize) -> Weight,
    ) -> Result<Self> {
        let mut flat = vec![0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = weight(i, j);
                flat[i * n + j] = w;
                flat[j * n + i] = w;
            }
        }
        Self::from_flat(name, n, flat)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of vertices, base included.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_clients(&self) -> usize {
        self.n - 1
    }

    /// Weight of edge `(u, v)`. Panics when either index is out of range.
    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> Weight {
        self.weights[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[Weight] {
        &self.weights[u * self.n..(u + 1) * self.n]
    }

    /// Mean weight over the `n(n-1)/2` distinct edges.
    pub fn mean_edge_weight(&self) -> f64 {
        let mut total = 0u128;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                total += u128::from(self.weight(i, j));
            }
        }
        let pairs = (self.n * (self.n - 1) / 2) as f64;
        total as f64 / pairs
    }

    pub fn clients(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n - 1
    }

    fn check_client(&self, v: usize) -> Result<()> {
        if v == BASE || v >= self.n {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// Closed-trip weight of a client sequence without index checks.
///
/// A single-client trip counts the out-and-back edge twice.
#[inline]
pub(crate) fn trip_weight(inst: &Instance, trip: &[usize]) -> Weight {
    match trip {
        [] => 0,
        [only] => 2 * inst.weight(BASE, *only),
        [first, .., last] => {
            let inner: Weight = trip.windows(2).map(|e| inst.weight(e[0], e[1])).sum();
            inst.weight(BASE, *first) + inner + inst.weight(*last, BASE)
        }
    }
}

/// Weight of the cycle `⟨base, u₁, …, u_k⟩`.
pub fn cycle_weight(inst: &Instance, cycle: &[usize]) -> Result<Weight> {
    if cycle.is_empty() {
        return Err(Error::InvalidCover("empty cycle".into()));
    }
    for &v in cycle {
        inst.check_client(v)?;
    }
    Ok(trip_weight(inst, cycle))
}

/// A permutation of the clients `1..n` together with the truck capacity.
///
/// Consecutive chunks of `capacity` clients form the trips; the last one is
/// shorter when the capacity does not divide the client count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RoutePlan {
    perm: Vec<usize>,
    capacity: usize,
}

impl RoutePlan {
    pub fn new(perm: Vec<usize>, capacity: usize) -> Result<Self> {
        let len = perm.len();
        if len == 0 {
            return Err(Error::InvalidPlan("no clients".into()));
        }
        if capacity == 0 || capacity > len {
            return Err(Error::InvalidPlan(format!(
                "capacity {capacity} outside 1..={len}"
            )));
        }
        let mut seen = vec![false; len + 1];
        for &c in &perm {
            if c == BASE || c > len {
                return Err(Error::InvalidPlan(format!(
                    "client {c} outside 1..={len}"
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidPlan(format!("client {c} repeated")));
            }
        }
        Ok(Self { perm, capacity })
    }

    /// Plan for `inst` visiting clients in index order.
    pub fn identity(inst: &Instance, capacity: usize) -> Result<Self> {
        Self::new(inst.clients().collect(), capacity)
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn num_clients(&self) -> usize {
        self.perm.len()
    }

    pub fn into_perm(self) -> Vec<usize> {
        self.perm
    }

    /// The trips: consecutive chunks of at most `capacity` clients.
    pub fn blocks(&self) -> std::slice::Chunks<'_, usize> {
        self.perm.chunks(self.capacity)
    }

    /// Unchecked constructor for permutations produced by closed operators.
    pub(crate) fn from_parts_unchecked(perm: Vec<usize>, capacity: usize) -> Self {
        debug_assert!(Self::new(perm.clone(), capacity).is_ok());
        Self { perm, capacity }
    }
}

/// The trips of `plan` in order.
pub fn blocks_of(plan: &RoutePlan) -> Vec<Vec<usize>> {
    plan.blocks().map(<[usize]>::to_vec).collect()
}

/// Sum of trip weights of `perm` cut into chunks of `capacity`.
#[inline]
pub fn perm_weight(inst: &Instance, perm: &[usize], capacity: usize) -> Weight {
    perm.chunks(capacity).map(|b| trip_weight(inst, b)).sum()
}

/// Total weight of all trips of `plan`; this is the objective being minimized.
pub fn route_weight(inst: &Instance, plan: &RoutePlan) -> Result<Weight> {
    if plan.num_clients() != inst.num_clients() {
        return Err(Error::SizeMismatch {
            expected: inst.num_clients(),
            found: plan.num_clients(),
        });
    }
    Ok(perm_weight(inst, plan.perm(), plan.capacity()))
}

/// A set of cycles pairwise meeting only at the base.
///
/// Each entry lists the clients of one cycle in visiting order; the base
/// station is implicit at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseCycleCover {
    pub cycles: Vec<Vec<usize>>,
}

impl BaseCycleCover {
    pub fn new(cycles: Vec<Vec<usize>>) -> Self {
        Self { cycles }
    }

    pub fn from_plan(plan: &RoutePlan) -> Self {
        Self::new(blocks_of(plan))
    }

    /// Checks that the cycles are nonempty, disjoint, and cover every client of `inst`.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let mut seen = vec![false; inst.n()];
        let mut count = 0;
        for (k, cycle) in self.cycles.iter().enumerate() {
            if cycle.is_empty() {
                return Err(Error::InvalidCover(format!("cycle {k} is empty")));
            }
            for &v in cycle {
                inst.check_client(v)?;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidCover(format!("client {v} visited twice")));
                }
                count += 1;
            }
        }
        if count != inst.num_clients() {
            let missing = inst.clients().find(|&v| !seen[v]).unwrap_or(BASE);
            return Err(Error::InvalidCover(format!("client {missing} not covered")));
        }
        Ok(())
    }

    /// Longest cycle, in clients.
    pub fn max_cycle_len(&self) -> usize {
        self.cycles.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Equivalent to [`BaseCycleCover::from_plan`].
pub fn cover_from_plan(plan: &RoutePlan) -> BaseCycleCover {
    BaseCycleCover::from_plan(plan)
}

/// Sum of all cycle weights of a validated cover.
pub fn cover_weight(inst: &Instance, cover: &BaseCycleCover) -> Result<Weight> {
    cover.validate(inst)?;
    Ok(cover.cycles.iter().map(|c| trip_weight(inst, c)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Instance {
        // w(0,1)=1, w(1,2)=2, w(2,0)=3
        Instance::from_matrix("tri", &[vec![0, 1, 3], vec![1, 0, 2], vec![3, 2, 0]]).unwrap()
    }

    /// n=5 with two cheap triangles {0,2,4} and {0,1,3}.
    fn two_triangles() -> Instance {
        Instance::from_fn("two", 5, |i, j| match (i, j) {
            (0, 2) | (2, 4) | (0, 4) => 1,
            (0, 1) | (1, 3) | (0, 3) => 2,
            _ => 50,
        })
        .unwrap()
    }

    #[test]
    fn rejects_asymmetric_and_nonzero_diagonal() {
        let asym = Instance::from_matrix("a", &[vec![0, 1], vec![2, 0]]);
        assert!(matches!(asym, Err(Error::InvalidInstance(_))));
        let diag = Instance::from_matrix("d", &[vec![1, 1], vec![1, 0]]);
        assert!(matches!(diag, Err(Error::InvalidInstance(_))));
        let tiny = Instance::from_matrix("t", &[vec![0]]);
        assert!(matches!(tiny, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn cycle_weight_examples() {
        let inst = triangle();
        assert_eq!(cycle_weight(&inst, &[1, 2]).unwrap(), 6);
        assert_eq!(cycle_weight(&inst, &[2, 1]).unwrap(), 6);

        let single = Instance::from_matrix("s", &[vec![0, 5], vec![5, 0]]).unwrap();
        assert_eq!(cycle_weight(&single, &[1]).unwrap(), 10);

        let zero = Instance::from_fn("z", 6, |_, _| 0).unwrap();
        assert_eq!(cycle_weight(&zero, &[3, 1, 5]).unwrap(), 0);
    }

    #[test]
    fn cycle_weight_rejects_bad_vertices() {
        let inst = triangle();
        assert!(matches!(
            cycle_weight(&inst, &[1, 3]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
        assert!(matches!(
            cycle_weight(&inst, &[0, 1]),
            Err(Error::VertexOutOfRange { vertex: 0, .. })
        ));
        assert!(cycle_weight(&inst, &[]).is_err());
    }

    #[test]
    fn blocks_examples() {
        let p = RoutePlan::new(vec![2, 4, 1, 3], 2).unwrap();
        assert_eq!(blocks_of(&p), vec![vec![2, 4], vec![1, 3]]);
        let p = RoutePlan::new(vec![3, 1, 2], 2).unwrap();
        assert_eq!(blocks_of(&p), vec![vec![3, 1], vec![2]]);
        let p = RoutePlan::new(vec![1, 2, 3], 3).unwrap();
        assert_eq!(blocks_of(&p), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn plan_validation() {
        assert!(RoutePlan::new(vec![1, 1, 2], 1).is_err());
        assert!(RoutePlan::new(vec![1, 2, 4], 1).is_err());
        assert!(RoutePlan::new(vec![0, 1, 2], 1).is_err());
        assert!(RoutePlan::new(vec![1, 2, 3], 0).is_err());
        assert!(RoutePlan::new(vec![1, 2, 3], 4).is_err());
        assert!(RoutePlan::new(vec![], 1).is_err());
    }

    #[test]
    fn route_weight_two_triangles() {
        let inst = two_triangles();
        let plan = RoutePlan::new(vec![2, 4, 1, 3], 2).unwrap();
        assert_eq!(route_weight(&inst, &plan).unwrap(), 3 + 6);
    }

    #[test]
    fn route_weight_size_mismatch() {
        let inst = two_triangles();
        let plan = RoutePlan::new(vec![1, 2, 3], 2).unwrap();
        assert!(matches!(
            route_weight(&inst, &plan),
            Err(Error::SizeMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn tsp_mode_is_hamiltonian_cycle() {
        let inst = two_triangles();
        let perm = vec![3, 1, 4, 2];
        let plan = RoutePlan::new(perm.clone(), 4).unwrap();
        let mut tour = vec![BASE];
        tour.extend(&perm);
        let expected: Weight = (0..tour.len())
            .map(|i| inst.weight(tour[i], tour[(i + 1) % tour.len()]))
            .sum();
        assert_eq!(route_weight(&inst, &plan).unwrap(), expected);
    }

    #[test]
    fn cover_examples() {
        let inst = two_triangles();
        let plan = RoutePlan::new(vec![2, 4, 1, 3], 2).unwrap();
        let cover = cover_from_plan(&plan);
        assert_eq!(cover.cycles, vec![vec![2, 4], vec![1, 3]]);
        assert_eq!(cover_weight(&inst, &cover).unwrap(), 9);

        let single = cover_from_plan(&RoutePlan::new(vec![4, 3, 2, 1], 4).unwrap());
        assert_eq!(single.cycles.len(), 1);
        assert_eq!(
            cover_weight(&inst, &single).unwrap(),
            cycle_weight(&inst, &single.cycles[0]).unwrap()
        );
    }

    #[test]
    fn cover_validation_errors() {
        let inst = two_triangles();
        let dup = BaseCycleCover::new(vec![vec![1, 2], vec![2, 3, 4]]);
        assert!(matches!(cover_weight(&inst, &dup), Err(Error::InvalidCover(_))));
        let missing = BaseCycleCover::new(vec![vec![1, 2], vec![3]]);
        assert!(matches!(cover_weight(&inst, &missing), Err(Error::InvalidCover(_))));
        let empty = BaseCycleCover::new(vec![vec![1, 2, 3, 4], vec![]]);
        assert!(matches!(cover_weight(&inst, &empty), Err(Error::InvalidCover(_))));
        let base = BaseCycleCover::new(vec![vec![0, 1, 2, 3, 4]]);
        assert!(cover_weight(&inst, &base).is_err());
    }

    #[test]
    fn mean_edge_weight_counts_each_edge_once() {
        let inst = triangle();
        assert!((inst.mean_edge_weight() - 2.0).abs() < 1e-12);
    }
}
