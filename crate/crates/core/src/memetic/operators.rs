//! Permutation-preserving recombination and mutation.
//!
//! The slice-level functions take permutations of `1..=len` (any set of
//! distinct values below `len + 1` works). The genome wrappers check that the
//! parents agree in length and capacity.

use rand::Rng;

use super::{CrossoverKind, Genome};
use crate::error::{Error, Result};

fn positions(perm: &[usize]) -> Vec<usize> {
    let size = perm.iter().copied().max().map_or(0, |m| m + 1);
    let mut pos = vec![usize::MAX; size];
    for (i, &v) in perm.iter().enumerate() {
        pos[v] = i;
    }
    pos
}

/// Cycle crossover (CX).
///
/// Positions are split into cycles: start at the lowest unassigned position,
/// look up the other parent's value there, jump to where that value sits in
/// the first parent, and repeat until the start is reached again. The first
/// child takes `p1` on odd-numbered cycles (counting from 1) and `p2` on
/// even-numbered ones; the second child is the complement.
pub fn cycle_crossover(p1: &[usize], p2: &[usize]) -> (Vec<usize>, Vec<usize>) {
    assert_eq!(p1.len(), p2.len(), "parents must have equal length");
    let n = p1.len();
    let pos1 = positions(p1);
    let mut cycle_of = vec![0usize; n];
    let mut cycle = 0;
    for start in 0..n {
        if cycle_of[start] != 0 {
            continue;
        }
        cycle += 1;
        let mut i = start;
        while cycle_of[i] == 0 {
            cycle_of[i] = cycle;
            i = pos1[p2[i]];
        }
    }
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    for i in 0..n {
        if cycle_of[i] % 2 == 1 {
            c1.push(p1[i]);
            c2.push(p2[i]);
        } else {
            c1.push(p2[i]);
            c2.push(p1[i]);
        }
    }
    (c1, c2)
}

/// Order crossover (OX) with the inclusive segment `a..=b` taken from `p1`.
///
/// The remaining positions, starting after `b` and wrapping around, receive
/// the values of `p2` in `p2`'s cyclic order from position `b + 1`, skipping
/// values already in the segment.
pub fn order_crossover(p1: &[usize], p2: &[usize], a: usize, b: usize) -> Vec<usize> {
    assert_eq!(p1.len(), p2.len(), "parents must have equal length");
    let n = p1.len();
    assert!(a <= b && b < n, "cuts {a}..={b} out of range for length {n}");
    let size = p1.iter().copied().max().map_or(0, |m| m + 1);
    let mut taken = vec![false; size];
    let mut child = vec![0; n];
    for i in a..=b {
        child[i] = p1[i];
        taken[p1[i]] = true;
    }
    let mut fill = (b + 1) % n;
    for k in 0..n {
        let v = p2[(b + 1 + k) % n];
        if taken[v] {
            continue;
        }
        child[fill] = v;
        fill = (fill + 1) % n;
    }
    child
}

/// Partially-mapped crossover (PMX) with the inclusive segment `a..=b` from `p1`.
///
/// Outside the segment the child takes `p2`'s value; a value that already
/// occurs in the segment is replaced through the mapping `p1[k] → p2[k]`
/// until a free value is found.
pub fn pmx_crossover(p1: &[usize], p2: &[usize], a: usize, b: usize) -> Vec<usize> {
    assert_eq!(p1.len(), p2.len(), "parents must have equal length");
    let n = p1.len();
    assert!(a <= b && b < n, "cuts {a}..={b} out of range for length {n}");
    let pos1 = positions(p1);
    let in_segment = |v: usize| (a..=b).contains(&pos1[v]);
    let mut child = vec![0; n];
    child[a..=b].copy_from_slice(&p1[a..=b]);
    for k in (0..a).chain(b + 1..n) {
        let mut v = p2[k];
        while in_segment(v) {
            v = p2[pos1[v]];
        }
        child[k] = v;
    }
    child
}

/// Two uniformly drawn cut positions, sorted.
pub fn random_cuts<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..len);
    let b = rng.gen_range(0..len);
    (a.min(b), a.max(b))
}

fn check_parents(p1: &Genome, p2: &Genome) -> Result<()> {
    if p1.len() != p2.len() {
        return Err(Error::SizeMismatch {
            expected: p1.len(),
            found: p2.len(),
        });
    }
    if p1.capacity() != p2.capacity() {
        return Err(Error::InvalidParam(format!(
            "parents have capacities {} and {}",
            p1.capacity(),
            p2.capacity()
        )));
    }
    Ok(())
}

pub fn crossover_cx(p1: &Genome, p2: &Genome) -> Result<(Genome, Genome)> {
    check_parents(p1, p2)?;
    let (c1, c2) = cycle_crossover(p1.perm(), p2.perm());
    Ok((
        Genome::from_perm(c1, p1.capacity()),
        Genome::from_perm(c2, p1.capacity()),
    ))
}

pub fn crossover_ox<R: Rng + ?Sized>(p1: &Genome, p2: &Genome, rng: &mut R) -> Result<Genome> {
    check_parents(p1, p2)?;
    let (a, b) = random_cuts(p1.len(), rng);
    Ok(Genome::from_perm(
        order_crossover(p1.perm(), p2.perm(), a, b),
        p1.capacity(),
    ))
}

pub fn crossover_pmx<R: Rng + ?Sized>(p1: &Genome, p2: &Genome, rng: &mut R) -> Result<Genome> {
    check_parents(p1, p2)?;
    let (a, b) = random_cuts(p1.len(), rng);
    Ok(Genome::from_perm(
        pmx_crossover(p1.perm(), p2.perm(), a, b),
        p1.capacity(),
    ))
}

/// Offspring of one crossover event: two children for CX, one otherwise.
pub fn crossover<R: Rng + ?Sized>(
    kind: CrossoverKind,
    p1: &Genome,
    p2: &Genome,
    rng: &mut R,
) -> Result<Vec<Genome>> {
    Ok(match kind {
        CrossoverKind::Cx => {
            let (a, b) = crossover_cx(p1, p2)?;
            vec![a, b]
        }
        CrossoverKind::Ox => vec![crossover_ox(p1, p2, rng)?],
        CrossoverKind::Pmx => vec![crossover_pmx(p1, p2, rng)?],
    })
}

/// With probability `pr_mut`, swaps two distinct random positions.
pub fn mutate_swap<R: Rng + ?Sized>(g: &Genome, pr_mut: f64, rng: &mut R) -> Genome {
    let n = g.len();
    if n < 2 || !rng.gen_bool(pr_mut) {
        return g.clone();
    }
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let mut perm = g.perm().to_vec();
    perm.swap(i, j);
    Genome::from_perm(perm, g.capacity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RoutePlan;
    use crate::rng::{stream_rng, Phase, StreamKey};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    const P1: [usize; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
    const P2: [usize; 8] = [8, 5, 2, 1, 3, 6, 4, 7];

    fn is_perm(p: &[usize]) -> bool {
        let mut s = p.to_vec();
        s.sort_unstable();
        s.iter().copied().eq(1..=p.len())
    }

    fn genome(perm: &[usize]) -> Genome {
        Genome::new(RoutePlan::new(perm.to_vec(), 2).unwrap())
    }

    #[test]
    fn cx_hand_trace() {
        let (c1, c2) = cycle_crossover(&P1, &P2);
        assert_eq!(c1, vec![1, 5, 2, 4, 3, 6, 7, 8]);
        assert_eq!(c2, vec![8, 2, 3, 1, 5, 6, 4, 7]);
    }

    #[test]
    fn cx_identical_parents() {
        let (c1, c2) = cycle_crossover(&P2, &P2);
        assert_eq!(c1, P2);
        assert_eq!(c2, P2);
    }

    #[test]
    fn ox_hand_trace() {
        assert_eq!(order_crossover(&P1, &P2, 3, 5), vec![2, 1, 3, 4, 5, 6, 7, 8]);
        assert_eq!(order_crossover(&P1, &P2, 0, 7), P1);
    }

    #[test]
    fn pmx_hand_trace() {
        assert_eq!(pmx_crossover(&P1, &P2, 3, 5), vec![8, 3, 2, 4, 5, 6, 1, 7]);
    }

    #[test]
    fn pmx_without_conflicts_copies_p2() {
        // Segment values {3, 4} occupy the same positions in p2.
        let p1 = [1, 2, 3, 4, 5, 6];
        let p2 = [6, 5, 3, 4, 2, 1];
        assert_eq!(pmx_crossover(&p1, &p2, 2, 3), vec![6, 5, 3, 4, 2, 1]);
    }

    #[test]
    fn genome_wrappers_check_lengths() {
        let a = genome(&[1, 2, 3, 4]);
        let b = genome(&[1, 2, 3]);
        let mut rng = stream_rng(1, StreamKey::new(0, 0, Phase::Crossover, 0));
        assert!(crossover_cx(&a, &b).is_err());
        assert!(crossover_ox(&a, &b, &mut rng).is_err());
        assert!(crossover_pmx(&a, &b, &mut rng).is_err());
        let c = Genome::new(RoutePlan::new(vec![1, 2, 3, 4], 3).unwrap());
        assert!(crossover_cx(&a, &c).is_err());
    }

    #[test]
    fn mutation_edge_cases() {
        let mut rng = stream_rng(3, StreamKey::new(0, 0, Phase::Mutation, 0));
        let g = genome(&[3, 1, 4, 2]);
        for _ in 0..50 {
            assert_eq!(mutate_swap(&g, 0.0, &mut rng), g);
        }
        let two = genome(&[1, 2]);
        assert_eq!(mutate_swap(&two, 1.0, &mut rng).perm(), &[2, 1]);
        let mutated = mutate_swap(&g, 1.0, &mut rng);
        assert_ne!(mutated.perm(), g.perm());
        assert_eq!(mutated.weight(), None);
    }

    fn perm_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, u64)> {
        (2usize..40, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = stream_rng(seed, StreamKey::new(0, 0, Phase::Init, 0));
            let mut a: Vec<usize> = (1..=n).collect();
            let mut b = a.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            (a, b, seed)
        })
    }

    proptest! {
        #[test]
        fn cx_children_are_permutations_and_complementary((a, b, _) in perm_pair()) {
            let (c1, c2) = cycle_crossover(&a, &b);
            prop_assert!(is_perm(&c1) && is_perm(&c2));
            for i in 0..a.len() {
                prop_assert!((c1[i], c2[i]) == (a[i], b[i]) || (c1[i], c2[i]) == (b[i], a[i]));
            }
            let (d1, d2) = cycle_crossover(&b, &a);
            prop_assert_eq!(d1, c2);
            prop_assert_eq!(d2, c1);
        }

        #[test]
        fn ox_and_pmx_children_are_permutations((a, b, seed) in perm_pair()) {
            let mut rng = stream_rng(seed, StreamKey::new(0, 0, Phase::Crossover, 1));
            let (lo, hi) = random_cuts(a.len(), &mut rng);
            let ox = order_crossover(&a, &b, lo, hi);
            let pmx = pmx_crossover(&a, &b, lo, hi);
            prop_assert!(is_perm(&ox));
            prop_assert!(is_perm(&pmx));
            prop_assert_eq!(&ox[lo..=hi], &a[lo..=hi]);
            prop_assert_eq!(&pmx[lo..=hi], &a[lo..=hi]);
        }

        #[test]
        fn swap_mutation_preserves_permutation((a, _, seed) in perm_pair(), pr in 0.0f64..=1.0) {
            let mut rng = stream_rng(seed, StreamKey::new(0, 0, Phase::Mutation, 1));
            let g = Genome::new(RoutePlan::new(a.clone(), 1).unwrap());
            let m = mutate_swap(&g, pr, &mut rng);
            prop_assert!(is_perm(m.perm()));
            let moved = a.iter().zip(m.perm()).filter(|(x, y)| x != y).count();
            prop_assert!(moved == 0 || moved == 2);
        }
    }
}
