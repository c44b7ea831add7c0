//! Seeded random streams.
//!
//! All randomness flows from one 64-bit experiment seed. Independent units of
//! work (an island, a population member in one iteration, a crossover event)
//! each get their own ChaCha8 stream selected by a key, so results do not
//! depend on which thread runs which unit or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the solver.
pub type SolverRng = ChaCha8Rng;

/// Phases of one memetic iteration that draw random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Phase {
    Init = 1,
    Mutation = 2,
    Pairing = 3,
    Crossover = 4,
    LocalSearch = 5,
    Instance = 6,
    Experiment = 7,
}

/// Identifies one random stream below an experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub island: u64,
    pub iteration: u64,
    pub phase: Phase,
    pub index: u64,
}

impl StreamKey {
    pub fn new(island: usize, iteration: usize, phase: Phase, index: usize) -> Self {
        Self {
            island: island as u64,
            iteration: iteration as u64,
            phase,
            index: index as u64,
        }
    }

    fn stream_id(&self) -> u64 {
        let mut h = splitmix64(self.island ^ 0x5851_f42d_4c95_7f2d);
        h = splitmix64(h ^ self.iteration);
        h = splitmix64(h ^ self.phase as u64);
        splitmix64(h ^ self.index)
    }
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream `key` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, key: StreamKey) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key.stream_id());
    rng
}

/// Derives a child seed, e.g. one per (instance, repetition) cell of an experiment.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ p.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}
