//! Unit-demand vehicle routing with a single truck: instances, an exact
//! capacity-2 solver, a memetic island-model heuristic, exhaustive oracles
//! and an analytical cost model.

pub mod cost_model;
pub mod error;
pub mod exact;
pub mod graph;
pub mod island;
pub mod memetic;
pub mod oracle;
pub mod rng;
pub mod tsplib;

pub use error::{Error, Result};
pub use exact::{min_perfect_matching, solve_capacity2, Matching, MatchingProblem};
pub use graph::{route_weight, BaseCycleCover, Instance, RoutePlan, Weight, BASE};
pub use island::{run_island_model, IslandConfig, RunReport};
pub use memetic::{CrossoverKind, Genome, MemeticParams, Population};
