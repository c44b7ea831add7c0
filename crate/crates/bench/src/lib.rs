//! Experiment harness for the `cvrp-bench` command-line tool.

pub mod experiments;
pub mod optima;
pub mod record;

pub use optima::Optima;
pub use record::{format_prd, prd, ExperimentRecord};
