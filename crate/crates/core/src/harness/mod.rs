//! Closed-form bounds, Monte Carlo experiments, the worked examples and
//! transcript persistence.

pub mod bounds;
pub mod experiments;
pub mod example;
pub mod persist;
pub mod report;
pub mod stats;

pub use bounds::{compute_bounds, BoundSet, Clamped};
pub use experiments::*;
pub use example::{digit_table, worked_example, WorkedExample};
pub use persist::{fnv1a, render_run, replay, run_to_file, ReplayReport};
pub use report::{Check, Direction, ExperimentReport};
