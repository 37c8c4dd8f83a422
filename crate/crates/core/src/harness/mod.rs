//! Monte Carlo runner, statistics and persistence.

mod config;
mod persist;
mod runner;
mod stats;

pub use config::{RunConfig, Scheme};
pub use persist::{
    read_csv, read_json, sweep, sweep_to_files, write_csv, write_json, CellStatus, SweepCell, SweepManifest, SweepSpec,
};
pub use runner::{run_trials, Simulator};
pub use stats::{clopper_pearson, compare_arms, exponent_fit, Comparison, ExponentFit, FitPoint, ResultRow, RunStats, Verdict};
