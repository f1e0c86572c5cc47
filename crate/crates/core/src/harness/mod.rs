//! Monte Carlo studies of risk, stopping behaviour, power and consistency.
//!
//! Every replication draws from its own ChaCha8 stream keyed by
//! (seed, kind, n index, cell, rep), so results do not depend on the number
//! of worker threads.

mod config;
mod report;
mod rng;
mod sims;
mod stopping;

pub use config::{map_anchor, parse_family, parse_prior, EstimatorKind, RuleKind, Separation, SimConfig, SimCriterion, SimKind};
pub use report::{
    fmt_f64, write_atomic, ConsistencyRow, CsvRow, DecompositionRow, PowerRow, Report, RiskRow, SimReport,
    StoppingRow,
};
pub use rng::StreamKey;
pub use sims::{power_truth, run, shell_grid};
pub use stopping::StoppingRule;
