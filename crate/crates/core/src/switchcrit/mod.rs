//! The switch distribution: a prior over the time at which the simple model
//! hands over to the complex one, its marginal, and the criteria built on it.

mod prior;
mod state;

pub use prior::{default_pi, SwitchPrior};
pub use state::{Snapshot, SwitchState};
