//! Model selection between nested exponential families with the switch
//! criterion, Bayes factors and penalized-likelihood rules, plus a Monte Carlo
//! harness for their risk and testing behaviour.

pub mod criteria;
pub mod error;
pub mod evidence;
pub mod expfam;
pub mod harness;
pub mod math;
pub mod switchcrit;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Index of a model in a nested pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Simple = 0,
    Complex = 1,
}

impl Model {
    pub fn index(self) -> usize {
        self as usize
    }
}
