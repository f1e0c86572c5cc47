//! Exponential families in mean-value parameterization, nested model pairs,
//! the loss functions used to score estimates, and point estimators.

mod estimate;
mod family;
mod loss;
mod nested;

use serde::Serialize;

pub use estimate::{
    map_estimate, map_from_stats, mle, mle_from_stats, suff_mean, truncated_from_stats, truncated_mle,
    BoxSchedule, Estimator, SuffStats,
};
pub use family::{Family, Interval};
pub use loss::{box_grid, hellinger_from_renyi, loss, loss_sandwich, LossKind, SandwichReport};
pub use nested::NestedPair;

pub(crate) use family::small;

/// A mean-value parameter together with whether it lies strictly inside the
/// family's mean space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanParam {
    values: Vec<f64>,
    inside: bool,
}

impl MeanParam {
    pub fn new(values: Vec<f64>, family: &Family) -> Self {
        let inside = family.contains(&values);
        Self { values, inside }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn inside(&self) -> bool {
        self.inside
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
