//! Model-selection criteria behind one interface, the sequential test built
//! from the anytime-valid ones, and post-selection estimation.

mod kind;
mod robust;
mod select;

pub use kind::{aic_threshold_for_level, CriterionKind};
pub use robust::{robust_test, AnytimeCriterion, RobustTest, TestStatus, TestStep};
pub use select::{
    aic_from_stats, aic_select, bfms_select, bic_from_stats, bic_select, decide_penalized, hq_from_stats, hq_select,
    log_likelihood_ratio, null_mle, post_selection_estimate, switch_select, Decision, Selector,
};
