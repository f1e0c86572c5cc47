//! Sequential Bayes marginal likelihoods, a quadrature reference, and the
//! Laplace diagnostic.

mod marginal;
mod prior;
mod quadrature;

pub use marginal::{laplace_diagnostic, MarginalState};
pub use prior::{NumericDensity, PriorSpec};
pub use quadrature::quadrature_log_marginal;
