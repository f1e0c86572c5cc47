use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{MarginalState, PriorSpec};
use crate::expfam::{mle_from_stats, Estimator, Family, MeanParam, NestedPair, SuffStats};
use crate::switchcrit::{SwitchPrior, SwitchState};
use crate::Model;

use super::CriterionKind;

/// Outcome of one model-selection call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub criterion: CriterionKind,
    pub selected: Model,
    /// Criterion-specific: a ratio for switch and Bayes (small favours the
    /// complex model), a penalized log-likelihood score otherwise.
    pub evidence: f64,
    /// Natural log of `evidence` for ratio criteria, computed without
    /// leaving the log domain.
    pub ln_evidence: Option<f64>,
    pub n: usize,
    /// The simple model is a single distribution.
    pub singleton_null: bool,
}

impl Decision {
    fn ratio(criterion: CriterionKind, selected: Model, ln_evidence: f64, n: usize, singleton_null: bool) -> Self {
        Self { criterion, selected, evidence: ln_evidence.exp(), ln_evidence: Some(ln_evidence), n, singleton_null }
    }

    fn score(criterion: CriterionKind, score: f64, positive_selects: impl Fn(f64) -> bool, n: usize, pair: &NestedPair) -> Self {
        let selected = if positive_selects(score) { Model::Complex } else { Model::Simple };
        Self { criterion, selected, evidence: score, ln_evidence: None, n, singleton_null: pair.is_singleton() }
    }
}

/// Bayes factor selection: evidence p_{B,0}/p_{B,1}; a tie selects the simple
/// model.
pub fn bfms_select(state0: &MarginalState, state1: &MarginalState) -> Result<Decision> {
    if state0.n() != state1.n() {
        return Err(Error::MismatchedN(state0.n(), state1.n()));
    }
    let ln_ev = state0.log_marginal() - state1.log_marginal();
    let selected = if ln_ev < 0.0 { Model::Complex } else { Model::Simple };
    Ok(Decision::ratio(CriterionKind::BayesFactor, selected, ln_ev, state0.n(), state0.model_dim() == 0))
}

pub fn switch_select(state: &SwitchState, gamma: f64) -> Decision {
    Decision::ratio(
        CriterionKind::Switch { gamma },
        state.delta_sw(gamma),
        state.log_r_sw(),
        state.n() as usize,
        state.simple().model_dim() == 0,
    )
}

/// Maximum-likelihood point within the simple model.
pub fn null_mle(stats: &SuffStats, pair: &NestedPair) -> Result<Vec<f64>> {
    if pair.is_singleton() {
        return Ok(pair.fixed_tail().to_vec());
    }
    match (pair.family(), pair.m0()) {
        (Family::GaussianMeanVar, 1) => {
            let n = stats.n() as f64;
            if n == 0.0 {
                return Err(Error::EmptySample);
            }
            let loc = pair.fixed_tail()[0];
            let s = stats.sum();
            let var = s[0] / n - 2.0 * loc * s[1] / n + loc * loc;
            let mu = vec![var + loc * loc, loc];
            if var > 0.0 {
                Ok(mu)
            } else {
                Err(Error::UndefinedMle(mu))
            }
        }
        (f, m0) => Err(Error::Unsupported(format!("simple model with m0={m0} in the {} family", f.name()))),
    }
}

/// log(p_{μ̂₁}(xⁿ) / p_{μ̂₀}(xⁿ)).
pub fn log_likelihood_ratio(stats: &SuffStats, pair: &NestedPair) -> Result<f64> {
    if stats.family() != pair.family() {
        return Err(Error::InvalidParameter("statistics and pair use different families".into()));
    }
    let mu1 = mle_from_stats(stats)?;
    let mu0 = null_mle(stats, pair)?;
    // The complex model contains the simple one, so the ratio is ≥ 0 up to
    // rounding.
    Ok((stats.log_likelihood(mu1.values()) - stats.log_likelihood(&mu0)).max(0.0))
}

fn dim_gap(pair: &NestedPair) -> f64 {
    (pair.m1() - pair.m0()) as f64
}

pub fn aic_from_stats(stats: &SuffStats, pair: &NestedPair, t: f64) -> Result<Decision> {
    let kind = CriterionKind::Aic { t };
    kind.validate()?;
    let score = log_likelihood_ratio(stats, pair)? - dim_gap(pair);
    let cut = -t.ln();
    Ok(Decision::score(kind, score, |s| s > cut, stats.n(), pair))
}

pub fn aic_select(sample: &[f64], pair: &NestedPair, t: f64) -> Result<Decision> {
    aic_from_stats(&SuffStats::from_sample(*pair.family(), sample)?, pair, t)
}

pub fn bic_from_stats(stats: &SuffStats, pair: &NestedPair) -> Result<Decision> {
    let n = stats.n() as f64;
    let score = log_likelihood_ratio(stats, pair)? - 0.5 * dim_gap(pair) * n.ln();
    Ok(Decision::score(CriterionKind::Bic, score, |s| s > 0.0, stats.n(), pair))
}

pub fn bic_select(sample: &[f64], pair: &NestedPair) -> Result<Decision> {
    bic_from_stats(&SuffStats::from_sample(*pair.family(), sample)?, pair)
}

/// Hannan–Quinn with penalty c·log log n. A score of exactly zero selects the
/// complex model.
pub fn hq_from_stats(stats: &SuffStats, pair: &NestedPair, c: f64) -> Result<Decision> {
    let kind = CriterionKind::HannanQuinn { c };
    kind.validate()?;
    if stats.n() < 3 {
        return Err(Error::NTooSmall { n: stats.n(), min: 3 });
    }
    let n = stats.n() as f64;
    let score = log_likelihood_ratio(stats, pair)? - c * n.ln().ln();
    Ok(Decision::score(kind, score, |s| s >= 0.0, stats.n(), pair))
}

pub fn hq_select(sample: &[f64], pair: &NestedPair, c: f64) -> Result<Decision> {
    hq_from_stats(&SuffStats::from_sample(*pair.family(), sample)?, pair, c)
}

/// The post-selection estimator: the simple model's estimate with its tail
/// pinned when the simple model is selected, otherwise the complex model's.
pub fn post_selection_estimate(
    decision: &Decision,
    stats: &SuffStats,
    est0: &Estimator,
    est1: &Estimator,
    pair: &NestedPair,
) -> Result<MeanParam> {
    match decision.selected {
        Model::Simple => {
            if pair.is_singleton() {
                return Ok(pair.null_point().expect("singleton pair"));
            }
            Ok(pair.project0(&est0.estimate(stats)?))
        }
        Model::Complex => est1.estimate(stats),
    }
}

/// Everything needed to run any criterion on a sample from a nested pair.
#[derive(Debug, Clone)]
pub struct Selector {
    pub pair: NestedPair,
    pub prior0: Option<PriorSpec>,
    pub prior1: Option<PriorSpec>,
    pub switch_prior: Arc<SwitchPrior>,
}

impl Selector {
    pub fn new(pair: NestedPair) -> Self {
        Self { pair, prior0: None, prior1: None, switch_prior: Arc::new(SwitchPrior::default()) }
    }

    pub fn simple_marginal(&self) -> Result<MarginalState> {
        MarginalState::for_simple(&self.pair, self.prior0.clone())
    }

    pub fn complex_marginal(&self) -> Result<MarginalState> {
        MarginalState::for_complex(&self.pair, self.prior1.clone())
    }

    pub fn switch_state(&self) -> Result<SwitchState> {
        SwitchState::new(self.simple_marginal()?, self.complex_marginal()?, Arc::clone(&self.switch_prior))
    }

    pub fn decide(&self, kind: CriterionKind, sample: &[f64]) -> Result<Decision> {
        kind.validate()?;
        match kind {
            CriterionKind::Switch { gamma } => {
                let mut s = self.switch_state()?;
                s.update_all(sample)?;
                Ok(switch_select(&s, gamma))
            }
            CriterionKind::BayesFactor => {
                let (mut s0, mut s1) = (self.simple_marginal()?, self.complex_marginal()?);
                s0.update_all(sample)?;
                s1.update_all(sample)?;
                bfms_select(&s0, &s1)
            }
            _ => {
                let stats = SuffStats::from_sample(*self.pair.family(), sample)?;
                decide_penalized(kind, &stats, &self.pair)
            }
        }
    }
}

/// AIC, BIC or HQ from sufficient statistics.
pub fn decide_penalized(kind: CriterionKind, stats: &SuffStats, pair: &NestedPair) -> Result<Decision> {
    match kind {
        CriterionKind::Aic { t } => aic_from_stats(stats, pair, t),
        CriterionKind::Bic => bic_from_stats(stats, pair),
        CriterionKind::HannanQuinn { c } => hq_from_stats(stats, pair, c),
        _ => Err(Error::InvalidParameter(format!("{kind} is not a penalized-likelihood criterion"))),
    }
}
