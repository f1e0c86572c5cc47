use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evidence::{MarginalState, PriorSpec};
use crate::expfam::NestedPair;
use crate::math::{log_add_exp, log_sum_exp};
use crate::Model;

use super::SwitchPrior;

/// Marginal log-likelihoods of both models at the moment before observation
/// `t` arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub log_simple: f64,
    pub log_complex: f64,
}

/// Switch-distribution accumulator over a single data stream.
#[derive(Debug, Clone)]
pub struct SwitchState {
    n: u64,
    state0: MarginalState,
    state1: MarginalState,
    snapshots: Vec<Snapshot>,
    /// log Σ over folded snapshots of π(t)·p_{B,0}(x^{t−1})/p_{B,1}(x^{t−1}).
    folded: f64,
    prior: Arc<SwitchPrior>,
}

impl SwitchState {
    pub fn new(state0: MarginalState, state1: MarginalState, prior: Arc<SwitchPrior>) -> Result<Self> {
        if state0.n() != 0 || state1.n() != 0 {
            return Err(Error::MismatchedN(state0.n(), state1.n()));
        }
        if state0.family() != state1.family() {
            return Err(Error::InvalidParameter("simple and complex marginals use different families".into()));
        }
        Ok(Self {
            n: 0,
            state0,
            state1,
            snapshots: vec![Snapshot { t: 1, log_simple: 0.0, log_complex: 0.0 }],
            folded: f64::NEG_INFINITY,
            prior,
        })
    }

    /// Builds both marginals for a nested pair, with default priors where
    /// none is given.
    pub fn for_pair(
        pair: &NestedPair,
        prior0: Option<PriorSpec>,
        prior1: Option<PriorSpec>,
        prior: Arc<SwitchPrior>,
    ) -> Result<Self> {
        Self::new(MarginalState::for_simple(pair, prior0)?, MarginalState::for_complex(pair, prior1)?, prior)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn simple(&self) -> &MarginalState {
        &self.state0
    }

    pub fn complex(&self) -> &MarginalState {
        &self.state1
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn switch_prior(&self) -> &SwitchPrior {
        &self.prior
    }

    /// Absorbs one observation. On error the state is left unchanged.
    pub fn update(&mut self, x: f64) -> Result<()> {
        // Both marginals share the family, so one support check covers both
        // and neither update can then fail halfway.
        self.state0.family().check_observation(x)?;
        self.state0.update(x)?;
        self.state1.update(x)?;
        self.n += 1;
        let n = self.n;
        if n.is_power_of_two() {
            let snap = self.snapshots.iter().find(|s| s.t == n).expect("snapshot recorded one step earlier");
            let i = n.trailing_zeros() as usize;
            self.folded = log_add_exp(self.folded, self.prior.log_mass(i) + snap.log_simple - snap.log_complex);
        }
        if (n + 1).is_power_of_two() {
            self.snapshots.push(Snapshot {
                t: n + 1,
                log_simple: self.state0.log_marginal(),
                log_complex: self.state1.log_marginal(),
            });
        }
        Ok(())
    }

    pub fn update_all(&mut self, xs: &[f64]) -> Result<()> {
        xs.iter().try_for_each(|&x| self.update(x))
    }

    pub fn log_simple(&self) -> f64 {
        self.state0.log_marginal()
    }

    pub fn log_complex(&self) -> f64 {
        self.state1.log_marginal()
    }

    /// log p_sw,1(xⁿ) in O(1) from the running fold.
    pub fn log_psw1(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let switched = self.log_complex() + self.folded;
        let unswitched = self.prior.log_tail_after(self.n) + self.log_simple();
        log_add_exp(switched, unswitched)
    }

    /// log p_sw,1(xⁿ) summed directly over the stored snapshots.
    pub fn log_psw1_from_snapshots(&self) -> f64 {
        let mut terms: Vec<f64> = self
            .snapshots
            .iter()
            .filter(|s| s.t <= self.n)
            .map(|s| self.log_switched_at(s))
            .collect();
        terms.push(self.prior.log_tail_after(self.n) + self.log_simple());
        log_sum_exp(&terms)
    }

    fn log_switched_at(&self, s: &Snapshot) -> f64 {
        self.prior.log_mass(s.t.trailing_zeros() as usize) + s.log_simple + self.log_complex() - s.log_complex
    }

    /// log (p_sw,1 / p_{B,0}).
    pub fn log_ratio(&self) -> f64 {
        self.log_psw1() - self.log_simple()
    }

    /// Selects the complex model iff p_sw,1/p_{B,0} exceeds `gamma`; a tie
    /// goes to the simple model.
    pub fn delta_sw(&self, gamma: f64) -> Model {
        if self.log_ratio() <= gamma.ln() {
            Model::Simple
        } else {
            Model::Complex
        }
    }

    /// log r_sw = log p_{B,0} − log p_sw,1.
    pub fn log_r_sw(&self) -> f64 {
        -self.log_ratio()
    }

    pub fn r_sw(&self) -> f64 {
        self.log_r_sw().exp()
    }

    /// The criterion in its original form: select the complex model iff
    /// Σ_{t<n} π(t) p̄_t(xⁿ) > (1 + g(n))·p_{B,0}(xⁿ), g(n) = Σ_{t≥n} π(t).
    pub fn original_switch_select(&self) -> Result<Model> {
        if self.n == 0 {
            return Err(Error::NTooSmall { n: 0, min: 1 });
        }
        let terms: Vec<f64> =
            self.snapshots.iter().filter(|s| s.t < self.n).map(|s| self.log_switched_at(s)).collect();
        let lhs = log_sum_exp(&terms);
        let rhs = self.prior.log_tail_at_or_after(self.n).exp().ln_1p() + self.log_simple();
        Ok(if lhs > rhs { Model::Complex } else { Model::Simple })
    }
}
