use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::MarginalState;
use crate::switchcrit::SwitchState;

use super::{CriterionKind, Decision, Selector};

/// A criterion whose evidence is anytime valid against a singleton null.
/// Only switch and Bayes factor convert; the penalized criteria are refused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnytimeCriterion {
    Switch,
    BayesFactor,
}

impl TryFrom<CriterionKind> for AnytimeCriterion {
    type Error = Error;

    fn try_from(kind: CriterionKind) -> Result<Self> {
        match kind {
            CriterionKind::Switch { .. } => Ok(AnytimeCriterion::Switch),
            CriterionKind::BayesFactor => Ok(AnytimeCriterion::BayesFactor),
            other => Err(Error::NotAnytimeValid(other.name().to_uppercase())),
        }
    }
}

impl From<AnytimeCriterion> for CriterionKind {
    fn from(c: AnytimeCriterion) -> Self {
        match c {
            AnytimeCriterion::Switch => CriterionKind::SWITCH,
            AnytimeCriterion::BayesFactor => CriterionKind::BayesFactor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TestStatus {
    Continue,
    Reject,
}

impl TestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TestStatus::Continue => "CONTINUE",
            TestStatus::Reject => "REJECT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestStep {
    pub n: usize,
    pub evidence: f64,
    pub ln_evidence: f64,
    pub status: TestStatus,
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(alpha.ln())
    } else {
        Err(Error::InvalidParameter(format!("significance level must lie in [0, 1], got {alpha}")))
    }
}

#[derive(Debug, Clone)]
enum Source {
    Switch(SwitchState),
    Bayes(MarginalState, MarginalState),
}

/// Sequential test of the simple model: reject at the first n with evidence
/// ≤ α and stay rejected.
#[derive(Debug, Clone)]
pub struct RobustTest {
    source: Source,
    ln_alpha: f64,
    rejected_at: Option<usize>,
}

impl RobustTest {
    pub fn new(criterion: AnytimeCriterion, selector: &Selector, alpha: f64) -> Result<Self> {
        let ln_alpha = check_alpha(alpha)?;
        if !selector.pair.is_singleton() {
            return Err(Error::NotAnytimeValid(format!(
                "{} against a composite simple model",
                CriterionKind::from(criterion).name()
            )));
        }
        let source = match criterion {
            AnytimeCriterion::Switch => Source::Switch(selector.switch_state()?),
            AnytimeCriterion::BayesFactor => Source::Bayes(selector.simple_marginal()?, selector.complex_marginal()?),
        };
        Ok(Self { source, ln_alpha, rejected_at: None })
    }

    pub fn n(&self) -> usize {
        match &self.source {
            Source::Switch(s) => s.n() as usize,
            Source::Bayes(s0, _) => s0.n(),
        }
    }

    pub fn ln_evidence(&self) -> f64 {
        match &self.source {
            Source::Switch(s) => s.log_r_sw(),
            Source::Bayes(s0, s1) => s0.log_marginal() - s1.log_marginal(),
        }
    }

    pub fn status(&self) -> TestStatus {
        if self.rejected_at.is_some() {
            TestStatus::Reject
        } else {
            TestStatus::Continue
        }
    }

    pub fn rejected_at(&self) -> Option<usize> {
        self.rejected_at
    }

    pub fn push(&mut self, x: f64) -> Result<TestStep> {
        match &mut self.source {
            Source::Switch(s) => s.update(x)?,
            Source::Bayes(s0, s1) => {
                s0.family().check_observation(x)?;
                s0.update(x)?;
                s1.update(x)?;
            }
        }
        let ln_ev = self.ln_evidence();
        if self.rejected_at.is_none() && ln_ev <= self.ln_alpha {
            self.rejected_at = Some(self.n());
        }
        Ok(TestStep { n: self.n(), evidence: ln_ev.exp(), ln_evidence: ln_ev, status: self.status() })
    }
}

/// Runs the rejection latch over an existing stream of decisions.
pub fn robust_test<'a>(decisions: impl IntoIterator<Item = &'a Decision>, alpha: f64) -> Result<Vec<TestStatus>> {
    let ln_alpha = check_alpha(alpha)?;
    let mut rejected = false;
    decisions
        .into_iter()
        .map(|d| {
            AnytimeCriterion::try_from(d.criterion)?;
            if !d.singleton_null {
                return Err(Error::NotAnytimeValid(format!("{} against a composite simple model", d.criterion.name())));
            }
            let ln_ev = d.ln_evidence.unwrap_or_else(|| d.evidence.ln());
            rejected |= ln_ev <= ln_alpha;
            Ok(if rejected { TestStatus::Reject } else { TestStatus::Continue })
        })
        .collect()
}
