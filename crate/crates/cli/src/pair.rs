use std::sync::Arc;

use serde::{Deserialize, Serialize};
use switchsel::criteria::{CriterionKind, Selector};
use switchsel::expfam::{Estimator, NestedPair};
use switchsel::harness::{map_anchor, parse_family, parse_prior};
use switchsel::switchcrit::SwitchPrior;
use switchsel::{Error, Result};

/// Flat TOML config shared by `select`, `test` and `diag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairConfig {
    pub family: String,
    pub sigma: f64,
    /// Free coordinates of the simple model; 0 makes it a single distribution.
    pub m0: usize,
    /// Pinned tail coordinates of the simple model.
    pub null: Vec<f64>,
    pub prior0: String,
    pub prior1: String,
    pub kappa: f64,
    pub criterion: String,
    pub alpha: f64,
    pub seed: u64,
    /// Multiplies the numeric prior used by the quadrature check in `diag`.
    /// Anything but 1 breaks its normalization.
    pub prior1_scale: f64,
    /// Pseudo-count of the MAP fallback used when the MLE is undefined.
    pub map_lambda: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            family: "gaussian-location".into(),
            sigma: 1.0,
            m0: 0,
            null: vec![0.0],
            prior0: String::new(),
            prior1: String::new(),
            kappa: 2.0,
            criterion: "switch".into(),
            alpha: 0.05,
            seed: 20240601,
            prior1_scale: 1.0,
            map_lambda: 1.0,
        }
    }
}

fn invalid(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) => e,
        other => Error::InvalidConfig(other.to_string()),
    }
}

impl PairConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PairConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.selector()?;
        self.criterion_kind().map_err(invalid)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.map_lambda > 0.0 && self.map_lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("map_lambda must be positive, got {}", self.map_lambda)));
        }
        Ok(())
    }

    pub fn pair(&self) -> Result<NestedPair> {
        let family = parse_family(&self.family, self.sigma)?;
        NestedPair::new(family, self.m0, self.null.clone()).map_err(invalid)
    }

    pub fn selector(&self) -> Result<Selector> {
        let mut sel = Selector::new(self.pair()?);
        sel.prior0 = parse_prior(&self.prior0)?;
        sel.prior1 = parse_prior(&self.prior1)?;
        sel.switch_prior = Arc::new(SwitchPrior::new(self.kappa).map_err(invalid)?);
        sel.switch_state().map_err(invalid)?;
        Ok(sel)
    }

    pub fn criterion_kind(&self) -> Result<CriterionKind> {
        let pair = self.pair()?;
        CriterionKind::parse_for(&self.criterion, pair.m1() - pair.m0())
    }

    pub fn fallback_estimator(&self) -> Result<Estimator> {
        Ok(Estimator::Map { lambda0: self.map_lambda, anchor: map_anchor(&self.pair()?) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = PairConfig::from_toml("").unwrap();
        assert_eq!(cfg, PairConfig::default());
        let cfg = PairConfig::from_toml("family = \"bernoulli\"\nnull = [0.5]\ncriterion = \"bic\"\n").unwrap();
        assert_eq!(cfg.criterion_kind().unwrap(), CriterionKind::Bic);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "famly = \"bernoulli\"",
            "family = \"cauchy\"",
            "family = \"bernoulli\"\nnull = [1.5]",
            "criterion = \"mdl\"",
            "alpha = 2.0",
            "kappa = 1.0",
            "prior1 = \"beta:1,1\"",
        ] {
            assert!(matches!(PairConfig::from_toml(text), Err(Error::InvalidConfig(_))), "{text}");
        }
    }
}
