use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::chi_square_upper_quantile;

/// A model-selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CriterionKind {
    /// Select the complex model iff p_sw,1/p_{B,0} > γ.
    Switch { gamma: f64 },
    /// Select the complex model iff p_{B,0}/p_{B,1} < 1.
    BayesFactor,
    /// Select the complex model iff log LR − (m₁ − m₀) > −log t.
    Aic { t: f64 },
    Bic,
    HannanQuinn { c: f64 },
}

impl CriterionKind {
    pub const SWITCH: Self = CriterionKind::Switch { gamma: 1.0 };
    pub const AIC: Self = CriterionKind::Aic { t: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            CriterionKind::Switch { gamma } => ("gamma", gamma),
            CriterionKind::Aic { t } => ("t", t),
            CriterionKind::HannanQuinn { c } => ("c", c),
            _ => return Ok(()),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("criterion {name} must be positive, got {v}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CriterionKind::Switch { .. } => "switch",
            CriterionKind::BayesFactor => "bayes",
            CriterionKind::Aic { .. } => "aic",
            CriterionKind::Bic => "bic",
            CriterionKind::HannanQuinn { .. } => "hq",
        }
    }

    /// Whether evidence is a likelihood ratio (true) or a penalized
    /// log-likelihood score (false).
    pub fn is_ratio(&self) -> bool {
        matches!(self, CriterionKind::Switch { .. } | CriterionKind::BayesFactor)
    }

    /// Parses like [`FromStr`], resolving `aic-level:α` for a pair whose
    /// dimensions differ by `dof`.
    pub fn parse_for(s: &str, dof: usize) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |what: &str| -> Result<Option<f64>> {
            arg.map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("criterion '{s}': {what} '{a}' is not a number")))
            })
            .transpose()
        };
        let kind = match head.to_ascii_lowercase().as_str() {
            "switch" => CriterionKind::Switch { gamma: num("gamma")?.unwrap_or(1.0) },
            "bayes" | "bfms" if arg.is_none() => CriterionKind::BayesFactor,
            "bic" if arg.is_none() => CriterionKind::Bic,
            "aic" => CriterionKind::Aic { t: num("t")?.unwrap_or(1.0) },
            "aic-level" => {
                let alpha = num("alpha")?.ok_or_else(|| Error::InvalidConfig("aic-level needs ':alpha'".into()))?;
                CriterionKind::Aic { t: aic_threshold_for_level(alpha, dof)? }
            }
            "hq" => CriterionKind::HannanQuinn {
                c: num("c")?.ok_or_else(|| Error::InvalidConfig("hq needs ':c'".into()))?,
            },
            _ => return Err(Error::InvalidConfig(format!("unknown criterion '{s}'"))),
        };
        kind.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(kind)
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CriterionKind::Switch { gamma } => write!(f, "switch:{gamma}"),
            CriterionKind::BayesFactor => f.write_str("bayes"),
            CriterionKind::Aic { t } => write!(f, "aic:{t}"),
            CriterionKind::Bic => f.write_str("bic"),
            CriterionKind::HannanQuinn { c } => write!(f, "hq:{c}"),
        }
    }
}

impl FromStr for CriterionKind {
    type Err = Error;

    /// Accepts `switch[:γ]`, `bayes`, `aic[:t]`, `aic-level:α`, `bic`, `hq:c`.
    /// `aic-level` assumes the models differ by one dimension.
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_for(s, 1)
    }
}

impl From<CriterionKind> for String {
    fn from(k: CriterionKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for CriterionKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The AIC threshold t for which the rule coincides with the likelihood-ratio
/// test at level α: 2·log LR ≥ χ²_{dof,α} ⇔ log LR − dof ≥ −log t.
pub fn aic_threshold_for_level(alpha: f64, dof: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || dof == 0 {
        return Err(Error::InvalidParameter(format!("level must lie in (0,1) with dof >= 1, got {alpha}, {dof}")));
    }
    let q = chi_square_upper_quantile(alpha, dof as f64);
    Ok((dof as f64 - 0.5 * q).exp())
}
