use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::criteria::{CriterionKind, Selector};
use crate::error::{Error, Result};
use crate::evidence::PriorSpec;
use crate::expfam::{BoxSchedule, Estimator, Family, LossKind, NestedPair};
use crate::switchcrit::SwitchPrior;
use crate::Model;

use super::StoppingRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Risk,
    Stopping,
    Power,
    Lil,
    Consistency,
    Decomposition,
}

impl SimKind {
    pub const ALL: [SimKind; 6] = [
        SimKind::Risk,
        SimKind::Stopping,
        SimKind::Power,
        SimKind::Lil,
        SimKind::Consistency,
        SimKind::Decomposition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimKind::Risk => "risk",
            SimKind::Stopping => "stopping",
            SimKind::Power => "power",
            SimKind::Lil => "lil",
            SimKind::Consistency => "consistency",
            SimKind::Decomposition => "decomposition",
        }
    }

    /// Index mixed into random-stream seeds so kinds never share streams.
    pub fn domain(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for SimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = SimKind::ALL.iter().map(|k| k.as_str()).collect();
            Error::InvalidConfig(format!("unknown simulation kind '{s}'; valid kinds: {}", names.join(", ")))
        })
    }
}

/// A selection rule as used by the harness: a real criterion, or an oracle
/// that always picks the same model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimCriterion {
    Rule(CriterionKind),
    Always(Model),
}

impl SimCriterion {
    pub fn label(&self) -> String {
        match self {
            SimCriterion::Rule(k) => k.to_string(),
            SimCriterion::Always(m) => format!("always{}", m.index()),
        }
    }
}

impl FromStr for SimCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "always0" => Ok(SimCriterion::Always(Model::Simple)),
            "always1" => Ok(SimCriterion::Always(Model::Complex)),
            other => other.parse().map(SimCriterion::Rule),
        }
    }
}

/// How the alternative drifts toward the null in the power study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separation {
    /// √(s·log log n / n)
    LogLog,
    /// √(s·log n / n)
    Log,
}

impl Separation {
    pub fn rate(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Separation::LogLog => n.ln().ln() / n,
            Separation::Log => n.ln() / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    FixedN,
    FirstCrossing,
    DataPeek,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Mle,
    Map,
    Truncated,
}

/// Simulation configuration. Every field is materialized: user keys are laid
/// over the defaults for the chosen kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub kind: SimKind,
    pub seed: u64,
    pub reps: usize,
    /// Worker threads; 0 uses all available cores. Never changes results.
    pub workers: usize,
    pub family: String,
    pub sigma: f64,
    pub m0: usize,
    /// Pinned tail coordinates of the simple model.
    pub null: Vec<f64>,
    /// Prior of the simple model, e.g. "inv-gamma:1,1"; empty for the default.
    pub prior0: String,
    /// Prior of the complex model, e.g. "beta:1,1"; empty for the default.
    pub prior1: String,
    pub kappa: f64,
    pub criteria: Vec<String>,
    pub n_grid: Vec<usize>,
    /// Risk: explicit truths; empty uses the shell grid around the null.
    pub mu_grid: Vec<Vec<f64>>,
    pub shell_scale: f64,
    pub shell_points: usize,
    pub far_points: usize,
    pub loss: LossKind,
    pub estimator: EstimatorKind,
    /// Pseudo-count of the MAP estimator, also used as the fallback when the
    /// MLE is undefined.
    pub map_lambda: f64,
    pub alphas: Vec<f64>,
    pub rule: RuleKind,
    pub peek_every: usize,
    /// Stopping: horizons at which rejection frequencies are reported.
    pub horizons: Vec<usize>,
    /// Power: separation multipliers.
    pub s_grid: Vec<f64>,
    pub separation: Separation,
    /// Consistency and decomposition: truths as offsets of the tail from the
    /// null along its first pinned coordinate.
    pub offsets: Vec<f64>,
}

const BASE_DEFAULTS: &str = r#"
seed = 20240601
reps = 2000
workers = 0
family = "gaussian-location"
sigma = 1.0
m0 = 0
null = [0.0]
prior0 = ""
prior1 = ""
kappa = 2.0
criteria = ["switch", "bayes"]
n_grid = [32, 128, 512, 2048, 4096]
mu_grid = []
shell_scale = 10.0
shell_points = 33
far_points = 5
loss = "squared-error"
estimator = "mle"
map_lambda = 1.0
alphas = [0.01, 0.05, 0.1]
rule = "first-crossing"
peek_every = 1
horizons = [100, 1000, 10000]
s_grid = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
separation = "log-log"
offsets = [0.0, 1.0]
"#;

fn kind_defaults(kind: SimKind) -> &'static str {
    match kind {
        SimKind::Risk => "",
        SimKind::Stopping => "reps = 10000\n",
        SimKind::Lil => "reps = 10000\ncriteria = [\"aic-level:0.05\", \"hq:1.2\"]\nalphas = [0.05]\n",
        SimKind::Power => "n_grid = [4096]\nalphas = [0.05]\nrule = \"fixed-n\"\n",
        SimKind::Consistency => "n_grid = [128, 512, 1024, 2048]\ncriteria = [\"switch\", \"bayes\", \"bic\"]\n",
        SimKind::Decomposition => "n_grid = [128]\ncriteria = [\"switch\", \"bayes\"]\noffsets = [0.0, 0.5]\n",
    }
}

impl SimConfig {
    /// Parses a flat TOML config. `kind` may come from the file or from the
    /// caller; a caller-supplied kind wins.
    pub fn from_toml(text: &str, kind: Option<SimKind>) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e| Error::InvalidConfig(format!("{e}")))?;
        let kind = match (kind, user.get("kind")) {
            (Some(k), _) => k,
            (None, Some(toml::Value::String(s))) => s.parse()?,
            (None, Some(v)) => return Err(Error::InvalidConfig(format!("kind must be a string, got {v}"))),
            (None, None) => return Err(Error::InvalidConfig("no simulation kind given".into())),
        };
        Self::with_overrides(kind, user)
    }

    pub fn defaults(kind: SimKind) -> Self {
        Self::with_overrides(kind, toml::Table::new()).expect("built-in defaults are valid")
    }

    fn with_overrides(kind: SimKind, user: toml::Table) -> Result<Self> {
        let mut table: toml::Table = BASE_DEFAULTS.parse().expect("defaults parse");
        let extra: toml::Table = kind_defaults(kind).parse().expect("kind defaults parse");
        table.extend(extra);
        table.extend(user);
        table.insert("kind".into(), toml::Value::String(kind.as_str().into()));
        let cfg: SimConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.reps == 0 {
            return bad("reps must be positive".into());
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) || !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return bad("n_grid must be a nonempty, strictly ascending list of positive counts".into());
        }
        let pair = self.pair()?;
        self.selector()?;
        let criteria = self.sim_criteria()?;
        if criteria.is_empty() {
            return bad("criteria must not be empty".into());
        }
        let hq = criteria.iter().any(|c| matches!(c, SimCriterion::Rule(CriterionKind::HannanQuinn { .. })));
        let sequential = matches!(self.kind, SimKind::Stopping | SimKind::Lil);
        if hq && !sequential && self.n_grid[0] < 3 {
            return bad("Hannan-Quinn needs every n >= 3".into());
        }
        if !(self.map_lambda > 0.0 && self.map_lambda.is_finite()) {
            return bad(format!("map_lambda must be positive, got {}", self.map_lambda));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("alphas must be a nonempty list in [0, 1]".into());
        }
        if self.peek_every == 0 {
            return bad("peek_every must be positive".into());
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) || !self.horizons.windows(2).all(|w| w[0] < w[1]) {
            return bad("horizons must be a nonempty, strictly ascending list of positive counts".into());
        }
        if self.shell_points < 2 {
            return bad("shell_points must be at least 2".into());
        }
        if !(self.shell_scale > 0.0) {
            return bad("shell_scale must be positive".into());
        }
        if self.s_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("s_grid entries must be nonnegative".into());
        }
        for mu in &self.mu_grid {
            if !pair.family().contains(mu) {
                return bad(format!("mu_grid point {mu:?} is outside the mean space"));
            }
        }
        match self.kind {
            SimKind::Stopping | SimKind::Lil | SimKind::Power => {
                if !pair.is_singleton() {
                    return bad(format!("{} needs a singleton simple model", self.kind));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn family_value(&self) -> Result<Family> {
        parse_family(&self.family, self.sigma)
    }

    pub fn pair(&self) -> Result<NestedPair> {
        NestedPair::new(self.family_value()?, self.m0, self.null.clone()).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn selector(&self) -> Result<Selector> {
        let mut sel = Selector::new(self.pair()?);
        sel.prior0 = parse_prior(&self.prior0)?;
        sel.prior1 = parse_prior(&self.prior1)?;
        sel.switch_prior = Arc::new(SwitchPrior::new(self.kappa).map_err(|e| Error::InvalidConfig(e.to_string()))?);
        // Fail early on priors that do not fit.
        sel.switch_state().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(sel)
    }

    pub fn sim_criteria(&self) -> Result<Vec<SimCriterion>> {
        let dof = self.pair()?.m1() - self.m0;
        self.criteria
            .iter()
            .map(|s| match s.trim() {
                "always0" | "always1" => s.parse(),
                other => CriterionKind::parse_for(other, dof).map(SimCriterion::Rule),
            })
            .collect()
    }

    /// Interior point MAP estimates shrink toward.
    pub fn map_anchor(&self) -> Result<Vec<f64>> {
        Ok(map_anchor(&self.pair()?))
    }

    pub fn estimator_value(&self) -> Result<Estimator> {
        Ok(match self.estimator {
            EstimatorKind::Mle => Estimator::Mle,
            EstimatorKind::Map => Estimator::Map { lambda0: self.map_lambda, anchor: self.map_anchor()? },
            EstimatorKind::Truncated => Estimator::Truncated(BoxSchedule::Harmonic),
        })
    }

    pub fn fallback_estimator(&self) -> Result<Estimator> {
        Ok(Estimator::Map { lambda0: self.map_lambda, anchor: self.map_anchor()? })
    }

    /// Stopping rule at level α for the stopping-type kinds.
    pub fn stopping_rule(&self, alpha: f64, horizon: usize) -> StoppingRule {
        match self.rule {
            RuleKind::FixedN => StoppingRule::FixedN(horizon),
            RuleKind::FirstCrossing => StoppingRule::MaxHorizon { horizon, alpha },
            RuleKind::DataPeek => StoppingRule::DataPeek { every: self.peek_every, alpha },
        }
    }
}

/// Family by its config name; `sigma` is used only by the Gaussian location
/// family.
pub fn parse_family(name: &str, sigma: f64) -> Result<Family> {
    match name {
        "gaussian-location" => Family::gaussian_location(sigma).map_err(|e| Error::InvalidConfig(e.to_string())),
        "bernoulli" => Ok(Family::Bernoulli),
        "poisson" => Ok(Family::Poisson),
        "gaussian-mean-var" => Ok(Family::GaussianMeanVar),
        other => Err(Error::InvalidConfig(format!(
            "unknown family '{other}'; valid: gaussian-location, bernoulli, poisson, gaussian-mean-var"
        ))),
    }
}

/// The null point for a singleton simple model; otherwise a unit-variance
/// member of the simple model (mean-variance) or the family's centre.
pub fn map_anchor(pair: &NestedPair) -> Vec<f64> {
    match (pair.family(), pair.is_singleton()) {
        (_, true) => pair.fixed_tail().to_vec(),
        (Family::GaussianMeanVar, false) => {
            let loc = pair.fixed_tail()[0];
            vec![1.0 + loc * loc, loc]
        }
        (f, false) => f.center(),
    }
}

/// Parses "normal:mean,var", "beta:a,b", "gamma:shape,rate",
/// "nig:mean,kappa,shape,scale", "inv-gamma:shape,scale"; empty means the
/// default prior.
pub fn parse_prior(s: &str) -> Result<Option<PriorSpec>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let (name, args) = s.split_once(':').unwrap_or((s, ""));
    let vals: Vec<f64> = args
        .split(',')
        .filter(|a| !a.trim().is_empty())
        .map(|a| a.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("prior '{s}' has a non-numeric argument")))?;
    let need = |k: usize| {
        if vals.len() == k {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("prior '{s}' needs {k} arguments")))
        }
    };
    let p = match name {
        "normal" => {
            need(2)?;
            PriorSpec::ConjugateNormal { mean: vals[0], variance: vals[1] }
        }
        "beta" => {
            need(2)?;
            PriorSpec::Beta { a: vals[0], b: vals[1] }
        }
        "gamma" => {
            need(2)?;
            PriorSpec::Gamma { shape: vals[0], rate: vals[1] }
        }
        "nig" => {
            need(4)?;
            PriorSpec::NormalInverseGamma { mean: vals[0], kappa: vals[1], shape: vals[2], scale: vals[3] }
        }
        "inv-gamma" => {
            need(2)?;
            PriorSpec::InverseGamma { shape: vals[0], scale: vals[1] }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown prior '{other}'; valid: normal, beta, gamma, nig, inv-gamma"
            )))
        }
    };
    p.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(Some(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_kind() {
        for k in SimKind::ALL {
            let c = SimConfig::defaults(k);
            assert_eq!(c.kind, k);
            let back = SimConfig::from_toml(&c.to_toml(), None).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn user_keys_override_defaults() {
        let c = SimConfig::from_toml("kind = \"risk\"\nreps = 7\nn_grid = [3, 9]\n", None).unwrap();
        assert_eq!((c.reps, c.n_grid.clone()), (7, vec![3, 9]));
        assert_eq!(c.shell_points, 33);
        let c = SimConfig::from_toml("reps = 5", Some(SimKind::Lil)).unwrap();
        assert_eq!(c.criteria, vec!["aic-level:0.05", "hq:1.2"]);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "kind = \"risk\"\nbogus = 1",
            "kind = \"nope\"",
            "reps = 3",
            "kind = \"risk\"\nreps = 0",
            "kind = \"risk\"\nn_grid = [10, 5]",
            "kind = \"risk\"\nfamily = \"cauchy\"",
            "kind = \"risk\"\ncriteria = [\"cv\"]",
            "kind = \"risk\"\nprior1 = \"beta:1,1\"",
            "kind = \"stopping\"\nfamily = \"gaussian-mean-var\"\nm0 = 1\nnull = [0.0]",
            "kind = \"risk\"\ncriteria = [\"hq:1.2\"]\nn_grid = [2, 8]",
            "kind = \"risk\"\nmu_grid = [[2.0]]\nfamily = \"bernoulli\"\nnull = [0.5]",
        ] {
            assert!(matches!(SimConfig::from_toml(text, None), Err(Error::InvalidConfig(_))), "{text}");
        }
    }

    #[test]
    fn unknown_kind_names_valid_ones() {
        let e = "bogus".parse::<SimKind>().unwrap_err().to_string();
        for k in SimKind::ALL {
            assert!(e.contains(k.as_str()));
        }
    }

    #[test]
    fn prior_strings() {
        assert!(parse_prior("").unwrap().is_none());
        assert!(matches!(parse_prior("beta:2,3").unwrap(), Some(PriorSpec::Beta { a, b }) if a == 2.0 && b == 3.0));
        assert!(parse_prior("beta:2").is_err());
        assert!(parse_prior("beta:0,1").is_err());
        assert!(parse_prior("dirichlet:1").is_err());
    }
}
