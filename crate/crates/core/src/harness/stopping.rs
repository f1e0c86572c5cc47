/// When a sequential test looks at its evidence and whether it stops.
///
/// Rules see only the current sample size and the current evidence, so they
/// cannot depend on observations not yet made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Look once, at exactly n; reject iff the evidence is ≤ the level there.
    FixedN(usize),
    /// Stop at the first evidence ≤ α, however long that takes.
    FirstCrossing { alpha: f64 },
    /// First crossing, giving up after `horizon` observations.
    MaxHorizon { horizon: usize, alpha: f64 },
    /// First crossing, looking only at every `every`-th sample size.
    DataPeek { every: usize, alpha: f64 },
}

impl StoppingRule {
    /// Whether the rule inspects the evidence after `n` observations.
    pub fn looks_at(&self, n: usize) -> bool {
        match *self {
            StoppingRule::FixedN(m) => n == m,
            StoppingRule::FirstCrossing { .. } => true,
            StoppingRule::MaxHorizon { horizon, .. } => n <= horizon,
            StoppingRule::DataPeek { every, .. } => n % every == 0,
        }
    }

    /// Whether the rule stops (and rejects) given the log evidence at `n`.
    /// `ln_level` is used by [`StoppingRule::FixedN`], which carries no level
    /// of its own.
    pub fn rejects(&self, n: usize, ln_evidence: f64, ln_level: f64) -> bool {
        if !self.looks_at(n) {
            return false;
        }
        let ln_alpha = match *self {
            StoppingRule::FixedN(_) => ln_level,
            StoppingRule::FirstCrossing { alpha }
            | StoppingRule::MaxHorizon { alpha, .. }
            | StoppingRule::DataPeek { alpha, .. } => alpha.ln(),
        };
        ln_evidence <= ln_alpha
    }

    /// Last sample size the rule can look at, if bounded.
    pub fn horizon(&self) -> Option<usize> {
        match *self {
            StoppingRule::FixedN(n) | StoppingRule::MaxHorizon { horizon: n, .. } => Some(n),
            _ => None,
        }
    }
}
