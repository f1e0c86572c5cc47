use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::math::{ln_gamma, xlny};

use super::quadrature::simpson_log;

/// Prior on a model's free mean coordinates.
///
/// Conjugate kinds are stated on the family's natural moments (mean, rate,
/// success probability, or (mean, variance) for the Gaussian mean-variance
/// family); [`MarginalState`](super::MarginalState) performs the matching
/// exact updates.
#[derive(Debug, Clone)]
pub enum PriorSpec {
    /// Point mass: the Bayes marginal of a singleton model is its likelihood.
    PointMass(Vec<f64>),
    /// Normal prior on a Gaussian location with known variance.
    ConjugateNormal { mean: f64, variance: f64 },
    /// Beta prior on a Bernoulli success probability.
    Beta { a: f64, b: f64 },
    /// Gamma(shape, rate) prior on a Poisson mean.
    Gamma { shape: f64, rate: f64 },
    /// σ² ~ InvGamma(shape, scale), m | σ² ~ N(mean, σ²/κ).
    NormalInverseGamma { mean: f64, kappa: f64, shape: f64, scale: f64 },
    /// σ² ~ InvGamma(shape, scale) for a normal whose mean is pinned by the
    /// nested pair.
    InverseGamma { shape: f64, scale: f64 },
    /// Arbitrary density on a one-dimensional mean space, integrated
    /// numerically.
    Numeric(NumericDensity),
}

impl PriorSpec {
    /// Unit-hyperparameter conjugate prior for the complex model.
    pub fn default_for(family: &Family) -> Self {
        match family {
            Family::GaussianLocation { .. } => PriorSpec::ConjugateNormal { mean: 0.0, variance: 1.0 },
            Family::Bernoulli => PriorSpec::Beta { a: 1.0, b: 1.0 },
            Family::Poisson => PriorSpec::Gamma { shape: 1.0, rate: 1.0 },
            Family::GaussianMeanVar => PriorSpec::NormalInverseGamma { mean: 0.0, kappa: 1.0, shape: 1.0, scale: 1.0 },
        }
    }

    pub fn model_dim(&self) -> usize {
        match self {
            PriorSpec::PointMass(_) => 0,
            PriorSpec::NormalInverseGamma { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("prior {name} must be positive, got {v}")))
            }
        };
        match *self {
            PriorSpec::PointMass(ref v) => {
                if v.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("point mass must be finite".into()))
                }
            }
            PriorSpec::ConjugateNormal { mean, variance } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidParameter("prior mean must be finite".into()));
                }
                positive("variance", variance)
            }
            PriorSpec::Beta { a, b } => positive("a", a).and(positive("b", b)),
            PriorSpec::Gamma { shape, rate } => positive("shape", shape).and(positive("rate", rate)),
            PriorSpec::NormalInverseGamma { mean, kappa, shape, scale } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidParameter("prior mean must be finite".into()));
                }
                positive("kappa", kappa)
                    .and(positive("shape", shape))
                    .and(positive("scale", scale))
            }
            PriorSpec::InverseGamma { shape, scale } => positive("shape", shape).and(positive("scale", scale)),
            PriorSpec::Numeric(ref d) => d.check_normalized(),
        }
    }

    /// Whether this prior can serve as the complex model's prior for `family`.
    pub fn fits_complex(&self, family: &Family) -> bool {
        matches!(
            (self, family),
            (PriorSpec::ConjugateNormal { .. }, Family::GaussianLocation { .. })
                | (PriorSpec::Beta { .. }, Family::Bernoulli)
                | (PriorSpec::Gamma { .. }, Family::Poisson)
                | (PriorSpec::NormalInverseGamma { .. }, Family::GaussianMeanVar)
                | (PriorSpec::Numeric(_), Family::GaussianLocation { .. } | Family::Bernoulli | Family::Poisson)
        )
    }
}

pub(crate) fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / var - 0.5 * (2.0 * PI * var).ln()
}

pub(crate) fn beta_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    xlny(a - 1.0, x) + xlny(b - 1.0, 1.0 - x) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
}

pub(crate) fn gamma_log_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    xlny(shape - 1.0, x) - rate * x + shape * rate.ln() - ln_gamma(shape)
}

pub(crate) fn inv_gamma_log_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

/// Location-scale Student t.
pub(crate) fn student_t_log_pdf(x: f64, dof: f64, loc: f64, scale2: f64) -> f64 {
    let z = (x - loc) * (x - loc) / (dof * scale2);
    ln_gamma(0.5 * (dof + 1.0)) - ln_gamma(0.5 * dof) - 0.5 * (dof * PI * scale2).ln()
        - 0.5 * (dof + 1.0) * z.ln_1p()
}

/// A prior density on a one-dimensional mean space, given by its log and an
/// integration range. Used as the reference against the conjugate closed
/// forms.
#[derive(Clone)]
pub struct NumericDensity {
    log_density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    /// Stop refining once successive log-integrals differ by less than this.
    pub tol: f64,
    /// Hard cap on the node count (odd, for Simpson's rule).
    pub max_nodes: usize,
}

impl fmt::Debug for NumericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericDensity")
            .field("label", &self.label)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("tol", &self.tol)
            .field("max_nodes", &self.max_nodes)
            .finish()
    }
}

impl NumericDensity {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const MAX_NODES: usize = (1 << 15) + 1;

    pub fn new(
        label: impl Into<String>,
        lo: f64,
        hi: f64,
        log_density: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            log_density: Arc::new(log_density),
            label: label.into(),
            lo,
            hi,
            tol: Self::DEFAULT_TOL,
            max_nodes: Self::MAX_NODES,
        }
    }

    /// Numeric twin of a one-dimensional conjugate prior, truncated to a range
    /// holding all but a negligible fraction of its mass.
    pub fn from_conjugate(prior: &PriorSpec) -> Result<Self> {
        prior.validate()?;
        Ok(match *prior {
            PriorSpec::ConjugateNormal { mean, variance } => {
                let w = 12.0 * variance.sqrt();
                Self::new(format!("normal({mean},{variance})"), mean - w, mean + w, move |m| {
                    normal_log_pdf(m, mean, variance)
                })
            }
            PriorSpec::Beta { a, b } => {
                Self::new(format!("beta({a},{b})"), 0.0, 1.0, move |m| beta_log_pdf(m, a, b))
            }
            PriorSpec::Gamma { shape, rate } => {
                let hi = (shape + 40.0 * shape.sqrt() + 40.0) / rate;
                Self::new(format!("gamma({shape},{rate})"), 0.0, hi, move |m| gamma_log_pdf(m, shape, rate))
            }
            _ => return Err(Error::Unsupported(format!("no numeric twin for {prior:?}"))),
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Multiplies the density by `factor`; used to build deliberately
    /// non-normalized priors.
    pub fn scaled(self, factor: f64) -> Self {
        let inner = Arc::clone(&self.log_density);
        let shift = factor.ln();
        Self {
            log_density: Arc::new(move |m| inner(m) + shift),
            label: format!("{}*{factor}", self.label),
            ..self
        }
    }

    pub fn log_density(&self, mu: f64) -> f64 {
        (self.log_density)(mu)
    }

    /// ∫ ω over the integration range at the finest grid.
    pub fn mass(&self) -> f64 {
        simpson_log(self.lo, self.hi, self.max_nodes, |m| self.log_density(m)).exp()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() <= 1e-6 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("prior '{}' integrates to {mass}, not 1", self.label)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_twins_normalize() {
        for p in [
            PriorSpec::ConjugateNormal { mean: 0.0, variance: 1.0 },
            PriorSpec::ConjugateNormal { mean: 2.0, variance: 0.25 },
            PriorSpec::Beta { a: 1.0, b: 1.0 },
            PriorSpec::Beta { a: 2.0, b: 3.5 },
            PriorSpec::Gamma { shape: 1.0, rate: 1.0 },
            PriorSpec::Gamma { shape: 3.0, rate: 0.5 },
        ] {
            let d = NumericDensity::from_conjugate(&p).unwrap();
            assert!((d.mass() - 1.0).abs() < 1e-9, "{p:?}: {}", d.mass());
            assert!(PriorSpec::Numeric(d).validate().is_ok());
        }
    }

    #[test]
    fn scaled_density_fails_validation() {
        let d = NumericDensity::from_conjugate(&PriorSpec::Beta { a: 1.0, b: 1.0 }).unwrap().scaled(1.5);
        assert!((d.mass() - 1.5).abs() < 1e-9);
        assert!(PriorSpec::Numeric(d).validate().is_err());
    }

    #[test]
    fn hyperparameters_must_be_positive() {
        assert!(PriorSpec::Beta { a: 0.0, b: 1.0 }.validate().is_err());
        assert!(PriorSpec::Gamma { shape: 1.0, rate: -1.0 }.validate().is_err());
        assert!(PriorSpec::ConjugateNormal { mean: 0.0, variance: 0.0 }.validate().is_err());
        assert!(PriorSpec::NormalInverseGamma { mean: 0.0, kappa: 1.0, shape: 1.0, scale: f64::NAN }
            .validate()
            .is_err());
    }

    #[test]
    fn student_t_integrates_to_one() {
        let (lo, hi) = (-2000.0, 2000.0);
        let m = simpson_log(lo, hi, (1 << 18) + 1, |x| student_t_log_pdf(x, 3.0, 0.5, 2.0)).exp();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
    }
}
