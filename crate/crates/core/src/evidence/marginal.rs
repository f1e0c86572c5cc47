use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::expfam::{mle_from_stats, small, Family, NestedPair, SuffStats};
use crate::math::{ln_gamma, log_sum_exp};

use super::prior::{
    beta_log_pdf, gamma_log_pdf, inv_gamma_log_pdf, normal_log_pdf, student_t_log_pdf, PriorSpec,
};
use super::quadrature::simpson_nodes;

#[derive(Debug, Clone)]
enum Posterior {
    Point(Vec<f64>),
    Normal { mean: f64, var: f64, sigma2: f64 },
    Beta { a: f64, b: f64 },
    Gamma { shape: f64, rate: f64 },
    Nig { mean: f64, kappa: f64, shape: f64, scale: f64 },
    /// Variance posterior for a normal with known mean `loc`.
    Ig { loc: f64, shape: f64, scale: f64 },
    Grid { nodes: Vec<f64>, log_weights: Vec<f64> },
}

/// Sequential Bayes marginal log p_B(xⁿ) under one model.
#[derive(Debug, Clone)]
pub struct MarginalState {
    family: Family,
    n: usize,
    log_marginal: f64,
    post: Posterior,
    prior: PriorSpec,
}

impl MarginalState {
    pub fn new(family: Family, prior: PriorSpec) -> Result<Self> {
        prior.validate()?;
        let bad = || Error::InvalidParameter(format!("prior {prior:?} does not fit the {} family", family.name()));
        let post = match (&prior, family) {
            (PriorSpec::PointMass(v), _) => {
                if v.len() != family.dim() || !family.contains(v) {
                    return Err(bad());
                }
                Posterior::Point(v.clone())
            }
            (&PriorSpec::ConjugateNormal { mean, variance }, Family::GaussianLocation { sigma }) => {
                Posterior::Normal { mean, var: variance, sigma2: sigma * sigma }
            }
            (&PriorSpec::Beta { a, b }, Family::Bernoulli) => Posterior::Beta { a, b },
            (&PriorSpec::Gamma { shape, rate }, Family::Poisson) => Posterior::Gamma { shape, rate },
            (&PriorSpec::NormalInverseGamma { mean, kappa, shape, scale }, Family::GaussianMeanVar) => {
                Posterior::Nig { mean, kappa, shape, scale }
            }
            (PriorSpec::Numeric(d), f) if f.dim() == 1 => {
                let (nodes, mut log_weights) = simpson_nodes(d.lo, d.hi, d.max_nodes);
                for (w, &m) in log_weights.iter_mut().zip(&nodes) {
                    let lp = d.log_density(m);
                    *w = if lp.is_nan() { f64::NEG_INFINITY } else { *w + lp };
                }
                Posterior::Grid { nodes, log_weights }
            }
            _ => return Err(bad()),
        };
        Ok(Self { family, n: 0, log_marginal: 0.0, post, prior })
    }

    /// Marginal of the simple model: the likelihood of the null point when M₀
    /// is a singleton, otherwise a conjugate prior on the free coordinates.
    pub fn for_simple(pair: &NestedPair, prior: Option<PriorSpec>) -> Result<Self> {
        let family = *pair.family();
        if pair.is_singleton() {
            return match prior {
                None | Some(PriorSpec::PointMass(_)) => {
                    Self::new(family, PriorSpec::PointMass(pair.fixed_tail().to_vec()))
                }
                Some(p) => Err(Error::InvalidParameter(format!("singleton simple model takes no prior, got {p:?}"))),
            };
        }
        match (family, pair.m0()) {
            (Family::GaussianMeanVar, 1) => {
                let loc = pair.fixed_tail()[0];
                let (shape, scale) = match prior {
                    None => (1.0, 1.0),
                    Some(PriorSpec::InverseGamma { shape, scale }) => (shape, scale),
                    Some(p) => {
                        return Err(Error::InvalidParameter(format!(
                            "the pinned-mean simple model needs an inverse-gamma prior, got {p:?}"
                        )))
                    }
                };
                let prior = PriorSpec::InverseGamma { shape, scale };
                prior.validate()?;
                Ok(Self { family, n: 0, log_marginal: 0.0, post: Posterior::Ig { loc, shape, scale }, prior })
            }
            _ => Err(Error::Unsupported(format!("simple model with m0={} in the {} family", pair.m0(), family.name()))),
        }
    }

    pub fn for_complex(pair: &NestedPair, prior: Option<PriorSpec>) -> Result<Self> {
        let family = *pair.family();
        let prior = prior.unwrap_or_else(|| PriorSpec::default_for(&family));
        if !prior.fits_complex(&family) {
            return Err(Error::InvalidParameter(format!("prior {prior:?} cannot serve the complex model")));
        }
        Self::new(family, prior)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// Number of free mean coordinates under this marginal.
    pub fn model_dim(&self) -> usize {
        self.prior.model_dim()
    }

    /// log p_B(x | xⁿ), the increment [`update`](Self::update) would apply.
    pub fn log_predictive(&self, x: f64) -> Result<f64> {
        self.family.check_observation(x)?;
        Ok(match self.post {
            Posterior::Point(ref mu) => self.family.log_density(mu, x),
            Posterior::Normal { mean, var, sigma2 } => normal_log_pdf(x, mean, var + sigma2),
            Posterior::Beta { a, b } => {
                let p = if x == 1.0 { a } else { b };
                (p / (a + b)).ln()
            }
            Posterior::Gamma { shape, rate } => {
                ln_gamma(shape + x) - ln_gamma(shape) - ln_gamma(x + 1.0) + shape * (rate / (rate + 1.0)).ln()
                    - x * (rate + 1.0).ln()
            }
            Posterior::Nig { mean, kappa, shape, scale } => {
                student_t_log_pdf(x, 2.0 * shape, mean, scale * (kappa + 1.0) / (shape * kappa))
            }
            Posterior::Ig { loc, shape, scale } => student_t_log_pdf(x, 2.0 * shape, loc, scale / shape),
            Posterior::Grid { ref nodes, ref log_weights } => {
                let joint: Vec<f64> =
                    nodes.iter().zip(log_weights).map(|(&m, &w)| w + self.family.log_density(&[m], x)).collect();
                log_sum_exp(&joint) - log_sum_exp(log_weights)
            }
        })
    }

    pub fn update(&mut self, x: f64) -> Result<()> {
        let lp = self.log_predictive(x)?;
        if lp == f64::NEG_INFINITY || lp.is_nan() {
            return Err(Error::NumericUnderflow);
        }
        match self.post {
            Posterior::Point(_) => {}
            Posterior::Normal { ref mut mean, ref mut var, sigma2 } => {
                let prec = 1.0 / *var + 1.0 / sigma2;
                *mean = (*mean / *var + x / sigma2) / prec;
                *var = 1.0 / prec;
            }
            Posterior::Beta { ref mut a, ref mut b } => {
                if x == 1.0 {
                    *a += 1.0
                } else {
                    *b += 1.0
                }
            }
            Posterior::Gamma { ref mut shape, ref mut rate } => {
                *shape += x;
                *rate += 1.0;
            }
            Posterior::Nig { ref mut mean, ref mut kappa, ref mut shape, ref mut scale } => {
                let d = x - *mean;
                *scale += *kappa * d * d / (2.0 * (*kappa + 1.0));
                *mean = (*kappa * *mean + x) / (*kappa + 1.0);
                *kappa += 1.0;
                *shape += 0.5;
            }
            Posterior::Ig { loc, ref mut shape, ref mut scale } => {
                *scale += 0.5 * (x - loc) * (x - loc);
                *shape += 0.5;
            }
            Posterior::Grid { ref nodes, ref mut log_weights } => {
                for (w, &m) in log_weights.iter_mut().zip(nodes) {
                    *w += self.family.log_density(&[m], x);
                }
            }
        }
        self.log_marginal += lp;
        self.n += 1;
        Ok(())
    }

    pub fn update_all(&mut self, xs: &[f64]) -> Result<()> {
        xs.iter().try_for_each(|&x| self.update(x))
    }

    /// Prior density ω at a full mean parameter, with respect to Lebesgue
    /// measure on the free mean coordinates.
    pub fn prior_log_density(&self, mu: &[f64]) -> f64 {
        match self.prior {
            PriorSpec::PointMass(ref v) => {
                if v[..] == mu[..] {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PriorSpec::ConjugateNormal { mean, variance } => normal_log_pdf(mu[0], mean, variance),
            PriorSpec::Beta { a, b } => beta_log_pdf(mu[0], a, b),
            PriorSpec::Gamma { shape, rate } => gamma_log_pdf(mu[0], shape, rate),
            // (μ₁, μ₂) = (m² + σ², m) has unit Jacobian against (σ², m).
            PriorSpec::NormalInverseGamma { mean, kappa, shape, scale } => {
                let var = mu[0] - mu[1] * mu[1];
                inv_gamma_log_pdf(var, shape, scale) + normal_log_pdf(mu[1], mean, var / kappa)
            }
            PriorSpec::InverseGamma { shape, scale } => match self.post {
                Posterior::Ig { loc, .. } => inv_gamma_log_pdf(mu[0] - loc * loc, shape, scale),
                _ => f64::NEG_INFINITY,
            },
            PriorSpec::Numeric(ref d) => d.log_density(mu[0]),
        }
    }

    /// Maximum-likelihood point within this marginal's model.
    fn model_mle(&self, stats: &SuffStats) -> Result<Vec<f64>> {
        match self.post {
            Posterior::Point(ref v) => Ok(v.clone()),
            Posterior::Ig { loc, .. } => {
                let n = stats.n() as f64;
                if n == 0.0 {
                    return Err(Error::EmptySample);
                }
                let s = stats.sum();
                // Σ(x − loc)² / n from Σx² and Σx.
                let var = s[0] / n - 2.0 * loc * s[1] / n + loc * loc;
                if var > 0.0 {
                    Ok(vec![var + loc * loc, loc])
                } else {
                    Err(Error::UndefinedMle(vec![var + loc * loc, loc]))
                }
            }
            _ => {
                let mu = mle_from_stats(stats)?;
                Ok(mu.into_values())
            }
        }
    }

    /// Fisher information restricted to the free coordinates, as ½ log det.
    fn half_log_det_info(&self, mu: &[f64]) -> f64 {
        let info = self.family.fisher_info(mu);
        match self.post {
            Posterior::Ig { .. } => 0.5 * info[0].ln(),
            _ => 0.5 * small::det(&info, self.family.dim()).ln(),
        }
    }

    /// The value the Laplace diagnostic settles to at `mu`:
    /// log(√det I(μ) / ω(μ)).
    pub fn laplace_limit(&self, mu: &[f64]) -> f64 {
        self.half_log_det_info(mu) - self.prior_log_density(mu)
    }
}

/// log p_{μ̂}(xⁿ) − log p_B(xⁿ) − (m/2)·log(n/2π) for a state that has
/// absorbed exactly `sample`. Returns the diagnostic and the MLE it was
/// evaluated at.
pub fn laplace_diagnostic(state: &MarginalState, sample: &[f64]) -> Result<(f64, Vec<f64>)> {
    if state.n() != sample.len() {
        return Err(Error::MismatchedN(state.n(), sample.len()));
    }
    if state.model_dim() == 0 {
        return Err(Error::Unsupported("Laplace diagnostic of a singleton model".into()));
    }
    let stats = SuffStats::from_sample(state.family, sample)?;
    let mu = state.model_mle(&stats)?;
    if !state.family.contains(&mu) {
        return Err(Error::UndefinedMle(mu));
    }
    let n = sample.len() as f64;
    let m = state.model_dim() as f64;
    let d = stats.log_likelihood(&mu) - state.log_marginal - 0.5 * m * (n / (2.0 * PI)).ln();
    Ok((d, mu))
}
