use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::{Family, MeanParam};

/// Running sufficient statistics: count, Σφ(xᵢ) and Σ log r(xᵢ).
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    family: Family,
    n: usize,
    sum: [f64; 2],
    sum_log_carrier: f64,
}

impl SuffStats {
    pub fn new(family: Family) -> Self {
        Self { family, n: 0, sum: [0.0; 2], sum_log_carrier: 0.0 }
    }

    pub fn from_sample(family: Family, sample: &[f64]) -> Result<Self> {
        let mut stats = Self::new(family);
        for &x in sample {
            stats.push(x)?;
        }
        Ok(stats)
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        self.family.check_observation(x)?;
        let mut phi = [0.0; 2];
        self.family.suff_stat_into(x, &mut phi);
        self.sum[0] += phi[0];
        self.sum[1] += phi[1];
        self.sum_log_carrier += self.family.log_carrier(x);
        self.n += 1;
        Ok(())
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum[..self.family.dim()]
    }

    /// n⁻¹ Σ φ(xᵢ).
    pub fn mean(&self) -> Result<Vec<f64>> {
        if self.n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(self.sum().iter().map(|s| s / self.n as f64).collect())
    }

    /// log p_μ(xⁿ) from the statistics alone. Points on the closure of the
    /// mean space are handled with `0·log 0 = 0`.
    pub fn log_likelihood(&self, mu: &[f64]) -> f64 {
        use crate::math::xlny;
        let n = self.n as f64;
        match self.family {
            Family::GaussianLocation { sigma } => {
                let s2 = sigma * sigma;
                mu[0] * self.sum[0] / s2 - n * mu[0] * mu[0] / (2.0 * s2) + self.sum_log_carrier
            }
            Family::Bernoulli => xlny(self.sum[0], mu[0]) + xlny(n - self.sum[0], 1.0 - mu[0]),
            Family::Poisson => xlny(self.sum[0], mu[0]) - n * mu[0] + self.sum_log_carrier,
            Family::GaussianMeanVar => {
                if self.n == 0 {
                    return 0.0;
                }
                if !(mu[0] - mu[1] * mu[1] > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let theta = self.family.nat_map(mu);
                theta[0] * self.sum[0] + theta[1] * self.sum[1] - n * self.family.log_partition(&theta)
                    + self.sum_log_carrier
            }
        }
    }
}

/// n⁻¹ Σ φ(xᵢ).
pub fn suff_mean(sample: &[f64], family: &Family) -> Result<Vec<f64>> {
    SuffStats::from_sample(*family, sample)?.mean()
}

/// The MLE, which in the mean parameterization is the average statistic
/// whenever that average is interior.
pub fn mle(sample: &[f64], family: &Family) -> Result<MeanParam> {
    mle_from_stats(&SuffStats::from_sample(*family, sample)?)
}

pub fn mle_from_stats(stats: &SuffStats) -> Result<MeanParam> {
    let mean = stats.mean()?;
    if stats.family().contains(&mean) {
        Ok(MeanParam::new(mean, stats.family()))
    } else {
        Err(Error::UndefinedMle(mean))
    }
}

/// Posterior mode under the conjugate prior with `λ₀` pseudo-observations at
/// `anchor`: `(Σφ(xᵢ) + λ₀·anchor) / (n + λ₀)`.
pub fn map_estimate(sample: &[f64], family: &Family, lambda0: f64, anchor: &MeanParam) -> Result<MeanParam> {
    map_from_stats(&SuffStats::from_sample(*family, sample)?, lambda0, anchor.values())
}

pub fn map_from_stats(stats: &SuffStats, lambda0: f64, anchor: &[f64]) -> Result<MeanParam> {
    let family = stats.family();
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda0 must be positive, got {lambda0}")));
    }
    if !family.contains(anchor) {
        return Err(Error::InvalidParameter(format!("MAP anchor {anchor:?} is not interior")));
    }
    let denom = stats.n() as f64 + lambda0;
    let values = stats
        .sum()
        .iter()
        .zip(anchor)
        .map(|(s, a)| (s + lambda0 * a) / denom)
        .collect();
    Ok(MeanParam::new(values, family))
}

/// Sample-size dependent closed box for the truncated MLE.
#[derive(Clone)]
pub enum BoxSchedule {
    /// Stays `1/(n+1)` (times the interval width when bounded) away from each
    /// finite endpoint; unbounded directions are not clamped. For the
    /// mean-variance family the variance is additionally kept ≥ `1/(n+1)`.
    Harmonic,
    Custom(Arc<dyn Fn(usize) -> Vec<(f64, f64)> + Send + Sync>),
}

impl fmt::Debug for BoxSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoxSchedule::Harmonic => f.write_str("Harmonic"),
            BoxSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl BoxSchedule {
    pub fn bounds(&self, family: &Family, n: usize) -> Vec<(f64, f64)> {
        match self {
            BoxSchedule::Harmonic => {
                let gap = 1.0 / (n as f64 + 1.0);
                family
                    .mean_space()
                    .iter()
                    .map(|iv| {
                        let scale = if iv.is_bounded() { iv.hi - iv.lo } else { 1.0 };
                        (iv.lo + gap * scale, iv.hi - gap * scale)
                    })
                    .collect()
            }
            BoxSchedule::Custom(f) => f(n),
        }
    }
}

pub fn truncated_mle(sample: &[f64], family: &Family, schedule: &BoxSchedule) -> Result<MeanParam> {
    truncated_from_stats(&SuffStats::from_sample(*family, sample)?, schedule)
}

pub fn truncated_from_stats(stats: &SuffStats, schedule: &BoxSchedule) -> Result<MeanParam> {
    let family = stats.family();
    let n = stats.n();
    let bounds = schedule.bounds(family, n);
    let mut values: Vec<f64> = stats
        .mean()?
        .iter()
        .zip(&bounds)
        .map(|(m, &(lo, hi))| m.clamp(lo, hi))
        .collect();
    if let (Family::GaussianMeanVar, BoxSchedule::Harmonic) = (family, schedule) {
        let floor = values[1] * values[1] + 1.0 / (n as f64 + 1.0);
        values[0] = values[0].max(floor);
    }
    Ok(MeanParam::new(values, family))
}

/// Point estimator used after model selection.
#[derive(Debug, Clone)]
pub enum Estimator {
    Mle,
    Map { lambda0: f64, anchor: Vec<f64> },
    Truncated(BoxSchedule),
}

impl Estimator {
    pub fn estimate(&self, stats: &SuffStats) -> Result<MeanParam> {
        match self {
            Estimator::Mle => mle_from_stats(stats),
            Estimator::Map { lambda0, anchor } => map_from_stats(stats, *lambda0, anchor),
            Estimator::Truncated(schedule) => truncated_from_stats(stats, schedule),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const G: Family = Family::GaussianLocation { sigma: 1.0 };

    #[test]
    fn suff_mean_examples() {
        assert_eq!(suff_mean(&[1.0, 2.0, 3.0], &G).unwrap(), vec![2.0]);
        let b = suff_mean(&[1.0, 0.0, 1.0], &Family::Bernoulli).unwrap();
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(suff_mean(&[0.0, 4.0], &Family::Poisson).unwrap(), vec![2.0]);
        assert_eq!(suff_mean(&[], &G), Err(Error::EmptySample));
    }

    #[test]
    fn mle_examples() {
        let m = mle(&[1.0, 2.0, 3.0], &G).unwrap();
        assert_eq!(m.values(), &[2.0]);
        assert!(m.inside());
        assert!(matches!(mle(&[1.0, 1.0, 1.0], &Family::Bernoulli), Err(Error::UndefinedMle(_))));
        let mv = mle(&[0.0, 2.0], &Family::GaussianMeanVar).unwrap();
        assert_eq!(mv.values(), &[2.0, 1.0]);
    }

    #[test]
    fn map_examples() {
        let f = Family::Bernoulli;
        let anchor = MeanParam::new(vec![0.5], &f);
        let m = map_estimate(&[1.0, 1.0], &f, 1.0, &anchor).unwrap();
        assert!((m.values()[0] - 2.5 / 3.0).abs() < 1e-15);
        assert_eq!(map_estimate(&[], &f, 1.0, &anchor).unwrap().values(), &[0.5]);
        let m = map_estimate(&[1.0, 1.0, 1.0], &f, 1.0, &anchor).unwrap();
        assert_eq!(m.values(), &[0.875]);
        assert!(m.inside());
        assert!(map_estimate(&[1.0], &f, 0.0, &anchor).is_err());
    }

    #[test]
    fn truncated_examples() {
        let f = Family::Bernoulli;
        let t = truncated_mle(&[1.0, 1.0, 1.0], &f, &BoxSchedule::Harmonic).unwrap();
        assert_eq!(t.values(), &[0.75]);
        let t = truncated_mle(&[1.0, 0.0, 1.0], &f, &BoxSchedule::Harmonic).unwrap();
        assert!((t.values()[0] - 2.0 / 3.0).abs() < 1e-15);
        for n in 1..50 {
            let sample = vec![1.0; n];
            let t = truncated_mle(&sample, &f, &BoxSchedule::Harmonic).unwrap();
            assert!(1.0 - t.values()[0] <= 1.0 / (n as f64 + 1.0) + 1e-15);
            assert!(t.inside());
        }
        let custom = BoxSchedule::Custom(Arc::new(|_| vec![(0.1, 0.2)]));
        let t = truncated_mle(&[1.0, 0.0], &f, &custom).unwrap();
        assert_eq!(t.values(), &[0.2]);
    }

    #[test]
    fn truncated_mean_var_keeps_positive_variance() {
        let t = truncated_mle(&[1.5, 1.5], &Family::GaussianMeanVar, &BoxSchedule::Harmonic).unwrap();
        assert!(t.inside(), "{t:?}");
    }

    #[test]
    fn stats_likelihood_matches_density_sum() {
        let cases: [(Family, &[f64], &[f64]); 4] = [
            (G, &[0.3, -1.2, 2.0], &[0.4]),
            (Family::Bernoulli, &[1.0, 0.0, 1.0, 1.0], &[0.3]),
            (Family::Poisson, &[0.0, 3.0, 7.0], &[2.2]),
            (Family::GaussianMeanVar, &[0.3, -1.2, 2.0], &[2.5, 0.4]),
        ];
        for (f, xs, mu) in cases {
            let stats = SuffStats::from_sample(f, xs).unwrap();
            let direct: f64 = xs.iter().map(|&x| f.log_density(mu, x)).sum();
            assert!((stats.log_likelihood(mu) - direct).abs() < 1e-12, "{f:?}");
        }
    }

    #[test]
    fn mle_unbiased_and_efficient_monte_carlo() {
        // E[μ̂] = μ and E‖μ̂ − μ‖² = 1/n for the unit Gaussian.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mu, n, reps) = (0.7, 10usize, 100_000usize);
        let mut est = Vec::with_capacity(reps);
        for _ in 0..reps {
            let mut s = SuffStats::new(G);
            for _ in 0..n {
                s.push(G.sample(&[mu], &mut rng)).unwrap();
            }
            est.push(mle_from_stats(&s).unwrap().values()[0]);
        }
        let r = reps as f64;
        let mean = est.iter().sum::<f64>() / r;
        let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
        assert!((mean - mu).abs() < 4.0 * sd / r.sqrt(), "mean {mean}");

        let sq: Vec<f64> = est.iter().map(|e| (e - mu).powi(2)).collect();
        let msq = sq.iter().sum::<f64>() / r;
        let sd_sq = (sq.iter().map(|v| (v - msq).powi(2)).sum::<f64>() / (r - 1.0)).sqrt();
        let target = 1.0 / n as f64;
        assert!((msq - target).abs() < 4.0 * sd_sq / r.sqrt(), "risk {msq}");
    }
}
