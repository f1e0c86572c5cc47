use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::{ln_gamma, xlny};

/// Open interval `(lo, hi)`; either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const REAL: Interval = Interval::new(f64::NEG_INFINITY, f64::INFINITY);

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

/// Built-in exponential families, parameterized by the mean of their
/// sufficient statistic.
///
/// | family              | φ(x)     | mean space             |
/// |---------------------|----------|------------------------|
/// | `GaussianLocation`  | x        | (−∞, ∞)                |
/// | `Bernoulli`         | x        | (0, 1)                 |
/// | `Poisson`           | x        | (0, ∞)                 |
/// | `GaussianMeanVar`   | (x², x)  | (0, ∞) × (−∞, ∞), μ₁ > μ₂² |
///
/// For `GaussianMeanVar` the first coordinate is the second moment
/// `m² + σ²` and the second is the mean `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    GaussianLocation { sigma: f64 },
    Bernoulli,
    Poisson,
    GaussianMeanVar,
}

impl Family {
    pub fn gaussian_location(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Family::GaussianLocation { sigma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianLocation { .. } => "gaussian-location",
            Family::Bernoulli => "bernoulli",
            Family::Poisson => "poisson",
            Family::GaussianMeanVar => "gaussian-mean-var",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Family::GaussianMeanVar => 2,
            _ => 1,
        }
    }

    pub fn mean_space(&self) -> Vec<Interval> {
        match self {
            Family::GaussianLocation { .. } => vec![Interval::REAL],
            Family::Bernoulli => vec![Interval::new(0.0, 1.0)],
            Family::Poisson => vec![Interval::new(0.0, f64::INFINITY)],
            Family::GaussianMeanVar => {
                vec![Interval::new(0.0, f64::INFINITY), Interval::REAL]
            }
        }
    }

    /// Strict interior membership. For the mean-variance family this also
    /// requires a positive variance `μ₁ − μ₂² > 0`, which the interval box
    /// alone does not express.
    pub fn contains(&self, mu: &[f64]) -> bool {
        if mu.len() != self.dim() {
            return false;
        }
        let boxed = self
            .mean_space()
            .iter()
            .zip(mu)
            .all(|(iv, &m)| iv.contains(m));
        match self {
            Family::GaussianMeanVar => boxed && mu[0] - mu[1] * mu[1] > 0.0,
            _ => boxed,
        }
    }

    /// Default anchor point used by MAP estimators and far-point grids.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Family::GaussianLocation { .. } => vec![0.0],
            Family::Bernoulli => vec![0.5],
            Family::Poisson => vec![1.0],
            Family::GaussianMeanVar => vec![1.0, 0.0],
        }
    }

    /// Closed box strictly inside the mean space used for the loss-equivalence
    /// grid checks: the central 60% of bounded intervals, `[-3, 3]` on the real
    /// line and `[0.1, 10]` on the half line. The mean-variance family uses
    /// `[1, 4] × [-0.5, 0.5]` so that every corner keeps a positive variance.
    pub fn check_box(&self) -> Vec<(f64, f64)> {
        match self {
            Family::GaussianLocation { .. } => vec![(-3.0, 3.0)],
            Family::Bernoulli => vec![(0.2, 0.8)],
            Family::Poisson => vec![(0.1, 10.0)],
            Family::GaussianMeanVar => vec![(1.0, 4.0), (-0.5, 0.5)],
        }
    }

    pub fn check_observation(&self, x: f64) -> Result<()> {
        let ok = match self {
            Family::GaussianLocation { .. } | Family::GaussianMeanVar => x.is_finite(),
            Family::Bernoulli => x == 0.0 || x == 1.0,
            Family::Poisson => x >= 0.0 && x.is_finite() && x.fract() == 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidObservation { value: x, family: self.name() })
        }
    }

    /// φ(x), written into `out[..dim]`.
    #[inline]
    pub fn suff_stat_into(&self, x: f64, out: &mut [f64]) {
        match self {
            Family::GaussianMeanVar => {
                out[0] = x * x;
                out[1] = x;
            }
            _ => out[0] = x,
        }
    }

    pub fn suff_stat(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.suff_stat_into(x, &mut out);
        out
    }

    /// log r(x).
    #[inline]
    pub fn log_carrier(&self, x: f64) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => {
                -x * x / (2.0 * sigma * sigma) - 0.5 * (2.0 * PI * sigma * sigma).ln()
            }
            Family::Bernoulli => 0.0,
            Family::Poisson => -ln_gamma(x + 1.0),
            Family::GaussianMeanVar => -0.5 * (2.0 * PI).ln(),
        }
    }

    /// θ(μ).
    pub fn nat_map(&self, mu: &[f64]) -> Vec<f64> {
        match *self {
            Family::GaussianLocation { sigma } => vec![mu[0] / (sigma * sigma)],
            Family::Bernoulli => vec![(mu[0] / (1.0 - mu[0])).ln()],
            Family::Poisson => vec![mu[0].ln()],
            Family::GaussianMeanVar => {
                let var = mu[0] - mu[1] * mu[1];
                vec![-0.5 / var, mu[1] / var]
            }
        }
    }

    /// μ(θ).
    pub fn mean_map(&self, theta: &[f64]) -> Vec<f64> {
        match *self {
            Family::GaussianLocation { sigma } => vec![theta[0] * sigma * sigma],
            Family::Bernoulli => vec![1.0 / (1.0 + (-theta[0]).exp())],
            Family::Poisson => vec![theta[0].exp()],
            Family::GaussianMeanVar => {
                let var = -0.5 / theta[0];
                let m = theta[1] * var;
                vec![m * m + var, m]
            }
        }
    }

    /// ψ(θ).
    pub fn log_partition(&self, theta: &[f64]) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => 0.5 * sigma * sigma * theta[0] * theta[0],
            Family::Bernoulli => {
                let t = theta[0];
                t.max(0.0) + (-t.abs()).exp().ln_1p()
            }
            Family::Poisson => theta[0].exp(),
            Family::GaussianMeanVar => {
                let (t1, t2) = (theta[0], theta[1]);
                -t2 * t2 / (4.0 * t1) + 0.5 * (-0.5 / t1).ln()
            }
        }
    }

    /// Fisher information I(μ) in the mean parameterization, row-major
    /// `dim × dim`. It is the inverse covariance of φ(X).
    pub fn fisher_info(&self, mu: &[f64]) -> Vec<f64> {
        match *self {
            Family::GaussianLocation { sigma } => vec![1.0 / (sigma * sigma)],
            Family::Bernoulli => vec![1.0 / (mu[0] * (1.0 - mu[0]))],
            Family::Poisson => vec![1.0 / mu[0]],
            Family::GaussianMeanVar => {
                let m = mu[1];
                let v = mu[0] - m * m;
                let det = 2.0 * v * v * v;
                vec![v / det, -2.0 * m * v / det, -2.0 * m * v / det, (2.0 * v * v + 4.0 * m * m * v) / det]
            }
        }
    }

    /// log p_μ(x), written directly in μ so that closure points such as a
    /// Bernoulli mean of 0 give `-∞` rather than NaN.
    pub fn log_density(&self, mu: &[f64], x: f64) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => {
                let d = x - mu[0];
                -d * d / (2.0 * sigma * sigma) - 0.5 * (2.0 * PI * sigma * sigma).ln()
            }
            Family::Bernoulli => xlny(x, mu[0]) + xlny(1.0 - x, 1.0 - mu[0]),
            Family::Poisson => xlny(x, mu[0]) - mu[0] - ln_gamma(x + 1.0),
            Family::GaussianMeanVar => {
                let var = mu[0] - mu[1] * mu[1];
                let d = x - mu[1];
                -d * d / (2.0 * var) - 0.5 * (2.0 * PI * var).ln()
            }
        }
    }

    /// Draws one observation from p_μ. Discrete families use inverse-CDF
    /// sampling from a single uniform and Gaussian ones a single standard
    /// normal, so draws sharing a random stream are monotone in μ.
    pub fn sample<R: Rng + ?Sized>(&self, mu: &[f64], rng: &mut R) -> f64 {
        match *self {
            Family::GaussianLocation { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu[0] + sigma * z
            }
            Family::Bernoulli => {
                let u: f64 = rng.random();
                if u < mu[0] {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Poisson => poisson_inverse_cdf(mu[0], rng.random()),
            Family::GaussianMeanVar => {
                let z: f64 = rng.sample(StandardNormal);
                mu[1] + (mu[0] - mu[1] * mu[1]).sqrt() * z
            }
        }
    }
}

fn poisson_inverse_cdf(lambda: f64, u: f64) -> f64 {
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let cap = lambda + 40.0 * lambda.sqrt() + 40.0;
    while u > cdf && (k as f64) < cap {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k as f64
}

/// Closed-form helpers for the ≤ 2×2 matrices that appear here.
pub(crate) mod small {
    pub fn quad_form(mat: &[f64], v: &[f64]) -> f64 {
        match v.len() {
            1 => mat[0] * v[0] * v[0],
            2 => mat[0] * v[0] * v[0] + (mat[1] + mat[2]) * v[0] * v[1] + mat[3] * v[1] * v[1],
            _ => unreachable!("families have dimension 1 or 2"),
        }
    }

    pub fn det(mat: &[f64], dim: usize) -> f64 {
        match dim {
            1 => mat[0],
            2 => mat[0] * mat[3] - mat[1] * mat[2],
            _ => unreachable!("families have dimension 1 or 2"),
        }
    }

    #[cfg(test)]
    /// Cholesky factorization succeeds (strict positive definiteness).
    pub fn cholesky_ok(mat: &[f64], dim: usize) -> bool {
        match dim {
            1 => mat[0] > 0.0,
            2 => {
                if !(mat[0] > 0.0) || (mat[1] - mat[2]).abs() > 1e-12 * mat[1].abs().max(1.0) {
                    return false;
                }
                let l11 = mat[0].sqrt();
                let l21 = mat[2] / l11;
                mat[3] - l21 * l21 > 0.0
            }
            _ => false,
        }
    }
}
