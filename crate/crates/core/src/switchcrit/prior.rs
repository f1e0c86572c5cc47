use crate::error::{Error, Result};

/// Largest exponent i with 2ⁱ representable as a sample size.
pub(crate) const MAX_EXP: usize = 63;

/// π(2ⁱ) = 1/((i+1)(i+2)).
pub fn default_pi(i: u32) -> f64 {
    let i = i as f64;
    1.0 / ((i + 1.0) * (i + 2.0))
}

/// Prior on the switch time, supported on the powers of two.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchPrior {
    kappa: f64,
    /// log π(2ⁱ) for i = 0..=63.
    log_mass: Vec<f64>,
    /// log Σ_{j ≥ i} π(2ʲ) for i = 0..=64.
    log_tail: Vec<f64>,
}

impl Default for SwitchPrior {
    fn default() -> Self {
        let log_mass = (0..=MAX_EXP as u32).map(|i| default_pi(i).ln()).collect();
        // Telescoping: Σ_{j ≥ i} 1/((j+1)(j+2)) = 1/(i+1).
        let log_tail = (0..=MAX_EXP + 1).map(|i| -((i + 1) as f64).ln()).collect();
        Self { kappa: 2.0, log_mass, log_tail }
    }
}

/// Σ_{j ≥ k} j^{-κ} for k = 1..=65, summing directly below a cutoff and
/// closing with an Euler–Maclaurin tail.
fn power_tails(kappa: f64) -> Vec<f64> {
    const CUTOFF: usize = 1000;
    let m = CUTOFF as f64;
    let mut s = m.powf(1.0 - kappa) / (kappa - 1.0)
        + 0.5 * m.powf(-kappa)
        + kappa * m.powf(-kappa - 1.0) / 12.0
        - kappa * (kappa + 1.0) * (kappa + 2.0) * m.powf(-kappa - 3.0) / 720.0;
    // s = Σ_{j ≥ CUTOFF}; walk down, keeping the ones we need.
    let mut out = vec![0.0; 66];
    for j in (1..CUTOFF).rev() {
        s += (j as f64).powf(-kappa);
        if j <= 65 {
            out[j] = s;
        }
    }
    out
}

impl SwitchPrior {
    /// κ = 2 gives the closed-form default; other κ ≥ 2 use
    /// π(2ⁱ) = (i+1)^{-κ} / ζ(κ).
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 2.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("switch prior exponent must be >= 2, got {kappa}")));
        }
        if kappa == 2.0 {
            return Ok(Self::default());
        }
        let tails = power_tails(kappa);
        let log_zeta = tails[1].ln();
        let log_mass = (0..=MAX_EXP).map(|i| -kappa * ((i + 1) as f64).ln() - log_zeta).collect();
        let log_tail = (0..=MAX_EXP + 1).map(|i| tails[i + 1].ln() - log_zeta).collect();
        Ok(Self { kappa, log_mass, log_tail })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// log π(2ⁱ).
    pub fn log_mass(&self, i: usize) -> f64 {
        self.log_mass.get(i).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// π(t); zero off the powers of two.
    pub fn mass_at(&self, t: u64) -> f64 {
        if t.is_power_of_two() {
            self.log_mass(t.trailing_zeros() as usize).exp()
        } else {
            0.0
        }
    }

    /// log Σ_{j ≥ i} π(2ʲ).
    pub fn log_tail_from(&self, i: usize) -> f64 {
        self.log_tail[i.min(MAX_EXP + 1)]
    }

    /// log Σ_{t > n} π(t).
    pub fn log_tail_after(&self, n: u64) -> f64 {
        // Smallest i with 2ⁱ > n.
        let i = if n == 0 { 0 } else { 64 - n.leading_zeros() as usize };
        self.log_tail_from(i)
    }

    /// log g(n) = log Σ_{t ≥ n} π(t).
    pub fn log_tail_at_or_after(&self, n: u64) -> f64 {
        if n <= 1 {
            return self.log_tail_from(0);
        }
        self.log_tail_after(n - 1)
    }
}
