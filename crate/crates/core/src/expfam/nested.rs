use crate::error::{Error, Result};

use super::{Family, MeanParam};

/// A complex model `M₁` (the whole family) and a simple model `M₀` obtained by
/// pinning the last `m₁ − m₀` mean coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPair {
    family: Family,
    m0: usize,
    fixed_tail: Vec<f64>,
}

impl NestedPair {
    pub fn new(family: Family, m0: usize, fixed_tail: Vec<f64>) -> Result<Self> {
        let m1 = family.dim();
        if m0 >= m1 {
            return Err(Error::InvalidConfig(format!("m0 = {m0} must be below m1 = {m1}")));
        }
        if fixed_tail.len() != m1 - m0 {
            return Err(Error::InvalidConfig(format!(
                "fixed_tail has {} values, expected {}",
                fixed_tail.len(),
                m1 - m0
            )));
        }
        let space = family.mean_space();
        for (j, (&v, iv)) in fixed_tail.iter().zip(&space[m0..]).enumerate() {
            if !iv.contains(v) {
                return Err(Error::InvalidConfig(format!(
                    "pinned coordinate {} = {v} is not inside ({}, {})",
                    m0 + j + 1,
                    iv.lo,
                    iv.hi
                )));
            }
        }
        let pair = Self { family, m0, fixed_tail };
        // M₀ is nonempty iff some completion of the tail is interior.
        let probe = pair.pin(&family.center());
        if !family.contains(&probe) {
            let mut shifted = probe.clone();
            if let Family::GaussianMeanVar = family {
                // Second moment just above the squared pinned mean.
                shifted[0] = shifted[1] * shifted[1] + 1.0;
            }
            if !family.contains(&shifted) {
                return Err(Error::InvalidConfig("the simple model's mean space is empty".into()));
            }
        }
        Ok(pair)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.family.dim()
    }

    pub fn fixed_tail(&self) -> &[f64] {
        &self.fixed_tail
    }

    pub fn is_singleton(&self) -> bool {
        self.m0 == 0
    }

    /// The single element of `M₀` when `m₀ = 0`.
    pub fn null_point(&self) -> Option<MeanParam> {
        self.is_singleton()
            .then(|| MeanParam::new(self.fixed_tail.clone(), &self.family))
    }

    fn pin(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = mu.to_vec();
        out[self.m0..].copy_from_slice(&self.fixed_tail);
        out
    }

    /// Π₀: keep the first `m₀` coordinates and replace the tail by the pinned
    /// values. Among members of `M₀` this minimizes both the squared distance
    /// and `D(μ₁ ‖ ·)`.
    pub fn project0(&self, mu1: &MeanParam) -> MeanParam {
        MeanParam::new(self.pin(mu1.values()), &self.family)
    }

    pub fn in_m0(&self, mu: &[f64]) -> bool {
        self.family.contains(mu) && mu[self.m0..] == self.fixed_tail[..]
    }
}
