use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::family::small;
use super::{Family, MeanParam};

/// The five divergences used to score an estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// ‖μ' − μ‖².
    SquaredError,
    /// (μ − μ')ᵀ I(μ') (μ − μ'), Fisher information at the reference.
    StandardizedSquared,
    /// Rényi divergence of order 1/2.
    Renyi,
    /// Squared Hellinger distance, derived from the Rényi divergence.
    SquaredHellinger,
    /// D(p_μ' ‖ p_μ).
    Kl,
}

impl LossKind {
    pub const ALL: [LossKind; 5] = [
        LossKind::SquaredError,
        LossKind::StandardizedSquared,
        LossKind::Renyi,
        LossKind::SquaredHellinger,
        LossKind::Kl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::SquaredError => "squared-error",
            LossKind::StandardizedSquared => "standardized-squared",
            LossKind::Renyi => "renyi",
            LossKind::SquaredHellinger => "squared-hellinger",
            LossKind::Kl => "kl",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown loss '{s}'")))
    }
}

/// Bhattacharyya coefficient ∫√(p_μ' p_μ) for two members of the family.
fn log_affinity(family: &Family, a: &[f64], b: &[f64]) -> f64 {
    let ta = family.nat_map(a);
    let tb = family.nat_map(b);
    let mid: Vec<f64> = ta.iter().zip(&tb).map(|(x, y)| 0.5 * (x + y)).collect();
    family.log_partition(&mid) - 0.5 * (family.log_partition(&ta) + family.log_partition(&tb))
}

/// d_H² = 2(1 − e^{−d_R/2}).
pub fn hellinger_from_renyi(d_r: f64) -> f64 {
    -2.0 * (-0.5 * d_r).exp_m1()
}

/// `loss(kind, μ_ref, μ_est)`: divergence of the estimate from the reference.
pub fn loss(kind: LossKind, mu_ref: &MeanParam, mu_est: &MeanParam, family: &Family) -> Result<f64> {
    let (r, e) = (mu_ref.values(), mu_est.values());
    if r.len() != e.len() {
        return Err(Error::InvalidParameter("mean vectors differ in length".into()));
    }
    let value = match kind {
        LossKind::SquaredError => r.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum(),
        LossKind::StandardizedSquared => {
            if !mu_ref.inside() {
                return Err(Error::NonFiniteLoss);
            }
            let diff: Vec<f64> = e.iter().zip(r).map(|(a, b)| a - b).collect();
            small::quad_form(&family.fisher_info(r), &diff)
        }
        LossKind::Renyi => renyi(family, mu_ref, mu_est)?,
        LossKind::SquaredHellinger => hellinger_from_renyi(renyi(family, mu_ref, mu_est)?),
        LossKind::Kl => {
            if !mu_ref.inside() || !mu_est.inside() {
                return Err(Error::NonFiniteLoss);
            }
            let tr = family.nat_map(r);
            let te = family.nat_map(e);
            let cross: f64 = tr.iter().zip(&te).zip(r).map(|((a, b), m)| (a - b) * m).sum();
            (cross - family.log_partition(&tr) + family.log_partition(&te)).max(0.0)
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteLoss)
    }
}

fn renyi(family: &Family, a: &MeanParam, b: &MeanParam) -> Result<f64> {
    if !a.inside() || !b.inside() {
        return Err(Error::NonFiniteLoss);
    }
    Ok((-2.0 * log_affinity(family, a.values(), b.values())).max(0.0))
}

/// Outcome of checking the loss-equivalence chain
/// `c₂·d_ST ≤ d_H² ≤ d_R ≤ D ≤ c₃·d_SQ` on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub pairs: usize,
    /// min over distinct pairs of d_H² / d_ST.
    pub c2: f64,
    /// max over distinct pairs of D / d_SQ.
    pub c3: f64,
    /// Largest positive excess in `d_H² ≤ d_R` or `d_R ≤ D`.
    pub max_order_violation: f64,
    /// Largest |d_H² − 2(1 − BC)| with BC the Bhattacharyya coefficient
    /// computed directly from the log-partition function.
    pub max_rh_deviation: f64,
}

impl SandwichReport {
    pub fn holds(&self, order_tol: f64) -> bool {
        self.max_order_violation <= order_tol
            && self.c2.is_finite()
            && self.c2 > 0.0
            && self.c3.is_finite()
            && self.c3 > 0.0
    }
}

/// Equispaced grid with `per_axis` points per coordinate over `bx`.
pub fn box_grid(bx: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        (0..per_axis)
            .map(|i| lo + (hi - lo) * i as f64 / (per_axis.max(2) - 1) as f64)
            .collect()
    };
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for &range in bx {
        let coords = axis(range);
        points = points
            .into_iter()
            .flat_map(|p| {
                coords.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    points
}

pub fn loss_sandwich(family: &Family, bx: &[(f64, f64)], per_axis: usize) -> Result<SandwichReport> {
    let points: Vec<MeanParam> = box_grid(bx, per_axis)
        .into_iter()
        .map(|v| MeanParam::new(v, family))
        .collect();
    let mut report = SandwichReport {
        pairs: 0,
        c2: f64::INFINITY,
        c3: 0.0,
        max_order_violation: 0.0,
        max_rh_deviation: 0.0,
    };
    for a in &points {
        for b in &points {
            if a == b {
                continue;
            }
            let sq = loss(LossKind::SquaredError, a, b, family)?;
            let st = loss(LossKind::StandardizedSquared, a, b, family)?;
            let h2 = loss(LossKind::SquaredHellinger, a, b, family)?;
            let dr = loss(LossKind::Renyi, a, b, family)?;
            let kl = loss(LossKind::Kl, a, b, family)?;
            let bc = log_affinity(family, a.values(), b.values()).exp();
            report.pairs += 1;
            report.c2 = report.c2.min(h2 / st);
            report.c3 = report.c3.max(kl / sq);
            report.max_order_violation = report.max_order_violation.max(h2 - dr).max(dr - kl);
            report.max_rh_deviation = report.max_rh_deviation.max((h2 - 2.0 * (1.0 - bc)).abs());
        }
    }
    Ok(report)
}
