use crate::error::{Error, Result};
use crate::expfam::{Family, SuffStats};
use crate::math::log_sum_exp;

use super::NumericDensity;

/// log ∫ e^{f} over `[lo, hi]` by composite Simpson with `nodes` (odd) points.
pub(crate) fn simpson_log(lo: f64, hi: f64, nodes: usize, log_f: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(nodes >= 3 && nodes % 2 == 1);
    let h = (hi - lo) / (nodes - 1) as f64;
    let terms: Vec<f64> = (0..nodes)
        .map(|i| {
            let w = if i == 0 || i == nodes - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = log_f(lo + h * i as f64);
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v + (w * h / 3.0).ln()
            }
        })
        .collect();
    log_sum_exp(&terms)
}

/// Simpson nodes and log weights, for the streaming grid marginal.
pub(crate) fn simpson_nodes(lo: f64, hi: f64, nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| {
            let w = if i == 0 || i == nodes - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (lo + h * i as f64, (w * h / 3.0).ln())
        })
        .unzip()
}

const START_NODES: usize = 257;

/// log ∫ ω(μ) p_μ(xⁿ) dμ, refining the grid by doubling until two successive
/// estimates agree to `prior.tol`.
pub fn quadrature_log_marginal(family: &Family, prior: &NumericDensity, sample: &[f64]) -> Result<f64> {
    if family.dim() != 1 {
        return Err(Error::Unsupported(format!("quadrature over the {}-d {} family", family.dim(), family.name())));
    }
    if sample.is_empty() {
        return Ok(0.0);
    }
    let stats = SuffStats::from_sample(*family, sample)?;
    let integrand = |m: f64| prior.log_density(m) + stats.log_likelihood(&[m]);
    let mut nodes = START_NODES;
    let mut prev = simpson_log(prior.lo, prior.hi, nodes, integrand);
    loop {
        let next_nodes = 2 * nodes - 1;
        if next_nodes > prior.max_nodes {
            let diff = f64::NAN;
            return Err(Error::GridTooCoarse { diff, nodes });
        }
        nodes = next_nodes;
        let cur = simpson_log(prior.lo, prior.hi, nodes, integrand);
        let diff = (cur - prev).abs();
        if diff < prior.tol {
            return Ok(cur);
        }
        if 2 * nodes - 1 > prior.max_nodes {
            return Err(Error::GridTooCoarse { diff, nodes });
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::PriorSpec;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson_log(0.0, 2.0, 3, |x: f64| (x * x * x + 1.0).ln()).exp();
        assert!((v - 6.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_is_zero() {
        let d = NumericDensity::from_conjugate(&PriorSpec::Beta { a: 2.0, b: 2.0 }).unwrap().scaled(3.0);
        assert_eq!(quadrature_log_marginal(&Family::Bernoulli, &d, &[]).unwrap(), 0.0);
    }

    #[test]
    fn beta_bernoulli_reference() {
        // ∫₀¹ μ²(1−μ) dμ = 1/12.
        let d = NumericDensity::from_conjugate(&PriorSpec::Beta { a: 1.0, b: 1.0 }).unwrap().with_tol(1e-10);
        let v = quadrature_log_marginal(&Family::Bernoulli, &d, &[1.0, 0.0, 1.0]).unwrap();
        assert!((v - (1.0f64 / 12.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn symmetric_data_symmetric_prior() {
        let f = Family::GaussianLocation { sigma: 1.0 };
        let d = NumericDensity::from_conjugate(&PriorSpec::ConjugateNormal { mean: 0.0, variance: 1.0 }).unwrap();
        let a = quadrature_log_marginal(&f, &d, &[1.7]).unwrap();
        let b = quadrature_log_marginal(&f, &d, &[-1.7]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn too_few_nodes_reports_grid_too_coarse() {
        let f = Family::GaussianLocation { sigma: 1.0 };
        let mut d = NumericDensity::from_conjugate(&PriorSpec::ConjugateNormal { mean: 0.0, variance: 1.0 }).unwrap();
        d.max_nodes = 513;
        d.tol = 1e-14;
        let sample: Vec<f64> = (0..200).map(|i| 0.3 + 0.01 * (i % 7) as f64).collect();
        assert!(matches!(quadrature_log_marginal(&f, &d, &sample), Err(Error::GridTooCoarse { .. })));
    }
}
