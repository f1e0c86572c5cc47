use switchsel::evidence::{laplace_diagnostic, quadrature_log_marginal, MarginalState, NumericDensity, PriorSpec};
use switchsel::expfam::{loss_sandwich, Family};
use switchsel::harness::StreamKey;
use switchsel::Result;

use crate::pair::PairConfig;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    /// `None` when the check does not apply to this config.
    pub pass: Option<bool>,
    pub detail: String,
}

impl Check {
    pub fn status(&self) -> &'static str {
        match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        }
    }
}

fn stream(cfg: &PairConfig, family: &Family, truth: &[f64], n: usize) -> Vec<f64> {
    let mut rng = StreamKey { seed: cfg.seed, domain: 0, n_index: 0, cell: 0, rep: 0 }.rng();
    (0..n).map(|_| family.sample(truth, &mut rng)).collect()
}

const LAPLACE_SIZES: [usize; 3] = [100, 1_000, 10_000];

/// The diagnostic minus its limit at the MLE, for growing prefixes of one
/// stream drawn at the family centre.
fn laplace_check(label: &str, fresh: impl Fn() -> Result<MarginalState>, xs: &[f64]) -> Check {
    let name = format!("laplace-{label}");
    let mut errs = Vec::new();
    for n in LAPLACE_SIZES {
        let result = fresh().and_then(|mut s| {
            s.update_all(&xs[..n])?;
            let (d, mu) = laplace_diagnostic(&s, &xs[..n])?;
            Ok((d, s.laplace_limit(&mu)))
        });
        match result {
            Ok((d, limit)) => errs.push((n, d, limit)),
            Err(e) => return Check { name, pass: Some(false), detail: format!("n={n}: {e}") },
        }
    }
    let gap = |i: usize| (errs[i].1 - errs[i].2).abs();
    let pass = gap(2) < 0.05 && gap(2) <= gap(0);
    let detail = errs
        .iter()
        .map(|(n, d, l)| format!("n={n}: {d:.6} vs limit {l:.6}"))
        .collect::<Vec<_>>()
        .join("; ");
    Check { name, pass: Some(pass), detail }
}

fn sandwich_check(family: &Family) -> Check {
    let name = "loss-sandwich".to_string();
    let per_axis = if family.dim() == 1 { 25 } else { 7 };
    match loss_sandwich(family, &family.check_box(), per_axis) {
        Ok(r) => Check {
            name,
            pass: Some(r.holds(1e-10) && r.max_rh_deviation < 1e-12),
            detail: format!(
                "{} pairs, c2 {:.6}, c3 {:.6}, order excess {:.3e}, identity deviation {:.3e}",
                r.pairs, r.c2, r.c3, r.max_order_violation, r.max_rh_deviation
            ),
        },
        Err(e) => Check { name, pass: Some(false), detail: e.to_string() },
    }
}

fn quadrature_check(cfg: &PairConfig, family: &Family, prior: &PriorSpec, xs: &[f64]) -> Check {
    let name = "quadrature".to_string();
    let density = match NumericDensity::from_conjugate(prior) {
        Ok(d) => d.scaled(cfg.prior1_scale),
        Err(e) => return Check { name, pass: None, detail: e.to_string() },
    };
    let mass = density.mass();
    let run = || -> Result<(f64, f64)> {
        let mut s = MarginalState::new(*family, prior.clone())?;
        s.update_all(xs)?;
        Ok((s.log_marginal(), quadrature_log_marginal(family, &density, xs)?))
    };
    match run() {
        Ok((conj, quad)) => {
            let diff = (conj - quad).abs();
            Check {
                name,
                pass: Some(diff < 1e-6 && density.check_normalized().is_ok()),
                detail: format!(
                    "n={}: conjugate {conj:.12}, quadrature {quad:.12}, |diff| {diff:.3e}; prior mass {mass:.9}",
                    xs.len()
                ),
            }
        }
        Err(e) => Check { name, pass: Some(false), detail: format!("{e}; prior mass {mass:.9}") },
    }
}

pub fn run(cfg: &PairConfig) -> Result<Vec<Check>> {
    let sel = cfg.selector()?;
    let family = *sel.pair.family();
    let truth = family.center();
    let xs = stream(cfg, &family, &truth, *LAPLACE_SIZES.last().expect("nonempty"));
    let mut checks = vec![laplace_check("complex", || sel.complex_marginal(), &xs)];
    if sel.pair.m0() > 0 {
        // The simple model is fitted at its own pinned mean.
        let mut t0 = truth.clone();
        t0[sel.pair.m0()..].copy_from_slice(sel.pair.fixed_tail());
        let x0 = stream(cfg, &family, &t0, xs.len());
        checks.push(laplace_check("simple", || sel.simple_marginal(), &x0));
    }
    checks.push(sandwich_check(&family));
    let prior = sel.prior1.clone().unwrap_or_else(|| PriorSpec::default_for(&family));
    if family.dim() == 1 {
        checks.push(quadrature_check(cfg, &family, &prior, &xs[..200]));
    } else {
        checks.push(Check {
            name: "quadrature".into(),
            pass: None,
            detail: "two-dimensional family; no one-dimensional quadrature".into(),
        });
    }
    Ok(checks)
}
