use std::time::Instant;

use rayon::prelude::*;

use crate::criteria::{null_mle, CriterionKind};
use crate::error::{Error, Result};
use crate::expfam::{loss, Estimator, Family, LossKind, MeanParam, NestedPair, SuffStats};
use crate::switchcrit::SwitchState;
use crate::Model;

use super::report::{
    ConsistencyRow, DecompositionRow, PowerRow, Report, RiskRow, SimReport, StoppingRow,
};
use super::rng::StreamKey;
use super::{RuleKind, SimConfig, SimCriterion, SimKind, StoppingRule};

/// Runs the simulation the config describes.
pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let ctx = Ctx::new(cfg)?;
    pool.install(|| match cfg.kind {
        SimKind::Risk => simulate_risk(&ctx).map(SimReport::Risk),
        SimKind::Stopping | SimKind::Lil => simulate_stopping(&ctx).map(SimReport::Stopping),
        SimKind::Power => simulate_power(&ctx).map(SimReport::Power),
        SimKind::Consistency => consistency_trace(&ctx).map(SimReport::Consistency),
        SimKind::Decomposition => risk_decomposition_check(&ctx).map(SimReport::Decomposition),
    })
}

pub(crate) struct Ctx<'a> {
    cfg: &'a SimConfig,
    pair: NestedPair,
    criteria: Vec<SimCriterion>,
    estimator: Estimator,
    fallback: Estimator,
    template: SwitchState,
    needs_switch: bool,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        let selector = cfg.selector()?;
        let criteria = cfg.sim_criteria()?;
        let needs_switch = criteria
            .iter()
            .any(|c| matches!(c, SimCriterion::Rule(CriterionKind::Switch { .. } | CriterionKind::BayesFactor)));
        Ok(Self {
            cfg,
            pair: selector.pair.clone(),
            template: selector.switch_state()?,
            criteria,
            estimator: cfg.estimator_value()?,
            fallback: cfg.fallback_estimator()?,
            needs_switch,
        })
    }

    fn key(&self, n_index: usize, cell: usize, rep: usize) -> StreamKey {
        StreamKey {
            seed: self.cfg.seed,
            domain: self.cfg.kind.domain(),
            n_index: n_index as u64,
            cell: cell as u64,
            rep: rep as u64,
        }
    }

    fn tracker(&self) -> Tracker<'_> {
        Tracker {
            pair: &self.pair,
            sw: self.needs_switch.then(|| self.template.clone()),
            stats: SuffStats::new(*self.pair.family()),
            lr: None,
        }
    }

    /// Complex-model estimate, falling back to MAP when the configured
    /// estimator is undefined. The flag reports a fallback.
    fn estimate(&self, stats: &SuffStats) -> Result<(MeanParam, bool)> {
        match self.estimator.estimate(stats) {
            Ok(m) => Ok((m, false)),
            Err(Error::UndefinedMle(_)) => Ok((self.fallback.estimate(stats)?, true)),
            Err(e) => Err(e),
        }
    }

    fn post_selection(&self, selected: Model, est1: &MeanParam) -> MeanParam {
        match selected {
            Model::Complex => est1.clone(),
            Model::Simple => self.pair.null_point().unwrap_or_else(|| self.pair.project0(est1)),
        }
    }

    fn reps<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.cfg.reps).into_par_iter().map(f).collect()
    }

    /// Base point the truths are offset from: the null itself when it is a
    /// single distribution, otherwise a unit-variance member of the simple
    /// model.
    fn base(&self) -> Vec<f64> {
        self.cfg.map_anchor().expect("validated config")
    }
}

/// Moves `base` by `delta` along the pinned direction. For the mean-variance
/// family the mean moves and the variance is held fixed.
pub(crate) fn offset_truth(family: &Family, base: &[f64], delta: f64) -> Vec<f64> {
    match family {
        Family::GaussianMeanVar => {
            let var = base[0] - base[1] * base[1];
            let m = base[1] + delta;
            vec![var + m * m, m]
        }
        _ => vec![base[0] + delta],
    }
}

fn moved_coordinate(family: &Family, mu: &[f64]) -> f64 {
    match family {
        Family::GaussianMeanVar => mu[1],
        _ => mu[0],
    }
}

/// Truths for the worst-case risk search at sample size `n`: an evenly spaced
/// shell of half-width √(scale·log log n / n) around the base, clipped to the
/// family's check box, then evenly spaced far points across that box.
pub fn shell_grid(cfg: &SimConfig, n: usize) -> Result<Vec<Vec<f64>>> {
    let family = cfg.family_value()?;
    let base = cfg.map_anchor()?;
    let axis = match family {
        Family::GaussianMeanVar => 1,
        _ => 0,
    };
    let (lo, hi) = family.check_box()[axis];
    let centre = moved_coordinate(&family, &base);
    // log log n is negative below 3; the shell is never narrower than at 3.
    let width = (cfg.shell_scale * (n.max(3) as f64).ln().ln() / n as f64).sqrt();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut add = |target: f64| {
        let mu = offset_truth(&family, &base, target.clamp(lo, hi) - centre);
        if !out.contains(&mu) {
            out.push(mu);
        }
    };
    let k = cfg.shell_points;
    for j in 0..k {
        add(centre - width + 2.0 * width * j as f64 / (k - 1) as f64);
    }
    let f = cfg.far_points;
    for j in 0..f {
        add(if f == 1 { centre } else { lo + (hi - lo) * j as f64 / (f - 1) as f64 });
    }
    Ok(out)
}

struct Tracker<'a> {
    pair: &'a NestedPair,
    sw: Option<SwitchState>,
    stats: SuffStats,
    lr: Option<f64>,
}

/// What one criterion says about the current prefix: its choice and, for
/// ratio criteria, the log evidence (small favours the complex model).
#[derive(Debug, Clone, Copy)]
struct Verdict {
    selected: Model,
    ln_evidence: f64,
}

impl Tracker<'_> {
    fn push(&mut self, x: f64) -> Result<()> {
        self.stats.push(x)?;
        if let Some(sw) = &mut self.sw {
            sw.update(x)?;
        }
        self.lr = None;
        Ok(())
    }

    fn n(&self) -> usize {
        self.stats.n()
    }

    /// sup over the complex model minus sup over the simple one, using the
    /// closure of the mean space so boundary samples still give a value.
    fn log_lr(&mut self) -> f64 {
        if let Some(v) = self.lr {
            return v;
        }
        let v = sup_log_lr(&self.stats, self.pair);
        self.lr = Some(v);
        v
    }

    fn verdict(&mut self, c: &SimCriterion) -> Verdict {
        let n = self.n();
        let d = (self.pair.m1() - self.pair.m0()) as f64;
        let score = |selected: bool| Verdict {
            selected: if selected { Model::Complex } else { Model::Simple },
            ln_evidence: if selected { f64::NEG_INFINITY } else { f64::INFINITY },
        };
        match *c {
            SimCriterion::Always(m) => Verdict { selected: m, ln_evidence: f64::NAN },
            SimCriterion::Rule(CriterionKind::Switch { gamma }) => {
                let sw = self.sw.as_ref().expect("switch state tracked");
                Verdict { selected: sw.delta_sw(gamma), ln_evidence: sw.log_r_sw() }
            }
            SimCriterion::Rule(CriterionKind::BayesFactor) => {
                let sw = self.sw.as_ref().expect("switch state tracked");
                let ln_ev = sw.log_simple() - sw.log_complex();
                Verdict { selected: if ln_ev < 0.0 { Model::Complex } else { Model::Simple }, ln_evidence: ln_ev }
            }
            SimCriterion::Rule(CriterionKind::Aic { t }) => score(self.log_lr() - d > -t.ln()),
            SimCriterion::Rule(CriterionKind::Bic) => score(self.log_lr() - 0.5 * d * (n as f64).ln() > 0.0),
            SimCriterion::Rule(CriterionKind::HannanQuinn { c }) => {
                score(n >= 3 && self.log_lr() - c * (n as f64).ln().ln() >= 0.0)
            }
        }
    }
}

pub(crate) fn sup_log_lr(stats: &SuffStats, pair: &NestedPair) -> f64 {
    let Ok(mean) = stats.mean() else { return 0.0 };
    let family = stats.family();
    let l1 = match family {
        Family::GaussianMeanVar if mean[0] - mean[1] * mean[1] <= 0.0 => f64::INFINITY,
        _ => stats.log_likelihood(&mean),
    };
    let mu0 = match null_mle(stats, pair) {
        Ok(m) | Err(Error::UndefinedMle(m)) => m,
        Err(_) => return 0.0,
    };
    let v = l1 - stats.log_likelihood(&mu0);
    if v.is_nan() {
        0.0
    } else {
        v.max(0.0)
    }
}

struct Moments {
    sum: f64,
    sumsq: f64,
    count: usize,
}

impl Moments {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut m = Moments { sum: 0.0, sumsq: 0.0, count: 0 };
        for v in values {
            m.sum += v;
            m.sumsq += v * v;
            m.count += 1;
        }
        m
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Standard error of the mean from the unbiased sample variance.
    fn se(&self) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        let var = ((self.sumsq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn binomial_se(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

fn mu_cols(mu: &[f64]) -> (f64, Option<f64>) {
    (mu[0], mu.get(1).copied())
}

fn ratios(n: usize, r: f64) -> (Option<f64>, Option<f64>) {
    let nf = n as f64;
    let loglog = nf.ln().ln();
    let ll = (n >= 3).then(|| nf * r / loglog);
    let l = (n >= 2).then(|| nf * r / nf.ln());
    (ll, l)
}

struct RiskRep {
    losses: Vec<f64>,
    fallback: bool,
}

pub(crate) fn simulate_risk(ctx: &Ctx) -> Result<Report<RiskRow>> {
    let cfg = ctx.cfg;
    let family = *ctx.pair.family();
    let mut report = Report::default();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let truths = if cfg.mu_grid.is_empty() { shell_grid(cfg, n)? } else { cfg.mu_grid.clone() };
        let mut worst: Vec<Option<(f64, RiskRow)>> = vec![None; ctx.criteria.len()];
        for (cell, mu) in truths.iter().enumerate() {
            let started = Instant::now();
            let truth = MeanParam::new(mu.clone(), &family);
            let reps = ctx.reps(|rep| {
                let mut rng = ctx.key(ni, cell, rep).rng();
                let mut tr = ctx.tracker();
                for _ in 0..n {
                    tr.push(family.sample(mu, &mut rng))?;
                }
                let (est1, fallback) = ctx.estimate(&tr.stats)?;
                let losses = ctx
                    .criteria
                    .iter()
                    .map(|c| {
                        let est = ctx.post_selection(tr.verdict(c).selected, &est1);
                        loss(cfg.loss, &truth, &est, &family)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(RiskRep { losses, fallback })
            })?;
            let undefined = reps.iter().filter(|r| r.fallback).count();
            let elapsed = started.elapsed().as_secs_f64() / ctx.criteria.len() as f64;
            for (ci, c) in ctx.criteria.iter().enumerate() {
                let m = Moments::of(reps.iter().map(|r| r.losses[ci]));
                let (mu_1, mu_2) = mu_cols(mu);
                let (ratio_loglog, ratio_log) = ratios(n, m.mean());
                let row = RiskRow {
                    n,
                    mu_1,
                    mu_2,
                    r_hat: m.mean(),
                    se: m.se(),
                    ratio_loglog,
                    ratio_log,
                    reps: cfg.reps,
                    undefined_mle_count: undefined,
                    criterion: c.label(),
                    row_kind: "cell",
                };
                if worst[ci].as_ref().is_none_or(|(r, _)| m.mean() > *r) {
                    worst[ci] = Some((m.mean(), RiskRow { row_kind: "worst", ..row.clone() }));
                }
                report.push(row, elapsed);
            }
        }
        for w in worst.into_iter().flatten() {
            report.push(w.1, 0.0);
        }
    }
    Ok(report)
}

fn rule_label(cfg: &SimConfig) -> String {
    match cfg.rule {
        RuleKind::FixedN => "fixed-n".into(),
        RuleKind::FirstCrossing => "first-crossing".into(),
        RuleKind::DataPeek => format!("data-peek:{}", cfg.peek_every),
    }
}

/// Whether a criterion's rejection depends on the level α.
fn level_dependent(c: &SimCriterion) -> bool {
    matches!(c, SimCriterion::Rule(k) if k.is_ratio())
}

pub(crate) fn simulate_stopping(ctx: &Ctx) -> Result<Report<StoppingRow>> {
    let cfg = ctx.cfg;
    let family = *ctx.pair.family();
    let null = ctx.base();
    let horizon = *cfg.horizons.last().expect("validated");
    let alphas = &cfg.alphas;
    let ln_alphas: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let started = Instant::now();
    // Per rep, per (criterion, α): for crossing rules the first rejection
    // time, for fixed-n the set of horizons rejected at.
    let outcomes = ctx.reps(|rep| {
        let mut rng = ctx.key(0, 0, rep).rng();
        let mut tr = ctx.tracker();
        let slots = ctx.criteria.len() * alphas.len();
        let mut first: Vec<Option<usize>> = vec![None; slots];
        let mut fixed: Vec<Vec<bool>> = vec![vec![false; cfg.horizons.len()]; slots];
        let mut verdicts = vec![Verdict { selected: Model::Simple, ln_evidence: 0.0 }; ctx.criteria.len()];
        for n in 1..=horizon {
            tr.push(family.sample(&null, &mut rng))?;
            let h_idx = cfg.horizons.binary_search(&n).ok();
            let looks = match cfg.rule {
                RuleKind::FixedN => h_idx.is_some(),
                RuleKind::FirstCrossing => true,
                RuleKind::DataPeek => n % cfg.peek_every == 0,
            };
            if !looks {
                continue;
            }
            for (ci, c) in ctx.criteria.iter().enumerate() {
                verdicts[ci] = tr.verdict(c);
            }
            for (ci, v) in verdicts.iter().enumerate() {
                for (ai, &alpha) in alphas.iter().enumerate() {
                    let slot = ci * alphas.len() + ai;
                    let rule = cfg.stopping_rule(alpha, n);
                    let rejects = rule.rejects(n, v.ln_evidence, ln_alphas[ai]);
                    match (cfg.rule, h_idx) {
                        (RuleKind::FixedN, Some(h)) => fixed[slot][h] = rejects,
                        (RuleKind::FixedN, None) => {}
                        _ => {
                            if rejects && first[slot].is_none() {
                                first[slot] = Some(n);
                            }
                        }
                    }
                }
            }
        }
        Ok((first, fixed))
    })?;
    let mut report = Report::default();
    let elapsed = started.elapsed().as_secs_f64();
    for (ci, c) in ctx.criteria.iter().enumerate() {
        for (ai, &alpha) in alphas.iter().enumerate() {
            if !level_dependent(c) && ai > 0 {
                continue;
            }
            let slot = ci * alphas.len() + ai;
            for (hi, &h) in cfg.horizons.iter().enumerate() {
                let rejections = outcomes
                    .iter()
                    .filter(|(first, fixed)| match cfg.rule {
                        RuleKind::FixedN => fixed[slot][hi],
                        _ => first[slot].is_some_and(|t| t <= h),
                    })
                    .count();
                let freq = rejections as f64 / cfg.reps as f64;
                report.push(
                    StoppingRow {
                        criterion: c.label(),
                        rule: rule_label(cfg),
                        alpha: level_dependent(c).then_some(alpha),
                        horizon: h,
                        rejections,
                        reps: cfg.reps,
                        freq,
                        se: binomial_se(freq, cfg.reps),
                    },
                    elapsed,
                );
            }
        }
    }
    Ok(report)
}

/// Truth for the power study: the null moved by √(s·rate(n)).
pub fn power_truth(cfg: &SimConfig, n: usize, s: f64) -> Result<Vec<f64>> {
    let family = cfg.family_value()?;
    let mu = offset_truth(&family, &cfg.map_anchor()?, (s * cfg.separation.rate(n)).sqrt());
    if family.contains(&mu) {
        Ok(mu)
    } else {
        Err(Error::InvalidConfig(format!("power truth {mu:?} at n={n}, s={s} leaves the mean space")))
    }
}

pub(crate) fn simulate_power(ctx: &Ctx) -> Result<Report<PowerRow>> {
    let cfg = ctx.cfg;
    let family = *ctx.pair.family();
    let null = MeanParam::new(ctx.base(), &family);
    let mut report = Report::default();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for &s in &cfg.s_grid {
            let started = Instant::now();
            let mu = power_truth(cfg, n, s)?;
            // Same key for every s: the draws are coupled across separations.
            let hits = ctx.reps(|rep| {
                let mut rng = ctx.key(ni, 0, rep).rng();
                let mut tr = ctx.tracker();
                let mut hit = vec![vec![false; cfg.alphas.len()]; ctx.criteria.len()];
                for m in 1..=n {
                    tr.push(family.sample(&mu, &mut rng))?;
                    let looks = match cfg.rule {
                        RuleKind::FixedN => m == n,
                        RuleKind::FirstCrossing => true,
                        RuleKind::DataPeek => m % cfg.peek_every == 0,
                    };
                    if !looks {
                        continue;
                    }
                    for (ci, c) in ctx.criteria.iter().enumerate() {
                        let v = tr.verdict(c);
                        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
                            let rule = match cfg.rule {
                                RuleKind::FixedN => StoppingRule::FixedN(n),
                                _ => cfg.stopping_rule(alpha, n),
                            };
                            hit[ci][ai] |= rule.rejects(m, v.ln_evidence, alpha.ln());
                        }
                    }
                }
                Ok(hit)
            })?;
            let elapsed = started.elapsed().as_secs_f64();
            let truth = MeanParam::new(mu.clone(), &family);
            let d_sq = loss(LossKind::SquaredError, &null, &truth, &family)?;
            let nf = n as f64;
            let f_n = nf * d_sq / nf.ln().ln();
            let (mu_1, mu_2) = mu_cols(&mu);
            for (ai, &alpha) in cfg.alphas.iter().enumerate() {
                for (ci, c) in ctx.criteria.iter().enumerate() {
                    let rejections = hits.iter().filter(|h| h[ci][ai]).count();
                    let freq = rejections as f64 / cfg.reps as f64;
                    report.push(
                        PowerRow {
                            row_kind: "cell",
                            criterion: c.label(),
                            n,
                            s,
                            mu_1,
                            mu_2,
                            f_n,
                            alpha,
                            rejections: Some(rejections),
                            reps: cfg.reps,
                            freq,
                            se: binomial_se(freq, cfg.reps),
                        },
                        elapsed,
                    );
                }
                for cj in 1..ctx.criteria.len() {
                    let diff = Moments::of(
                        hits.iter().map(|h| f64::from(u8::from(h[0][ai])) - f64::from(u8::from(h[cj][ai]))),
                    );
                    report.push(
                        PowerRow {
                            row_kind: "paired",
                            criterion: format!("{}-{}", ctx.criteria[0].label(), ctx.criteria[cj].label()),
                            n,
                            s,
                            mu_1,
                            mu_2,
                            f_n,
                            alpha,
                            rejections: None,
                            reps: cfg.reps,
                            freq: diff.mean(),
                            se: diff.se(),
                        },
                        elapsed,
                    );
                }
            }
        }
    }
    Ok(report)
}

fn offset_truths(ctx: &Ctx) -> Result<Vec<Vec<f64>>> {
    let family = *ctx.pair.family();
    let base = ctx.base();
    ctx.cfg
        .offsets
        .iter()
        .map(|&d| {
            let mu = offset_truth(&family, &base, d);
            if family.contains(&mu) {
                Ok(mu)
            } else {
                Err(Error::InvalidConfig(format!("offset {d} moves the truth outside the mean space")))
            }
        })
        .collect()
}

pub(crate) fn consistency_trace(ctx: &Ctx) -> Result<Report<ConsistencyRow>> {
    let cfg = ctx.cfg;
    let family = *ctx.pair.family();
    let truths = offset_truths(ctx)?;
    let mut report = Report::default();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for (cell, mu) in truths.iter().enumerate() {
            let started = Instant::now();
            let picks = ctx.reps(|rep| {
                let mut rng = ctx.key(ni, cell, rep).rng();
                let mut tr = ctx.tracker();
                for _ in 0..n {
                    tr.push(family.sample(mu, &mut rng))?;
                }
                Ok(ctx.criteria.iter().map(|c| tr.verdict(c).selected).collect::<Vec<_>>())
            })?;
            let elapsed = started.elapsed().as_secs_f64();
            let (mu_1, mu_2) = mu_cols(mu);
            for (ci, c) in ctx.criteria.iter().enumerate() {
                let ones = picks.iter().filter(|p| p[ci] == Model::Complex).count();
                let p1 = ones as f64 / cfg.reps as f64;
                report.push(
                    ConsistencyRow {
                        criterion: c.label(),
                        n,
                        mu_1,
                        mu_2,
                        select0: 1.0 - p1,
                        select1: p1,
                        se: binomial_se(p1, cfg.reps),
                        reps: cfg.reps,
                    },
                    elapsed,
                );
            }
        }
    }
    Ok(report)
}

/// Checks R(δ) ≤ 2·R(μ̂₁) + P(select 0)·‖μ₁ − Π₀μ₁‖² under squared error.
pub(crate) fn risk_decomposition_check(ctx: &Ctx) -> Result<Report<DecompositionRow>> {
    let cfg = ctx.cfg;
    let family = *ctx.pair.family();
    let truths = offset_truths(ctx)?;
    let sq = LossKind::SquaredError;
    let mut report = Report::default();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        for (cell, mu) in truths.iter().enumerate() {
            let started = Instant::now();
            let truth = MeanParam::new(mu.clone(), &family);
            let reps = ctx.reps(|rep| {
                let mut rng = ctx.key(ni, cell, rep).rng();
                let mut tr = ctx.tracker();
                for _ in 0..n {
                    tr.push(family.sample(mu, &mut rng))?;
                }
                let (est1, _) = ctx.estimate(&tr.stats)?;
                let complex = loss(sq, &truth, &est1, &family)?;
                let per = ctx
                    .criteria
                    .iter()
                    .map(|c| {
                        let sel = tr.verdict(c).selected;
                        Ok((loss(sq, &truth, &ctx.post_selection(sel, &est1), &family)?, sel == Model::Simple))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((complex, per))
            })?;
            let elapsed = started.elapsed().as_secs_f64();
            let complex = Moments::of(reps.iter().map(|r| r.0));
            let proj = ctx.pair.null_point().unwrap_or_else(|| ctx.pair.project0(&truth));
            let dist2 = loss(sq, &truth, &proj, &family)?;
            let (mu_1, mu_2) = mu_cols(mu);
            for (ci, c) in ctx.criteria.iter().enumerate() {
                let r = Moments::of(reps.iter().map(|x| x.1[ci].0));
                let p = Moments::of(reps.iter().map(|x| f64::from(u8::from(x.1[ci].1))));
                let bound = 2.0 * complex.mean() + p.mean() * dist2;
                let combined_se =
                    (r.se().powi(2) + 4.0 * complex.se().powi(2) + dist2 * dist2 * p.se().powi(2)).sqrt();
                report.push(
                    DecompositionRow {
                        criterion: c.label(),
                        n,
                        mu_1,
                        mu_2,
                        r_hat: r.mean(),
                        se_r: r.se(),
                        r_hat_complex: complex.mean(),
                        se_complex: complex.se(),
                        p_select0: p.mean(),
                        se_p: p.se(),
                        dist2,
                        bound,
                        combined_se,
                        holds: r.mean() <= bound + 5.0 * combined_se,
                        reps: cfg.reps,
                    },
                    elapsed,
                );
            }
        }
    }
    Ok(report)
}
