use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use switchsel::criteria::{hq_from_stats, AnytimeCriterion, CriterionKind, RobustTest, Selector};
use switchsel::expfam::{Family, NestedPair, SuffStats};
use switchsel::Model;

const GAUSS: Family = Family::GaussianLocation { sigma: 1.0 };

fn gauss0() -> NestedPair {
    NestedPair::new(GAUSS, 0, vec![0.0]).unwrap()
}

fn stream(rng: &mut ChaCha8Rng, mean: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| GAUSS.sample(&[mean], rng)).collect()
}

#[test]
fn bic_agrees_with_bayes_factor_on_long_streams() {
    let sel = Selector::new(gauss0());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let means = [0.0, 0.05, 0.1];
    let streams = 1000;
    let mut agree = 0;
    let mut complex = 0;
    for i in 0..streams {
        let xs = stream(&mut rng, means[i % means.len()], 1000);
        let bic = sel.decide(CriterionKind::Bic, &xs).unwrap().selected;
        let bf = sel.decide(CriterionKind::BayesFactor, &xs).unwrap().selected;
        agree += usize::from(bic == bf);
        complex += usize::from(bic == Model::Complex);
    }
    // Both outcomes must actually occur for the agreement to mean anything.
    assert!(complex > 100 && complex < 900, "complex selected {complex} times");
    let rate = agree as f64 / streams as f64;
    assert!(rate > 0.95, "agreement {rate}");
}

#[test]
fn hq_below_one_selects_complex_more_often_on_null_streams() {
    let pair = gauss0();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (strict, loose) = (1.2, 0.5);
    let mut counts = Vec::new();
    for _ in 0..101 {
        let mut stats = SuffStats::new(GAUSS);
        let (mut a, mut b) = (0usize, 0usize);
        for n in 1..=10_000 {
            stats.push(GAUSS.sample(&[0.0], &mut rng)).unwrap();
            if n >= 10 {
                a += usize::from(hq_from_stats(&stats, &pair, strict).unwrap().selected == Model::Complex);
                b += usize::from(hq_from_stats(&stats, &pair, loose).unwrap().selected == Model::Complex);
            }
        }
        assert!(a <= b, "a larger constant can only select less");
        counts.push((a, b));
    }
    let median = |mut v: Vec<usize>| {
        v.sort_unstable();
        v[v.len() / 2]
    };
    let m_strict = median(counts.iter().map(|c| c.0).collect());
    let m_loose = median(counts.iter().map(|c| c.1).collect());
    assert!(m_loose > m_strict, "median counts {m_loose} vs {m_strict}");
}

fn rejection_times(crit: AnytimeCriterion, alpha: f64, reps: usize, horizon: usize, seed: u64) -> Vec<Option<usize>> {
    let sel = Selector::new(gauss0());
    (0..reps as u64)
        .map(|rep| {
            // One generator per stream so every level sees the same data.
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(rep));
            let mut t = RobustTest::new(crit, &sel, alpha).unwrap();
            for _ in 0..horizon {
                t.push(GAUSS.sample(&[0.0], &mut rng)).unwrap();
                if t.rejected_at().is_some() {
                    break;
                }
            }
            t.rejected_at()
        })
        .collect()
}

#[test]
fn robust_test_controls_type_one_error_under_any_stopping() {
    let (alpha, reps, horizon) = (0.1, 1000, 500);
    for crit in [AnytimeCriterion::Switch, AnytimeCriterion::BayesFactor] {
        // Stopping at the first rejection is the most aggressive rule.
        let times = rejection_times(crit, alpha, reps, horizon, 13);
        let freq = times.iter().filter(|t| t.is_some()).count() as f64 / reps as f64;
        let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
        assert!(freq <= alpha + 3.0 * se, "{crit:?}: {freq}");
    }
}

#[test]
fn robust_test_rejections_are_monotone_in_alpha() {
    let alphas = [0.01, 0.05, 0.2];
    for crit in [AnytimeCriterion::Switch, AnytimeCriterion::BayesFactor] {
        let runs: Vec<_> = alphas.iter().map(|&a| rejection_times(crit, a, 300, 300, 14)).collect();
        for w in runs.windows(2) {
            for (small, large) in w[0].iter().zip(&w[1]) {
                if let Some(t) = small {
                    let u = large.expect("a larger level rejects whenever a smaller one does");
                    assert!(u <= *t);
                }
            }
        }
    }
}
