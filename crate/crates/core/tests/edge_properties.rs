use ccalab::edge::*;
use ccalab::sampler::Law;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn tridiagonal_reference_agrees_with_dense_goe() {
    let tri = goe_reference(800, 5000, 1, 17).unwrap();
    let mean_tri = tri.marginal(0).iter().sum::<f64>() / 5000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let scale = 200f64.powf(2.0 / 3.0);
    let dense: Vec<f64> = (0..5000).map(|_| scale * (goe_dense_top_k(200, 1, &mut rng)[0] - 2.0)).collect();
    let mean_dense = dense.iter().sum::<f64>() / 5000.0;
    assert!((mean_tri - mean_dense).abs() <= 0.1, "{mean_tri} vs {mean_dense}");
}

#[test]
fn goe_top_eigenvalue_sits_at_two() {
    let r = goe_reference(400, 501, 2, 3).unwrap();
    let mut top: Vec<f64> = r.values.iter().map(|v| 2.0 + v[0] / 400f64.powf(2.0 / 3.0)).collect();
    top.sort_by(f64::total_cmp);
    assert!((top[250] - 2.0).abs() <= 0.05, "{}", top[250]);
    assert!(r.values.iter().all(|v| v[0] >= v[1]));
    assert_eq!(r, goe_reference(400, 501, 2, 3).unwrap());
}

#[test]
fn merged_half_runs_give_the_full_report() {
    let cfg = TwConfig::from_ratios(80, 0.3, 0.2, Law::Rademacher, 24, 8);
    let goe = goe_reference(80, 24, 3, 8).unwrap();
    let full = tw_trials(&cfg, 0..24).unwrap();
    let merged = tw_trials(&cfg, 12..24).unwrap().merge(tw_trials(&cfg, 0..12).unwrap()).unwrap();
    assert_eq!(merged, full);
    assert_eq!(summarize_tw(&cfg, &merged, &goe).unwrap(), summarize_tw(&cfg, &full, &goe).unwrap());
    let (report, samples, _) = tw_experiment(&cfg).unwrap();
    assert_eq!(samples, full);
    assert!(report.marginals.iter().all(|m| m.quantiles.windows(2).all(|w| w[0] <= w[1])));
}

#[test]
fn rigidity_report_is_finite() {
    let cfg = RigidityConfig { n0: 60, c1: 0.3, c2: 0.2, law: Law::Gaussian, trials: 6, seed: 4, lower_edge_eps: 0.05 };
    let r = rigidity_experiment(&cfg).unwrap();
    assert_eq!(r.levels.iter().map(|l| l.n).collect::<Vec<_>>(), vec![60, 120, 240]);
    assert!(r.bulk_slope.is_finite() && r.edge_slope.is_finite());
    for l in &r.levels {
        assert!(l.index_median.iter().chain(&l.index_q95).all(|v| v.is_finite()));
    }
    assert!(r.trials.iter().all(|t| t.max_normalized.is_finite()));
}

proptest! {
    #[test]
    fn ks_is_symmetric_and_bounded(a in prop::collection::vec(-5.0f64..5.0, 1..40), b in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        let d = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
        let mut rev = a.clone();
        rev.reverse();
        prop_assert_eq!(d, ks_two_sample(&rev, &b).unwrap());
    }
}
