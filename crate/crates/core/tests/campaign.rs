use hjb_variance::variance::{
    fit_points, run_campaign, sample_seed, talagrand_ratio, unbiased_variance, write_samples_csv, CampaignConfig, CurvePoint, GrowthModel,
};
use proptest::prelude::*;

fn small() -> CampaignConfig {
    CampaignConfig { horizons: vec![8.0, 16.0], samples: 24, bootstrap_resamples: 200, ..CampaignConfig::default() }
}

#[test]
fn reruns_are_bit_identical() {
    let cfg = CampaignConfig { shift_averaging: true, influence_survey: true, ..small() };
    let a = run_campaign(&cfg).unwrap();
    let b = run_campaign(&cfg).unwrap();
    let csv = |r: &hjb_variance::variance::CampaignResult| {
        let mut v = Vec::new();
        write_samples_csv(&mut v, &r.samples).unwrap();
        v
    };
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = small();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_campaign(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_campaign(&cfg).unwrap());
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
}

#[test]
fn talagrand_ratio_is_positive() {
    let cfg = CampaignConfig { horizons: vec![8.0, 16.0], samples: 12, bootstrap_resamples: 100, ..CampaignConfig::default() };
    let rep = talagrand_ratio(&cfg).unwrap();
    for p in &rep.points {
        assert!(p.sum > 0.0 && p.variance >= 0.0);
        assert!((p.c_fit - p.variance / p.sum).abs() <= 1e-12 * p.c_fit.abs().max(1.0));
    }
}

#[test]
fn growth_fits_recover_synthetic_curves() {
    let ts = [8.0, 16.0, 32.0, 64.0, 128.0];
    let lin: Vec<f64> = ts.iter().map(|t| 0.3 * t).collect();
    let r = fit_points(&ts, &lin, None).unwrap();
    assert_eq!(r.selected, GrowthModel::Linear);
    let tl: Vec<f64> = ts.iter().map(|t: &f64| 2.0 * t / t.ln()).collect();
    assert_eq!(fit_points(&ts, &tl, None).unwrap().selected, GrowthModel::TOverLogT);
    let pw: Vec<f64> = ts.iter().map(|t: &f64| 0.5 * t.powf(0.6)).collect();
    let r = fit_points(&ts, &pw, None).unwrap();
    assert_eq!(r.selected, GrowthModel::Power);
    assert!((r.kappa - 0.6).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seeds_are_distinct_across_indices(base in any::<u64>(), i in 0u64..1000, j in 0u64..1000) {
        prop_assume!(i != j);
        prop_assert_ne!(sample_seed(base, 16.0, i), sample_seed(base, 16.0, j));
        prop_assert_ne!(sample_seed(base, 16.0, i), sample_seed(base, 32.0, i));
    }

    #[test]
    fn variance_is_shift_invariant_and_scales(xs in prop::collection::vec(-100.0f64..100.0, 2..60), c in -50.0f64..50.0, s in 0.1f64..10.0) {
        let v = unbiased_variance(&xs);
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        prop_assert!((unbiased_variance(&shifted) - v).abs() <= 1e-9 * (1.0 + v));
        prop_assert!((unbiased_variance(&scaled) - s * s * v).abs() <= 1e-9 * (1.0 + s * s * v));
    }

    #[test]
    fn curve_ci_contains_estimate(xs in prop::collection::vec(-10.0f64..10.0, 3..40), seed in any::<u64>()) {
        let p = CurvePoint::from_samples(8.0, &xs, 200, seed).unwrap();
        prop_assert!(p.ci_lo <= p.variance && p.variance <= p.ci_hi);
    }
}
