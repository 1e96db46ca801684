use hjb_variance::influence::{argmax_path_flips, build_shift_hash, classify_importance, flip_difference, SurveyParams};
use hjb_variance::solver::{backtrack_paths, occupation_times, solve_u, solve_value, solve_value_above};
use hjb_variance::variance::ModelConfig;
use hjb_variance::SiteIndex;
use proptest::prelude::*;

fn model(alpha: f64) -> ModelConfig {
    ModelConfig { alpha, ..ModelConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flip_records_obey_bounds(seed in any::<u64>(), alpha in 0.2f64..0.8) {
        let m = model(alpha);
        let t = 4.0;
        let inputs = m.inputs(t).unwrap();
        let env = m.environment(t, seed, 0).unwrap();
        let table = solve_value(&env, &inputs).unwrap();
        let beta = 1.0 - alpha;
        let (c1, c2) = ((2.0 * alpha).min(2.0 * beta), (2.0 * alpha).max(2.0 * beta));
        let delta = 0.1;
        let paths = backtrack_paths(&table, &env, delta, 50).unwrap();
        for j in env.bbox().sites() {
            let r = flip_difference(&table, &env, &j).unwrap();
            let diff = r.sigma_u - r.u;
            prop_assert!(diff.abs() <= t + 1e-12);
            if !r.omega_is_b {
                prop_assert!(diff <= 1e-12);
                for p in &paths.paths {
                    let pi = occupation_times(p).get(&SiteIndex::new(j.clone())).copied().unwrap_or(0.0);
                    prop_assert!(-diff <= pi + delta + 1e-9);
                }
            } else {
                prop_assert!(diff >= -1e-12);
            }
            prop_assert!(c1 * r.rho.abs() <= r.delta_weighted.abs() + 1e-15);
            prop_assert!(r.delta_weighted.abs() <= c2 * r.rho.abs() + 1e-15);
            if r.far_field {
                prop_assert_eq!(r.rho, 0.0);
            }
        }
    }

    #[test]
    fn lowering_sites_are_important(seed in any::<u64>()) {
        let m = model(0.5);
        let t = 6.0;
        let inputs = m.inputs(t).unwrap();
        let env = m.environment(t, seed, 0).unwrap();
        let (u, recs) = argmax_path_flips(&env, &inputs).unwrap();
        for r in recs.iter().filter(|r| r.u - r.sigma_u > 1e-9) {
            let delta = (0.1f64).min((r.u - r.sigma_u) / 2.0);
            let table = solve_value_above(&env, &inputs, u - delta - 1e-9).unwrap();
            let s = classify_importance(&table, &env, &SurveyParams::new(delta, 2)).unwrap();
            prop_assert!(s.is_important(r.site.coords()));
            prop_assert!(s.very_important.len() <= 1);
        }
    }

    #[test]
    fn path_scan_agrees_with_box_scan(seed in any::<u64>()) {
        let m = model(0.5);
        let t = 4.0;
        let inputs = m.inputs(t).unwrap();
        let env = m.environment(t, seed, 0).unwrap();
        let (u, recs) = argmax_path_flips(&env, &inputs).unwrap();
        prop_assert_eq!(u, solve_u(&env, &inputs).unwrap());
        let table = solve_value(&env, &inputs).unwrap();
        for j in env.bbox().sites().filter(|j| !env.is_b(j).unwrap()) {
            let full = flip_difference(&table, &env, &j).unwrap();
            match recs.iter().find(|r| r.site.coords() == j.as_slice()) {
                Some(r) => prop_assert!((r.sigma_u - full.sigma_u).abs() <= 1e-12),
                None => prop_assert_eq!(full.rho, 0.0),
            }
        }
    }

    #[test]
    fn hash_moves_by_at_most_one(m in 2usize..24, count in 0usize..600, up in any::<bool>()) {
        let h = build_shift_hash(m, 0.5).unwrap();
        let s = count % (m * m + 1);
        let s2 = if up { (s + 1).min(m * m) } else { s.saturating_sub(1) };
        prop_assert!((h.of_count(s) as i64 - h.of_count(s2) as i64).abs() <= 1);
        prop_assert!(h.of_count(s) < m);
    }
}

#[test]
fn uniformity_bound() {
    for m in [4, 8, 16, 32] {
        let h = build_shift_hash(m, 0.5).unwrap();
        assert!(h.max_probability() <= 3.0 / m as f64);
        assert!((h.distribution().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
