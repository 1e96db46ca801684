//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use hjb_variance::fpp::{box_distance, brute_force_distance, fpp_distance, fpp_variance_curve, required_box, EdgeEnvironment, FppConfig};
use hjb_variance::influence::{build_shift_hash, flip_difference, talagrand_sum_weighted, ShiftBits};
use hjb_variance::solver::{
    backtrack_paths, brute_force_value, check_cost_bounds, check_finite_speed, solve_u, solve_value, KineticCost, LeastKinetic, Payoff,
    SolverInputs, SolverParams, Stencil,
};
use hjb_variance::variance::{run_campaign, talagrand_ratio, CampaignConfig};
use hjb_variance::{Environment, LatticeBox, Levels, SiteIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_CASES: usize = 100;
const ORACLE_SECONDS: f64 = 60.0;
const HOPF_LAX_TOL: f64 = 0.05;
const HOPF_LAX_SECONDS: f64 = 120.0;
const BOUND_CASES: usize = 500;
const FLIP_PAIRS: usize = 1000;
const FLIP_TOL: f64 = 1e-12;
const TALAGRAND_TOL: f64 = 1e-15;
const HASH_FLIPS: usize = 10_000;
const HASH_SECONDS: f64 = 60.0;
const SHIFT_SAMPLES: usize = 200;
const VARIANCE_SAMPLES: usize = 2000;
const VARIANCE_SECONDS: f64 = 1800.0;
const KAPPA_MAX: f64 = 1.0;
const RATIO_SAMPLES: usize = 400;
const FPP_BRUTE_CASES: usize = 50;
const FPP_FLIP_TRIALS: usize = 1000;
const FPP_SAMPLES: usize = 2000;

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn levels() -> Levels {
    Levels::new(0.0, 1.0).unwrap()
}

fn small_inputs(t: f64, h: f64, q: usize, eta: Vec<f64>) -> SolverInputs {
    SolverInputs::new(Payoff::linear(eta), KineticCost::quadratic(), SolverParams::new(t, h, q, vec![0.0, 0.0]))
}

fn c1_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_CASES {
        let t = rng.random_range(3..=5) as f64;
        let eta = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let inputs = small_inputs(t, 1.0, 1, eta);
        let env = Environment::sample(inputs.grid().unwrap().required_box(), rng.random_range(0.2..0.8), levels(), rng.random()).unwrap();
        let dp = solve_value(&env, &inputs).unwrap().u();
        worst = worst.max((dp - brute_force_value(&env, &inputs).unwrap()).abs());
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        worst <= ORACLE_TOL && secs < ORACLE_SECONDS,
        format!("{ORACLE_CASES} instances, max |dp - brute| = {worst:.1e} (tol {ORACLE_TOL:.0e}), {secs:.1} s"),
    )
}

fn c2_hopf_lax() -> Outcome {
    let clock = Instant::now();
    let t = 32.0;
    let err = |h: f64| {
        let inputs = small_inputs(t, h, 5, vec![1.0, 0.0]);
        let env = Environment::sample(inputs.grid().unwrap().required_box(), 1.0, levels(), 0).unwrap();
        (solve_u(&env, &inputs).unwrap() / t - 0.5).abs()
    };
    let (e1, e2) = (err(0.5), err(0.25));
    let secs = clock.elapsed().as_secs_f64();
    check(
        e1 <= HOPF_LAX_TOL && e2 <= HOPF_LAX_TOL / 2.0 && secs < HOPF_LAX_SECONDS,
        format!("|u/t - 1/2| = {e1:.2e} at h = 0.5 (tol {HOPF_LAX_TOL}), {e2:.2e} at h = 0.25 (tol {}), {secs:.1} s", HOPF_LAX_TOL / 2.0),
    )
}

fn c3_path_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut paths = 0;
    let mut violations = 0;
    for _ in 0..BOUND_CASES {
        let t = rng.random_range(3..=6) as f64;
        let (h, q) = if rng.random_bool(0.5) { (1.0, 1) } else { (0.5, 2) };
        let eta = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let inputs = small_inputs(t, h, q, eta);
        let grid = inputs.grid().unwrap();
        let env = Environment::sample(grid.required_box(), rng.random_range(0.2..0.8), levels(), rng.random()).unwrap();
        let delta = rng.random_range(0.0..1.0);
        let table = solve_value(&env, &inputs).unwrap();
        let set = backtrack_paths(&table, &env, delta, 100).unwrap();
        let least = LeastKinetic::new(&grid, &Stencil::new(&grid, &inputs.kinetic), grid.steps);
        let radius = inputs.finite_speed(levels()).unwrap().radius;
        for p in &set.paths {
            paths += 1;
            violations += check_cost_bounds(p, levels(), &inputs.kinetic, &least, delta).len();
            violations += check_finite_speed(p, radius).len();
        }
    }
    check(violations == 0 && paths > 0, format!("{BOUND_CASES} instances, {paths} paths, {violations} violations"))
}

fn c4_flips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut pairs = 0;
    let mut far = 0;
    let mut bad = BTreeMap::<&str, usize>::new();
    while pairs < FLIP_PAIRS {
        let t = rng.random_range(3..=5) as f64;
        let alpha = rng.random_range(0.2..0.8);
        let beta = 1.0 - alpha;
        let inputs = small_inputs(t, 1.0, 1, vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        let rt = inputs.finite_speed(levels()).unwrap().radius * t;
        let need = inputs.grid().unwrap().required_box();
        let pad = rt.ceil() as i64 + 2;
        let wide = LatticeBox::new(need.lo().iter().map(|v| v - pad).collect(), need.hi().iter().map(|v| v + pad).collect()).unwrap();
        let env = Environment::sample(wide, alpha, levels(), rng.random()).unwrap();
        let table = solve_value(&env, &inputs).unwrap();
        let u = table.u();
        for _ in 0..10 {
            let j: Vec<i64> = (0..2).map(|i| rng.random_range(env.bbox().lo()[i]..env.bbox().hi()[i])).collect();
            let r = flip_difference(&table, &env, &j).unwrap();
            let oracle = solve_u(&env.flip_site(&j).unwrap(), &inputs).unwrap();
            pairs += 1;
            let mut fail = |k| *bad.entry(k).or_default() += 1;
            if (r.sigma_u - oracle).abs() > FLIP_TOL {
                fail("sparse != full re-solve");
            }
            if !r.omega_is_b && oracle > u + FLIP_TOL {
                fail("monotonicity");
            }
            if (u - oracle).abs() > levels().gap() * t + FLIP_TOL {
                fail("|u - sigma u| <= (b-a) t");
            }
            if r.far_field {
                far += 1;
                if oracle != u {
                    fail("far field");
                }
            }
            let (c1, c2) = ((2.0 * alpha).min(2.0 * beta), (2.0 * alpha).max(2.0 * beta));
            let (rho, delta) = (r.rho.abs(), r.delta_weighted.abs());
            if c1 * rho > delta + FLIP_TOL || delta > c2 * rho + FLIP_TOL {
                fail("delta/rho comparison");
            }
        }
    }
    let total: usize = bad.values().sum();
    check(total == 0 && far > 0, format!("{pairs} pairs ({far} far-field), violations {total} {bad:?}"))
}

fn c5_two_point() -> Outcome {
    // f = 1{omega_0 = b} under alpha = 1/2: two equally likely outcomes
    let f = [0.0, 1.0];
    let w = [0.5, 0.5];
    let mean: f64 = f.iter().zip(&w).map(|(x, p)| x * p).sum();
    let var: f64 = f.iter().zip(&w).map(|(x, p)| p * (x - mean) * (x - mean)).sum();
    let mut rho = BTreeMap::new();
    rho.insert(SiteIndex::new(vec![0, 0]), f.iter().map(|x| ((1.0 - x) - x) / 2.0).collect::<Vec<f64>>());
    let sum = talagrand_sum_weighted(&rho, &w).unwrap().total;
    check(
        (sum - 0.25).abs() <= TALAGRAND_TOL && (sum - var).abs() <= TALAGRAND_TOL,
        format!("sum = {sum}, var f = {var} (tol {TALAGRAND_TOL:.0e})"),
    )
}

fn c6_hash() -> Outcome {
    let clock = Instant::now();
    let mut worst = Vec::new();
    let mut uniform = true;
    for m in [4, 8, 16, 32] {
        let h = build_shift_hash(m, 0.5).unwrap();
        uniform &= h.max_probability() <= 3.0 / m as f64;
        worst.push(format!("m={m}: {:.4}<={:.4}", h.max_probability(), 3.0 / m as f64));
    }
    let lipschitz = |old: &[i64], new: &[i64]| {
        let moved: Vec<i64> = old.iter().zip(new).map(|(a, b)| (a - b).abs()).collect();
        moved.iter().filter(|&&v| v != 0).count() <= 1 && moved.iter().all(|&v| v <= 1)
    };
    let mut flips = 0;
    let mut violations = 0;
    let h2 = build_shift_hash(2, 0.5).unwrap();
    for mask in 0u32..256 {
        let bits = ShiftBits { blocks: (0..2).map(|b| (0..4).map(|i| mask >> (4 * b + i) & 1 == 1).collect()).collect() };
        let z = h2.shift(&bits);
        for b in 0..2 {
            for i in 0..4 {
                let mut f = bits.clone();
                f.blocks[b][i] = !f.blocks[b][i];
                flips += 1;
                violations += !lipschitz(&z, &h2.shift(&f)) as usize;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for m in [4, 8, 16, 32] {
        let h = build_shift_hash(m, 0.5).unwrap();
        for _ in 0..HASH_FLIPS {
            let bits = ShiftBits::sample(m, 2, 0.5, rng.random());
            let mut f = bits.clone();
            let (b, i) = (rng.random_range(0..2), rng.random_range(0..m * m));
            f.blocks[b][i] = !f.blocks[b][i];
            flips += 1;
            violations += !lipschitz(&h.shift(&bits), &h.shift(&f)) as usize;
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        uniform && violations == 0 && secs < HASH_SECONDS,
        format!("{}; {flips} flips, {violations} violations, {secs:.1} s", worst.join(" ")),
    )
}

fn c7_shift() -> Outcome {
    let cfg =
        CampaignConfig { horizons: vec![8.0, 16.0, 32.0], samples: SHIFT_SAMPLES, shift_averaging: true, ..CampaignConfig::default() };
    let res = run_campaign(&cfg).unwrap();
    let per: Vec<String> = res.shift.iter().map(|s| format!("t={} m={} {:.3}", s.t, s.m, s.scaled_max)).collect();
    match &res.shift_trend {
        Some(tr) => check(
            !tr.increasing,
            format!("max |u - u~|/t^zeta: {}; log-slope {:.3} [{:.3}, {:.3}]", per.join(", "), tr.slope, tr.ci_lo, tr.ci_hi),
        ),
        None => check(false, "no shift trend computed".into()),
    }
}

fn c8_variance() -> Outcome {
    let clock = Instant::now();
    let cfg = CampaignConfig {
        horizons: vec![8.0, 16.0, 32.0, 64.0],
        samples: VARIANCE_SAMPLES,
        budget_seconds: Some(VARIANCE_SECONDS),
        ..CampaignConfig::default()
    };
    let res = run_campaign(&cfg).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let per: Vec<String> =
        res.curve.points.iter().map(|p| format!("t={} var/t={:.4} [{:.4}, {:.4}]", p.t, p.ratio(), p.ci_lo / p.t, p.ci_hi / p.t)).collect();
    let ratio_ok = res.curve.ratio_non_increasing();
    let Some(g) = &res.curve.fits else {
        return check(false, format!("no growth fit ({:?}), budget exceeded {}", res.curve.fit_error, res.budget_exceeded));
    };
    check(
        !res.budget_exceeded && ratio_ok && g.kappa_ci_hi <= KAPPA_MAX && secs < VARIANCE_SECONDS,
        format!(
            "{}; (i) non-increasing {ratio_ok}; (ii) kappa = {:.3} [{:.3}, {:.3}] <= {KAPPA_MAX} ({}), selected {}; {secs:.0} s",
            per.join(", "),
            g.kappa,
            g.kappa_ci_lo,
            g.kappa_ci_hi,
            g.kappa_ci_method,
            g.selected.key()
        ),
    )
}

fn c9_ratio() -> Outcome {
    let cfg = CampaignConfig { horizons: vec![8.0, 16.0, 32.0], samples: RATIO_SAMPLES, ..CampaignConfig::default() };
    let rep = talagrand_ratio(&cfg).unwrap();
    let per: Vec<String> =
        rep.points.iter().map(|p| format!("t={} C_fit={:.3} [{:.3}, {:.3}]", p.t, p.c_fit, p.c_fit_ci_lo, p.c_fit_ci_hi)).collect();
    let Some(tr) = &rep.trend else {
        return check(false, format!("{}; no trend computed", per.join(", ")));
    };
    check(
        !tr.increasing && rep.points.iter().all(|p| p.c_fit.is_finite()),
        format!("{}; log-slope {:.3} [{:.3}, {:.3}]", per.join(", "), tr.slope, tr.ci_lo, tr.ci_hi),
    )
}

fn c10_fpp() -> Outcome {
    let lv = Levels::new(1.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut mismatches = 0;
    for _ in 0..FPP_BRUTE_CASES {
        let env = EdgeEnvironment::sample(LatticeBox::new(vec![0, 0], vec![4, 4]).unwrap(), 0.5, lv, rng.random()).unwrap();
        let x = [rng.random_range(0..4), rng.random_range(0..4)];
        let y = [rng.random_range(0..4), rng.random_range(0..4)];
        mismatches += (box_distance(&env, &x, &y).unwrap().distance != brute_force_distance(&env, &x, &y).unwrap()) as usize;
    }
    let mut flip_bad = 0;
    for _ in 0..FPP_FLIP_TRIALS {
        let v = [rng.random_range(2..24), 0];
        let env = EdgeEnvironment::sample(required_box(&[0, 0], &v, lv).unwrap(), 0.5, lv, rng.random()).unwrap();
        let edges: Vec<_> = env.edges().collect();
        let e = &edges[rng.random_range(0..edges.len())];
        let d = fpp_distance(&env, &v).unwrap().distance;
        let s = fpp_distance(&env.flip_edge(e).unwrap(), &v).unwrap().distance;
        flip_bad += ((d - s).abs() > lv.gap() + 1e-12) as usize;
    }
    let res = fpp_variance_curve(&FppConfig { samples: FPP_SAMPLES, ..FppConfig::default() }).unwrap();
    let per: Vec<String> = res.curve.points.iter().map(|p| format!("|v|={} var/|v|={:.4}", p.t, p.ratio())).collect();
    let trend = res.curve.ratio_non_increasing();
    check(
        mismatches == 0 && flip_bad == 0 && trend,
        format!(
            "{FPP_BRUTE_CASES} brute-force boxes, {mismatches} mismatches; {FPP_FLIP_TRIALS} flips, {flip_bad} over b-a; {}; non-increasing {trend}",
            per.join(", ")
        ),
    )
}

fn c11_reproducible() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let args = [
        "hjvar",
        "campaign",
        "--set",
        "campaign.samples=100",
        "--set",
        "campaign.horizons=[8,16]",
        "--set",
        "campaign.shift_averaging=true",
        "--set",
        "campaign.influence_survey=true",
        "--out",
        first.to_str().unwrap(),
    ];
    let c1 = hjb_variance::cli::run(args);
    let manifest = first.join("manifest.json");
    let c2 = hjb_variance::cli::run(["hjvar", "campaign", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    let m: Value = serde_json::from_slice(&fs::read(&manifest).unwrap()).unwrap();
    let mut files: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string()).collect();
    files.push("config.resolved.json".into());
    let differing: Vec<&String> = files.iter().filter(|f| fs::read(first.join(f)).ok() != fs::read(second.join(f)).ok()).collect();
    check(
        c1 == 0 && c2 == 0 && differing.is_empty(),
        format!("exit codes {c1}/{c2}; {} files compared, differing {differing:?}", files.len()),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("C1", "oracle equivalence", c1_oracle),
        ("C2", "Hopf-Lax consistency", c2_hopf_lax),
        ("C3", "path cost and finite-speed bounds", c3_path_bounds),
        ("C4", "flip influence", c4_flips),
        ("C5", "two-point influence sum", c5_two_point),
        ("C6", "shift hash", c6_hash),
        ("C7", "shift closeness", c7_shift),
        ("C8", "variance sublinearity", c8_variance),
        ("C9", "variance / influence-sum ratio", c9_ratio),
        ("C10", "FPP cross-check", c10_fpp),
        ("C11", "reproducibility from manifest", c11_reproducible),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('C')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let clock = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as usize;
        println!("[{tag}] {id} {name}: {} ({:.1} s)", o.detail, clock.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
