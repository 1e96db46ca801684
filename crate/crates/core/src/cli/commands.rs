use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::config::{RunConfig, SiteScan};
use super::{Command, Outcome};
use crate::env::{write_snapshot, Environment, LatticeBox};
use crate::error::Result;
use crate::fpp::{fpp_variance_curve, write_fpp_samples_csv};
use crate::influence::{
    argmax_path_flips, build_shift_hash, classify_importance, flip_difference, hash_order, write_survey_csv, SurveyParams,
};
use crate::solver::{backtrack_paths, solve_u, solve_value, solve_value_above, write_paths_jsonl};
use crate::variance::{effective_hamiltonian, run_campaign, sample_seed, talagrand_ratio, write_samples_csv};

struct Files<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Files<'_> {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.names.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            Ok(w.write_all(b"\n")?)
        })
    }
}

pub(crate) fn run(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let mut files = Files { dir, names: Vec::new() };
    let (lines, failure) = match cmd {
        Command::SampleEnv => (sample_env(cfg, &mut files)?, None),
        Command::Solve => (solve(cfg, &mut files)?, None),
        Command::Influence => (influence(cfg, &mut files)?, None),
        Command::Campaign => campaign(cfg, &mut files)?,
        Command::Fpp => (fpp(cfg, &mut files)?, None),
        Command::HashCheck => hash_check(cfg, &mut files)?,
    };
    Ok(Outcome { files: files.names, lines, failure })
}

/// The environment of campaign sample 0 at horizon `t`.
fn env_for(cfg: &RunConfig, t: f64) -> Result<Environment> {
    cfg.campaign.model.environment(t, sample_seed(cfg.campaign.base_seed, t, 0), 0)
}

fn sample_env(cfg: &RunConfig, files: &mut Files) -> Result<Vec<String>> {
    let model = &cfg.campaign.model;
    let env = match (&cfg.sample_env.lo, &cfg.sample_env.hi) {
        (Some(lo), Some(hi)) => {
            let t = cfg.solve.horizon;
            Environment::sample(
                LatticeBox::new(lo.clone(), hi.clone())?,
                model.alpha,
                model.levels()?,
                sample_seed(cfg.campaign.base_seed, t, 0),
            )?
        }
        _ => env_for(cfg, cfg.solve.horizon)?,
    };
    files.write("env.snapshot", |w| write_snapshot(w, &env))?;
    let summary = json!({
        "lo": env.bbox().lo(),
        "hi": env.bbox().hi(),
        "sites": env.bbox().len(),
        "a_sites": env.count_a(),
        "seed": env.seed(),
    });
    files.json("env.json", &summary)?;
    Ok(vec![format!("sites {} a-sites {} seed {}", env.bbox().len(), env.count_a(), env.seed())])
}

fn solve(cfg: &RunConfig, files: &mut Files) -> Result<Vec<String>> {
    let model = &cfg.campaign.model;
    let t = cfg.solve.horizon;
    let inputs = model.inputs(t)?;
    let env = env_for(cfg, t)?;
    let table = if cfg.solve.write_layers {
        solve_value(&env, &inputs)?
    } else {
        let u = solve_u(&env, &inputs)?;
        solve_value_above(&env, &inputs, u - cfg.solve.path_delta - 1e-9 * (1.0 + u.abs()))?
    };
    let u = table.u();
    // constant potential: u = g(x0) + t (K*(eta) - V)
    let constant = if model.alpha == 1.0 {
        Some(model.a)
    } else if model.alpha == 0.0 {
        Some(model.b)
    } else {
        None
    };
    let reference = constant.map(|v| {
        let g0: f64 = model.eta.iter().zip(model.start()).map(|(e, x)| e * x).sum();
        g0 + t * (inputs.kinetic.legendre(&model.eta) - v)
    });
    let paths = backtrack_paths(&table, &env, cfg.solve.path_delta, cfg.solve.max_paths)?;
    files.json(
        "value.json",
        &json!({
            "u": u,
            "u_over_t": u / t,
            "reference": reference,
            "env_seed": env.seed(),
            "paths": paths.paths.len(),
            "paths_truncated": paths.truncated,
            "table": table.header_json(),
        }),
    )?;
    if cfg.solve.write_layers {
        files.write("layers.f64", |w| table.write_layers(w))?;
    }
    files.write("paths.jsonl", |w| write_paths_jsonl(w, &paths.paths))?;
    let mut lines = vec![format!("u = {u}")];
    if let Some(r) = reference {
        lines.push(format!("reference = {r}"));
        lines.push(format!("abs error = {}", (u - r).abs()));
    }
    Ok(lines)
}

fn influence(cfg: &RunConfig, files: &mut Files) -> Result<Vec<String>> {
    let model = &cfg.campaign.model;
    let t = cfg.influence.horizon;
    let inputs = model.inputs(t)?;
    let env = env_for(cfg, t)?;
    let delta = cfg.influence.delta.unwrap_or(0.1 * (model.b - model.a));
    let (table, mut records) = match cfg.influence.sites {
        SiteScan::Path => {
            let (u, recs) = argmax_path_flips(&env, &inputs)?;
            (solve_value_above(&env, &inputs, u - delta - 1e-9 * (1.0 + u.abs()))?, recs)
        }
        SiteScan::Box => {
            let table = solve_value(&env, &inputs)?;
            let recs = env.bbox().sites().map(|j| flip_difference(&table, &env, &j)).collect::<Result<Vec<_>>>()?;
            (table, recs)
        }
    };
    let m = hash_order(t, cfg.campaign.zeta).max(1);
    let params = SurveyParams { max_paths: cfg.influence.max_paths, ..SurveyParams::new(delta, m) };
    let survey = classify_importance(&table, &env, &params)?;
    for r in &mut records {
        survey.annotate(r);
    }
    files.write("survey.csv", |w| write_survey_csv(w, env.seed(), survey.g_event, &records))?;
    let nonzero = records.iter().filter(|r| r.rho != 0.0).count();
    files.json(
        "summary.json",
        &json!({
            "u": table.u(),
            "records": records.len(),
            "nonzero_influence": nonzero,
            "max_abs_rho": records.iter().map(|r| r.rho.abs()).fold(0.0, f64::max),
            "survey": survey,
        }),
    )?;
    Ok(vec![format!(
        "u = {} flips {} nonzero {} important {} very important {}",
        table.u(),
        records.len(),
        nonzero,
        survey.important.len(),
        survey.very_important.len()
    )])
}

fn campaign(cfg: &RunConfig, files: &mut Files) -> Result<(Vec<String>, Option<String>)> {
    let res = run_campaign(&cfg.campaign)?;
    files.write("samples.csv", |w| write_samples_csv(w, &res.samples))?;
    files.json("curve.json", &res)?;
    files.write("plot.csv", |w| res.curve.write_plot_csv(w))?;
    let mut lines: Vec<String> = res
        .curve
        .points
        .iter()
        .map(|p| format!("t = {} var = {} [{}, {}] var/t = {}", p.t, p.variance, p.ci_lo, p.ci_hi, p.ratio()))
        .collect();
    if let Some(g) = &res.curve.fits {
        lines.push(format!("model {} kappa = {} [{}, {}]", g.selected.key(), g.kappa, g.kappa_ci_lo, g.kappa_ci_hi));
    }
    if res.budget_exceeded {
        return Ok((lines, Some("campaign budget exceeded; partial results written".into())));
    }
    if cfg.report.talagrand {
        let rep = talagrand_ratio(&cfg.campaign)?;
        for p in &rep.points {
            lines.push(format!("t = {} C_fit = {} [{}, {}]", p.t, p.c_fit, p.c_fit_ci_lo, p.c_fit_ci_hi));
        }
        files.json("talagrand.json", &rep)?;
    }
    if !cfg.report.hamiltonian_etas.is_empty() {
        let est = effective_hamiltonian(&cfg.campaign, &cfg.report.hamiltonian_etas)?;
        files.json("hamiltonian.json", &est)?;
    }
    Ok((lines, None))
}

fn fpp(cfg: &RunConfig, files: &mut Files) -> Result<Vec<String>> {
    let res = fpp_variance_curve(&cfg.fpp)?;
    files.write("fpp_samples.csv", |w| write_fpp_samples_csv(w, &res.samples))?;
    files.json("fpp_curve.json", &res)?;
    files.write("fpp_plot.csv", |w| res.curve.write_plot_csv(w))?;
    let mut lines: Vec<String> = res
        .curve
        .points
        .iter()
        .map(|p| format!("|v| = {} var = {} [{}, {}] var/|v| = {}", p.t, p.variance, p.ci_lo, p.ci_hi, p.ratio()))
        .collect();
    lines.push(format!("ratio non-increasing within CI: {}", res.curve.ratio_non_increasing()));
    Ok(lines)
}

#[derive(Serialize)]
struct HashRow {
    m: usize,
    distribution: Vec<f64>,
    max_probability: f64,
    bound: f64,
    uniform_ok: bool,
    flips_checked: usize,
    exhaustive: bool,
    lipschitz_violations: usize,
}

fn hash_check(cfg: &RunConfig, files: &mut Files) -> Result<(Vec<String>, Option<String>)> {
    let hc = &cfg.hash_check;
    let mut rows = Vec::new();
    for &m in &hc.m_values {
        let hash = build_shift_hash(m, hc.alpha)?;
        let len = hash.block_len();
        let mut checked = 0;
        let mut violations = 0;
        let mut check = |bits: &mut Vec<bool>, i: usize| {
            let before = hash.hash_block(bits) as i64;
            bits[i] = !bits[i];
            let after = hash.hash_block(bits) as i64;
            bits[i] = !bits[i];
            checked += 1;
            if (before - after).abs() > 1 {
                violations += 1;
            }
        };
        let exhaustive = len <= 16;
        if exhaustive {
            for mask in 0u32..(1 << len) {
                let mut bits: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
                for i in 0..len {
                    check(&mut bits, i);
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(hc.seed, m as f64, 0));
            for _ in 0..hc.random_flips {
                let mut bits: Vec<bool> = (0..len).map(|_| rng.random::<f64>() >= hc.alpha).collect();
                let i = rng.random_range(0..len);
                check(&mut bits, i);
            }
        }
        let bound = 3.0 / m as f64;
        rows.push(HashRow {
            m,
            distribution: hash.distribution().to_vec(),
            max_probability: hash.max_probability(),
            bound,
            uniform_ok: hash.max_probability() <= bound,
            flips_checked: checked,
            exhaustive,
            lipschitz_violations: violations,
        });
    }
    files.json("hash_check.json", &json!({"alpha": hc.alpha, "rows": rows}))?;
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "m = {} max P = {:.6} (3/m = {:.6}) flips {} violations {}",
                r.m, r.max_probability, r.bound, r.flips_checked, r.lipschitz_violations
            )
        })
        .collect();
    let failure = rows.iter().any(|r| r.lipschitz_violations > 0).then(|| "single-flip Lipschitz property violated".to_string());
    Ok((lines, failure))
}
