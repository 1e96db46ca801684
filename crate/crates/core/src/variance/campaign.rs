//! Monte Carlo estimation of `var(u(t, x0))` over independent environments.

use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::CampaignConfig;
use super::fit::{log_trend, Trend};
use super::seed::{sample_seed, stream_seed, TAG_BOOTSTRAP, TAG_SHIFT_BITS, TAG_SHIFT_FLIP, TAG_TREND};
use super::stats::{bootstrap, mean, CurvePoint, VarianceCurve};
use crate::env::Environment;
use crate::error::Result;
use crate::influence::{build_shift_hash, classify_importance, hash_order, shifted_value, ShiftBits, ShiftHash, SurveyParams};
use crate::solver::{solve_u, solve_value_above, SolverInputs};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveySummary {
    pub important: usize,
    pub very_important: usize,
    pub g_event: bool,
    pub max_lambda: usize,
    pub partial: bool,
    pub nested: Option<bool>,
}

/// One environment at one horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub t: f64,
    pub index: usize,
    pub seed: u64,
    pub u: f64,
    /// Value in the randomly shifted environment.
    pub u_tilde: Option<f64>,
    pub shift: Option<Vec<i64>>,
    /// Half the change in `u_tilde` when one auxiliary bit is flipped.
    pub shift_rho: Option<f64>,
    pub survey: Option<SurveySummary>,
}

/// Shift diagnostics per horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftPoint {
    pub t: f64,
    pub m: usize,
    pub max_abs_diff: f64,
    /// `max |u - u_tilde| / t^zeta`
    pub scaled_max: f64,
    pub mean_abs_diff: f64,
    /// `d m^2 E[rho^2]` for single auxiliary-bit flips.
    pub shift_term: f64,
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyPoint {
    pub t: f64,
    pub mean_important: f64,
    pub very_important_rate: f64,
    pub g_event_rate: f64,
    pub max_lambda: usize,
    pub partial: usize,
    pub nesting_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub curve: VarianceCurve,
    pub shift: Vec<ShiftPoint>,
    /// Trend of `scaled_max` across horizons.
    pub shift_trend: Option<Trend>,
    pub survey: Vec<SurveyPoint>,
    /// Horizons after the budget ran out are missing; a horizon cut short keeps
    /// its finished samples but has no curve point.
    pub budget_exceeded: bool,
    #[serde(skip)]
    pub samples: Vec<SampleRecord>,
}

struct Horizon<'a> {
    cfg: &'a CampaignConfig,
    t: f64,
    hash: Option<ShiftHash>,
    m: usize,
}

impl Horizon<'_> {
    fn sample(&self, index: usize) -> Result<SampleRecord> {
        let cfg = self.cfg;
        let seed = sample_seed(cfg.base_seed, self.t, index as u64);
        let inputs = cfg.model.inputs(self.t)?;
        let margin = self.hash.as_ref().map_or(0, |h| h.m() as i64 - 1);
        let env = cfg.model.environment(self.t, seed, margin)?;
        let u = solve_u(&env, &inputs)?;
        let mut rec = SampleRecord { t: self.t, index, seed, u, u_tilde: None, shift: None, shift_rho: None, survey: None };
        if let Some(hash) = &self.hash {
            let (ut, z, rho) = shift_probe(&env, hash, &inputs, cfg.model.alpha, seed)?;
            rec.u_tilde = Some(ut);
            rec.shift = Some(z);
            rec.shift_rho = Some(rho);
        }
        if cfg.influence_survey {
            let delta = cfg.survey_delta();
            let table = solve_value_above(&env, &inputs, u - delta)?;
            let s = classify_importance(&table, &env, &SurveyParams::new(delta, self.m))?;
            rec.survey = Some(SurveySummary {
                important: s.important.len(),
                very_important: s.very_important.len(),
                g_event: s.g_event,
                max_lambda: s.max_lambda(),
                partial: s.partial,
                nested: s.nested,
            });
        }
        Ok(rec)
    }
}

/// `(u_tilde, shift, rho)` where `rho` is half the change in `u_tilde` after
/// flipping one auxiliary bit chosen from `seed`.
pub(crate) fn shift_probe(
    env: &Environment,
    hash: &ShiftHash,
    inputs: &SolverInputs,
    alpha: f64,
    seed: u64,
) -> Result<(f64, Vec<i64>, f64)> {
    let d = env.dim();
    let mut bits = ShiftBits::sample(hash.m(), d, alpha, stream_seed(seed, TAG_SHIFT_BITS));
    let (ut, z) = shifted_value(env, hash, &bits, inputs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, TAG_SHIFT_FLIP));
    let axis = rng.random_range(0..d);
    let bit = rng.random_range(0..hash.block_len());
    bits.blocks[axis][bit] ^= true;
    let ut2 = if hash.shift(&bits) == z { ut } else { shifted_value(env, hash, &bits, inputs)?.0 };
    Ok((ut, z, (ut2 - ut) / 2.0))
}

fn shift_point(cfg: &CampaignConfig, t: f64, m: usize, recs: &[SampleRecord]) -> ShiftPoint {
    let diffs: Vec<f64> = recs.iter().filter_map(|r| r.u_tilde.map(|ut| (r.u - ut).abs())).collect();
    let rho2: Vec<f64> = recs.iter().filter_map(|r| r.shift_rho.map(|x| x * x)).collect();
    let scale = t.powf(cfg.zeta);
    let max = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    let seed = stream_seed(sample_seed(cfg.base_seed, t, u64::MAX), TAG_TREND);
    let replicates = bootstrap(&diffs, cfg.bootstrap_resamples, seed, |xs| max(xs) / scale);
    ShiftPoint {
        t,
        m,
        max_abs_diff: max(&diffs),
        scaled_max: max(&diffs) / scale,
        mean_abs_diff: mean(&diffs),
        shift_term: (cfg.model.dim() * m * m) as f64 * mean(&rho2),
        replicates,
    }
}

fn survey_point(t: f64, recs: &[SampleRecord]) -> SurveyPoint {
    let s: Vec<&SurveySummary> = recs.iter().filter_map(|r| r.survey.as_ref()).collect();
    let n = s.len().max(1) as f64;
    SurveyPoint {
        t,
        mean_important: s.iter().map(|x| x.important as f64).sum::<f64>() / n,
        very_important_rate: s.iter().filter(|x| x.very_important > 0).count() as f64 / n,
        g_event_rate: s.iter().filter(|x| x.g_event).count() as f64 / n,
        max_lambda: s.iter().map(|x| x.max_lambda).max().unwrap_or(0),
        partial: s.iter().filter(|x| x.partial).count(),
        nesting_failures: s.iter().filter(|x| x.nested == Some(false)).count(),
    }
}

/// Runs every horizon in ascending order; deterministic given the config
/// unless the budget cuts it short.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let clock = Instant::now();
    let budget = cfg.budget_seconds;
    let over = AtomicBool::new(false);
    let mut points = Vec::new();
    let mut shift = Vec::new();
    let mut survey = Vec::new();
    let mut samples = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for &t in &cfg.horizons {
        if let (Some(b), Some((pt, secs))) = (budget, last) {
            let est = secs * (t / pt).powi(cfg.model.dim() as i32 + 1);
            if clock.elapsed().as_secs_f64() + est > b {
                over.store(true, Ordering::Relaxed);
                break;
            }
        }
        let started = clock.elapsed().as_secs_f64();
        let m = hash_order(t, cfg.zeta);
        let hash = if cfg.shift_averaging { Some(build_shift_hash(m, cfg.model.alpha)?) } else { None };
        let h = Horizon { cfg, t, hash, m };
        let recs: Vec<Option<SampleRecord>> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                if budget.is_some_and(|b| clock.elapsed().as_secs_f64() > b) {
                    over.store(true, Ordering::Relaxed);
                    return Ok(None);
                }
                h.sample(i).map(Some)
            })
            .collect::<Result<_>>()?;
        let complete = recs.iter().all(Option::is_some);
        let recs: Vec<SampleRecord> = recs.into_iter().flatten().collect();
        if complete {
            let us: Vec<f64> = recs.iter().map(|r| r.u).collect();
            let seed = stream_seed(sample_seed(cfg.base_seed, t, u64::MAX), TAG_BOOTSTRAP);
            points.push(CurvePoint::from_samples(t, &us, cfg.bootstrap_resamples, seed)?);
            if cfg.shift_averaging {
                shift.push(shift_point(cfg, t, m, &recs));
            }
            if cfg.influence_survey {
                survey.push(survey_point(t, &recs));
            }
        }
        samples.extend(recs);
        last = Some((t, clock.elapsed().as_secs_f64() - started));
        if !complete {
            break;
        }
    }
    let shift_trend = if shift.len() >= 2 {
        let ts: Vec<f64> = shift.iter().map(|s| s.t).collect();
        let vs: Vec<f64> = shift.iter().map(|s| s.scaled_max).collect();
        let reps: Vec<Vec<f64>> = shift.iter().map(|s| s.replicates.clone()).collect();
        log_trend(&ts, &vs, &reps).ok()
    } else {
        None
    };
    Ok(CampaignResult {
        config: cfg.clone(),
        curve: VarianceCurve::new(points),
        shift,
        shift_trend,
        survey,
        budget_exceeded: over.load(Ordering::Relaxed),
        samples,
    })
}

/// Per-sample CSV.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[SampleRecord]) -> Result<()> {
    writeln!(w, "t,index,seed,u,u_tilde,shift_rho,important,very_important,g_event,max_lambda")?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in samples {
        let (imp, vimp, g, lam) = match &r.survey {
            Some(s) => (s.important.to_string(), s.very_important.to_string(), (s.g_event as u8).to_string(), s.max_lambda.to_string()),
            None => Default::default(),
        };
        writeln!(w, "{},{},{},{},{},{},{},{},{},{}", r.t, r.index, r.seed, r.u, opt(r.u_tilde), opt(r.shift_rho), imp, vimp, g, lam)?;
    }
    Ok(())
}
