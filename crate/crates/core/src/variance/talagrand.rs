//! Empirical `var(u)` against the empirical Talagrand sum, per horizon.
//!
//! Influences are measured on the `a`-sites of the argmax path only. For a
//! site with value `b` the flipped configuration has value `a` at the same
//! site, so `E[g(rho_j)] = E[g(rho_j) 1{omega_j = a}] / alpha` for any `g`,
//! and `a`-sites off every optimal path have zero influence.

use rayon::prelude::*;
use serde::Serialize;

use super::campaign::shift_probe;
use super::config::CampaignConfig;
use super::fit::{log_trend, Trend};
use super::seed::{sample_seed, stream_seed, TAG_BOOTSTRAP};
use super::stats::{mean, percentile_ci, unbiased_variance};
use crate::env::SiteIndex;
use crate::error::{Error, Result};
use crate::influence::{argmax_path_flips, build_shift_hash, hash_order, talagrand_from_moments, TalagrandSum};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TalagrandPoint {
    pub t: f64,
    pub n: usize,
    pub variance: f64,
    pub sum: f64,
    /// `var / sum`
    pub c_fit: f64,
    pub c_fit_ci_lo: f64,
    pub c_fit_ci_hi: f64,
    /// Sites with a nonzero influence in some sample.
    pub sites: usize,
    /// `d m^2 E[rho^2]` for auxiliary-bit flips of the shifted value.
    pub shift_term: Option<f64>,
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TalagrandReport {
    pub points: Vec<TalagrandPoint>,
    /// Log-log slope of `c_fit` across horizons.
    pub trend: Option<Trend>,
}

struct EnvInfluence {
    u: f64,
    /// `(site slot, rho)`
    rho: Vec<(usize, f64)>,
    shift_rho: Option<f64>,
}

fn sum_from(slots: &[SiteIndex], envs: &[&EnvInfluence], alpha: f64) -> TalagrandSum {
    let n = envs.len() as f64;
    let mut second = vec![0.0; slots.len()];
    let mut first = vec![0.0; slots.len()];
    for e in envs {
        for &(s, r) in &e.rho {
            second[s] += r * r;
            first[s] += r.abs();
        }
    }
    let w = 1.0 / (n * alpha);
    talagrand_from_moments(slots.iter().enumerate().map(|(i, j)| (j.clone(), second[i] * w, first[i] * w)))
}

/// `(u, a-site influences, shift influence)` before site slots are assigned.
type RawInfluence = (f64, Vec<(SiteIndex, f64)>, Option<f64>);

fn horizon(cfg: &CampaignConfig, t: f64) -> Result<TalagrandPoint> {
    let inputs = cfg.model.inputs(t)?;
    let m = hash_order(t, cfg.zeta);
    let hash = if cfg.shift_averaging { Some(build_shift_hash(m, cfg.model.alpha)?) } else { None };
    let margin = hash.as_ref().map_or(0, |h| h.m() as i64 - 1);
    let raw: Vec<RawInfluence> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let seed = sample_seed(cfg.base_seed, t, i as u64);
            let env = cfg.model.environment(t, seed, margin)?;
            let (u, recs) = argmax_path_flips(&env, &inputs)?;
            let shift_rho = match &hash {
                Some(h) => Some(shift_probe(&env, h, &inputs, cfg.model.alpha, seed)?.2),
                None => None,
            };
            let rho = recs.into_iter().filter(|r| r.rho != 0.0).map(|r| (r.site, r.rho)).collect();
            Ok((u, rho, shift_rho))
        })
        .collect::<Result<_>>()?;
    let mut slots: Vec<SiteIndex> = raw.iter().flat_map(|r| r.1.iter().map(|x| x.0.clone())).collect();
    slots.sort();
    slots.dedup();
    let envs: Vec<EnvInfluence> = raw
        .into_iter()
        .map(|(u, rho, shift_rho)| EnvInfluence {
            u,
            rho: rho.into_iter().map(|(j, r)| (slots.binary_search(&j).expect("collected"), r)).collect(),
            shift_rho,
        })
        .collect();
    let alpha = cfg.model.alpha;
    let us: Vec<f64> = envs.iter().map(|e| e.u).collect();
    let variance = unbiased_variance(&us);
    let all: Vec<&EnvInfluence> = envs.iter().collect();
    let sum = sum_from(&slots, &all, alpha).total;
    if !(sum > 0.0) {
        return Err(Error::Degenerate(format!("t = {t}: Talagrand sum is zero")));
    }
    let seed = stream_seed(sample_seed(cfg.base_seed, t, u64::MAX - 1), TAG_BOOTSTRAP);
    let idx: Vec<f64> = (0..envs.len()).map(|i| i as f64).collect();
    // resample environment indices; each replicate recomputes both sides
    let replicates: Vec<f64> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = idx.len();
        (0..cfg.bootstrap_resamples)
            .map(|_| {
                let pick: Vec<&EnvInfluence> = (0..n).map(|_| &envs[rng.random_range(0..n)]).collect();
                let v = unbiased_variance(&pick.iter().map(|e| e.u).collect::<Vec<_>>());
                v / sum_from(&slots, &pick, alpha).total
            })
            .collect()
    };
    let c_fit = variance / sum;
    let (lo, hi) = percentile_ci(&replicates, 0.95);
    let shift_term = hash.map(|_| {
        let r2: Vec<f64> = envs.iter().filter_map(|e| e.shift_rho.map(|x| x * x)).collect();
        (cfg.model.dim() * m * m) as f64 * mean(&r2)
    });
    Ok(TalagrandPoint {
        t,
        n: envs.len(),
        variance,
        sum,
        c_fit,
        c_fit_ci_lo: lo.min(c_fit),
        c_fit_ci_hi: hi.max(c_fit),
        sites: slots.len(),
        shift_term,
        replicates,
    })
}

/// `C_fit = var(u) / sum_j ||rho_j u||_2^2 / (1 + log(||rho_j u||_2 / ||rho_j u||_1))`
/// for every configured horizon, with a bootstrap trend test.
pub fn talagrand_ratio(cfg: &CampaignConfig) -> Result<TalagrandReport> {
    cfg.validate()?;
    if !(cfg.model.alpha > 0.0 && cfg.model.alpha < 1.0) {
        return Err(Error::Config { key: "model.alpha".into(), msg: "Talagrand ratio needs 0 < alpha < 1".into() });
    }
    let points = cfg.horizons.iter().map(|&t| horizon(cfg, t)).collect::<Result<Vec<_>>>()?;
    let trend = if points.len() >= 2 {
        let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
        let cs: Vec<f64> = points.iter().map(|p| p.c_fit).collect();
        let reps: Vec<Vec<f64>> = points.iter().map(|p| p.replicates.clone()).collect();
        log_trend(&ts, &cs, &reps).ok()
    } else {
        None
    };
    Ok(TalagrandReport { points, trend })
}
