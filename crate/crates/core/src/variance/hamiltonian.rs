//! `H(eta)` as the large-time limit of `E[u(t, 0)] / t` for linear payoffs.

use serde::Serialize;

use super::campaign::run_campaign;
use super::config::CampaignConfig;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub t: f64,
    /// Sample mean of `u / t`.
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HamiltonianEstimate {
    pub eta: Vec<f64>,
    pub rates: Vec<RatePoint>,
    /// Mean of `u / t` at the largest horizon.
    pub at_max_t: f64,
    /// Extrapolation of the last two horizons assuming `u/t = H + c/t`.
    pub richardson: Option<f64>,
    /// `K*(eta) - V` when the potential is constant.
    pub reference: Option<f64>,
}

/// One campaign per slope, with shifts and surveys disabled.
pub fn effective_hamiltonian(cfg: &CampaignConfig, etas: &[Vec<f64>]) -> Result<Vec<HamiltonianEstimate>> {
    let mut out = Vec::with_capacity(etas.len());
    for eta in etas {
        let mut c = cfg.clone();
        c.model.eta = eta.clone();
        c.shift_averaging = false;
        c.influence_survey = false;
        let r = run_campaign(&c)?;
        let rates: Vec<RatePoint> = r
            .curve
            .points
            .iter()
            .map(|p| {
                let us = r.samples.iter().filter(|s| s.t == p.t).map(|s| s.u / p.t);
                let (min, max) = us.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                RatePoint { t: p.t, mean: p.mean / p.t, min, max }
            })
            .collect();
        let at_max_t = rates.last().map_or(f64::NAN, |p| p.mean);
        let richardson = match rates.as_slice() {
            [.., a, b] => Some((b.t * b.mean - a.t * a.mean) / (b.t - a.t)),
            _ => None,
        };
        let kstar = c.model.kinetic()?.legendre(eta);
        let reference = if c.model.alpha == 1.0 {
            Some(kstar - c.model.a)
        } else if c.model.alpha == 0.0 {
            Some(kstar - c.model.b)
        } else {
            None
        };
        out.push(HamiltonianEstimate { eta: eta.clone(), rates, at_max_t, richardson, reference });
    }
    Ok(out)
}
