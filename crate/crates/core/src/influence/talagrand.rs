//! `sum_j |rho_j f|_2^2 / (1 + log(|rho_j f|_2 / |rho_j f|_1))`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::env::SiteIndex;
use crate::error::{Error, Result};
use crate::geometry::CompensatedSum;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TalagrandTerm {
    pub site: SiteIndex,
    pub l2: f64,
    pub l1: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TalagrandSum {
    pub total: f64,
    pub terms: Vec<TalagrandTerm>,
}

/// Zero when `l1 == 0`.
pub fn talagrand_term(l2: f64, l1: f64) -> f64 {
    if l1 == 0.0 {
        return 0.0;
    }
    l2 * l2 / (1.0 + (l2 / l1).ln())
}

/// Builds the sum from per-site moments `E[rho^2]` and `E[|rho|]`.
pub fn talagrand_from_moments(moments: impl IntoIterator<Item = (SiteIndex, f64, f64)>) -> TalagrandSum {
    let mut total = CompensatedSum::new();
    let mut terms = Vec::new();
    for (site, second, first) in moments {
        let l2 = second.max(0.0).sqrt();
        let term = talagrand_term(l2, first);
        total.add(term);
        terms.push(TalagrandTerm { site, l2, l1: first, term });
    }
    TalagrandSum { total: total.value(), terms }
}

/// Norms under explicit probability weights (one weight per sample).
pub fn talagrand_sum_weighted(samples: &BTreeMap<SiteIndex, Vec<f64>>, weights: &[f64]) -> Result<TalagrandSum> {
    let wsum: f64 = weights.iter().sum();
    if weights.iter().any(|w| *w < 0.0) || (wsum - 1.0).abs() > 1e-12 {
        return Err(Error::param("weights", "must be nonnegative and sum to 1"));
    }
    let mut moments = Vec::with_capacity(samples.len());
    for (site, rho) in samples {
        if rho.len() != weights.len() {
            return Err(Error::param("samples", "every site needs one value per weight"));
        }
        let second: CompensatedSum = rho.iter().zip(weights).map(|(r, w)| w * r * r).collect();
        let first: CompensatedSum = rho.iter().zip(weights).map(|(r, w)| w * r.abs()).collect();
        moments.push((site.clone(), second.value(), first.value()));
    }
    Ok(talagrand_from_moments(moments))
}

/// Empirical norms over `N` equally weighted environments.
pub fn talagrand_sum(samples: &BTreeMap<SiteIndex, Vec<f64>>) -> Result<TalagrandSum> {
    let n = samples.values().next().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::param("samples", "need at least two environments"));
    }
    talagrand_sum_weighted(samples, &vec![1.0 / n as f64; n]).or_else(|_| {
        // 1/n does not always sum to exactly 1 in floating point
        let mut moments = Vec::with_capacity(samples.len());
        for (site, rho) in samples {
            if rho.len() != n {
                return Err(Error::param("samples", "every site needs N values"));
            }
            let second: CompensatedSum = rho.iter().map(|r| r * r).collect();
            let first: CompensatedSum = rho.iter().map(|r| r.abs()).collect();
            moments.push((site.clone(), second.value() / n as f64, first.value() / n as f64));
        }
        Ok(talagrand_from_moments(moments))
    })
}
