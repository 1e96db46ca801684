//! Growth models for variance curves, fitted in log space.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::stats::{percentile_ci, VarianceCurve};
use crate::error::{Error, Result};

const RSS_FLOOR: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthModel {
    /// `c t`
    Linear,
    /// `c t / log t`
    TOverLogT,
    /// `c t^kappa`
    Power,
}

impl GrowthModel {
    pub fn key(self) -> &'static str {
        match self {
            GrowthModel::Linear => "linear",
            GrowthModel::TOverLogT => "t_over_log_t",
            GrowthModel::Power => "power",
        }
    }

    fn params(self) -> usize {
        match self {
            GrowthModel::Power => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: GrowthModel,
    pub coefficient: f64,
    /// 1 for the linear and `t/log t` models.
    pub exponent: f64,
    /// Residual sum of squares of `log var`.
    pub rss: f64,
    pub bic: f64,
}

impl ModelFit {
    pub fn predict(&self, t: f64) -> f64 {
        match self.model {
            GrowthModel::Linear => self.coefficient * t,
            GrowthModel::TOverLogT => self.coefficient * t / t.ln(),
            GrowthModel::Power => self.coefficient * t.powf(self.exponent),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub fits: Vec<ModelFit>,
    /// Smallest BIC; ties go to the simpler model.
    pub selected: GrowthModel,
    pub kappa: f64,
    pub kappa_ci_lo: f64,
    pub kappa_ci_hi: f64,
    /// `bootstrap` when replicate variances are available, else `t-interval`.
    pub kappa_ci_method: &'static str,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    (slope, icept, rss, sxx)
}

fn one_param(model: GrowthModel, lt: &[f64], y: &[f64], offset: impl Fn(f64) -> f64) -> ModelFit {
    let r: Vec<f64> = lt.iter().zip(y).map(|(l, v)| v - offset(*l)).collect();
    let c = r.iter().sum::<f64>() / r.len() as f64;
    let rss = r.iter().map(|v| (v - c).powi(2)).sum();
    ModelFit { model, coefficient: c.exp(), exponent: 1.0, rss, bic: 0.0 }
}

/// Fits the three models to `(t, var)` pairs; `replicates[i]` are optional
/// bootstrap variances at `t[i]`, paired by index across horizons.
pub fn fit_points(ts: &[f64], vars: &[f64], replicates: Option<&[&[f64]]>) -> Result<GrowthReport> {
    if ts.len() != vars.len() || ts.len() < 3 {
        return Err(Error::Degenerate("need at least three horizons".into()));
    }
    if let Some(v) = vars.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Degenerate(format!("variance {v} is not positive")));
    }
    if ts.iter().any(|t| !(*t > 1.0)) {
        return Err(Error::Degenerate("horizons must exceed 1 for the t/log t model".into()));
    }
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = vars.iter().map(|v| v.ln()).collect();
    let n = ts.len() as f64;
    let mut fits = vec![one_param(GrowthModel::Linear, &lt, &y, |l| l), one_param(GrowthModel::TOverLogT, &lt, &y, |l| l - l.ln())];
    let (kappa, icept, rss, sxx) = ols(&lt, &y);
    fits.push(ModelFit { model: GrowthModel::Power, coefficient: icept.exp(), exponent: kappa, rss, bic: 0.0 });
    for f in &mut fits {
        f.bic = n * (f.rss / n).max(RSS_FLOOR).ln() + f.model.params() as f64 * n.ln();
    }
    let selected = fits
        .iter()
        .fold(None::<&ModelFit>, |best, f| match best {
            Some(b) if b.bic <= f.bic => Some(b),
            _ => Some(f),
        })
        .expect("three fits")
        .model;

    let boot = replicates.and_then(|reps| {
        let r = reps.first()?.len();
        if reps.len() != ts.len() || r == 0 || reps.iter().any(|v| v.len() != r) {
            return None;
        }
        let kappas: Vec<f64> = (0..r)
            .filter_map(|i| {
                let yi: Vec<f64> = reps.iter().map(|v| v[i].ln()).collect();
                yi.iter().all(|v| v.is_finite()).then(|| ols(&lt, &yi).0)
            })
            .collect();
        (!kappas.is_empty()).then(|| percentile_ci(&kappas, 0.95))
    });
    let (lo, hi, method) = match boot {
        Some((lo, hi)) => (lo.min(kappa), hi.max(kappa), "bootstrap"),
        None => {
            let dof = n - 2.0;
            let se = (rss / dof / sxx).sqrt();
            let q = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Degenerate(e.to_string()))?.inverse_cdf(0.975);
            (kappa - q * se, kappa + q * se, "t-interval")
        }
    };
    Ok(GrowthReport { fits, selected, kappa, kappa_ci_lo: lo, kappa_ci_hi: hi, kappa_ci_method: method })
}

/// Model comparison for a variance curve.
pub fn fit_growth(curve: &VarianceCurve) -> Result<GrowthReport> {
    let ts: Vec<f64> = curve.points.iter().map(|p| p.t).collect();
    let vs: Vec<f64> = curve.points.iter().map(|p| p.variance).collect();
    let reps: Vec<&[f64]> = curve.points.iter().map(|p| p.replicates.as_slice()).collect();
    fit_points(&ts, &vs, Some(&reps))
}

/// Log-log slope of a per-horizon statistic with a bootstrap interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trend {
    pub slope: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// The interval lies entirely above zero.
    pub increasing: bool,
}

/// `replicates[i][r]` is replicate `r` of the statistic at `ts[i]`.
pub fn log_trend(ts: &[f64], values: &[f64], replicates: &[Vec<f64>]) -> Result<Trend> {
    if ts.len() < 2 || ts.len() != values.len() || replicates.len() != ts.len() {
        return Err(Error::Degenerate("need at least two horizons with replicates".into()));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("trend statistic must be positive".into()));
    }
    let lt: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let slope = ols(&lt, &y).0;
    let r = replicates.iter().map(Vec::len).min().unwrap_or(0);
    let slopes: Vec<f64> = (0..r)
        .filter_map(|i| {
            let yi: Vec<f64> = replicates.iter().map(|v| v[i].ln()).collect();
            yi.iter().all(|v| v.is_finite()).then(|| ols(&lt, &yi).0)
        })
        .collect();
    if slopes.is_empty() {
        return Err(Error::Degenerate("no usable replicates".into()));
    }
    let (lo, hi) = percentile_ci(&slopes, 0.95);
    Ok(Trend { slope, ci_lo: lo, ci_hi: hi, increasing: lo > 0.0 })
}
