//! Variance of `d(0, n e_1)` over independent edge environments.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::edges::EdgeEnvironment;
use super::path::{fpp_distance, required_box};
use crate::env::Levels;
use crate::error::{Error, Result};
use crate::variance::{sample_seed, stream_seed, CurvePoint, VarianceCurve, TAG_BOOTSTRAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FppConfig {
    /// Strictly ascending `|v|`, with `v = n e_1`.
    pub lengths: Vec<i64>,
    pub samples: usize,
    pub base_seed: u64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub dim: usize,
    pub bootstrap_resamples: usize,
}

impl Default for FppConfig {
    fn default() -> Self {
        FppConfig {
            lengths: vec![16, 32, 64, 128],
            samples: 2000,
            base_seed: 1,
            alpha: 0.5,
            a: 1.0,
            b: 2.0,
            dim: 2,
            bootstrap_resamples: 10_000,
        }
    }
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

impl FppConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(config_err("alpha", format!("must lie in [0, 1] (got {})", self.alpha)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(config_err("a", "edge weights must be positive"));
        }
        if !(self.b > self.a && self.b.is_finite()) {
            return Err(config_err("b", "must exceed a"));
        }
        if self.dim < 2 {
            return Err(config_err("dim", "must be at least 2"));
        }
        if self.lengths.is_empty() || self.lengths[0] < 2 || self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("lengths", "must be strictly ascending and at least 2"));
        }
        if self.samples < 2 {
            return Err(config_err("samples", "need at least 2 samples per length"));
        }
        if self.bootstrap_resamples < 100 {
            return Err(config_err("bootstrap_resamples", "need at least 100"));
        }
        Ok(())
    }

    fn levels(&self) -> Levels {
        Levels { a: self.a, b: self.b }
    }

    fn target(&self, n: i64) -> Vec<i64> {
        let mut v = vec![0; self.dim];
        v[0] = n;
        v
    }

    /// Edge environment for sample `index` at length `n`.
    pub fn environment(&self, n: i64, index: usize) -> Result<EdgeEnvironment> {
        let bbox = required_box(&vec![0; self.dim], &self.target(n), self.levels())?;
        EdgeEnvironment::sample(bbox, self.alpha, self.levels(), sample_seed(self.base_seed, n as f64, index as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FppSample {
    pub length: i64,
    pub index: usize,
    pub seed: u64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FppResult {
    pub config: FppConfig,
    /// Horizon axis is `|v|`.
    pub curve: VarianceCurve,
    #[serde(skip)]
    pub samples: Vec<FppSample>,
}

/// Same pipeline as the value-function campaigns with `u` replaced by `d(0, v)`.
pub fn fpp_variance_curve(cfg: &FppConfig) -> Result<FppResult> {
    cfg.validate()?;
    let mut points = Vec::new();
    let mut samples = Vec::new();
    for &n in &cfg.lengths {
        let target = cfg.target(n);
        let recs: Vec<FppSample> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let env = cfg.environment(n, i)?;
                Ok(FppSample { length: n, index: i, seed: env.seed(), distance: fpp_distance(&env, &target)?.distance })
            })
            .collect::<Result<_>>()?;
        let ds: Vec<f64> = recs.iter().map(|r| r.distance).collect();
        let seed = stream_seed(sample_seed(cfg.base_seed, n as f64, u64::MAX), TAG_BOOTSTRAP);
        points.push(CurvePoint::from_samples(n as f64, &ds, cfg.bootstrap_resamples, seed)?);
        samples.extend(recs);
    }
    Ok(FppResult { config: cfg.clone(), curve: VarianceCurve::new(points), samples })
}

pub fn write_fpp_samples_csv<W: Write>(mut w: W, samples: &[FppSample]) -> Result<()> {
    writeln!(w, "length,index,seed,distance")?;
    for s in samples {
        writeln!(w, "{},{},{},{}", s.length, s.index, s.seed, s.distance)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weights_have_zero_variance() {
        let c = FppConfig { lengths: vec![4, 8, 16], samples: 3, alpha: 1.0, bootstrap_resamples: 100, ..Default::default() };
        let r = fpp_variance_curve(&c).unwrap();
        for p in &r.curve.points {
            assert_eq!(p.variance, 0.0);
            assert_eq!(p.mean, p.t);
        }
    }

    #[test]
    fn config_keys() {
        let c = FppConfig { a: 0.0, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::Config { key, .. }) if key == "a"));
    }
}
