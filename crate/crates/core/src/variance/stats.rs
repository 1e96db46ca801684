//! Sample moments and bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::geometry::CompensatedSum;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value() / xs.len() as f64
}

/// Unbiased estimate (divisor `n - 1`), two-pass with compensated sums.
pub fn unbiased_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: CompensatedSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    ss.value().max(0.0) / (n - 1) as f64
}

/// Bootstrap replicates of `stat`, in replicate order.
pub fn bootstrap<F>(xs: &[f64], resamples: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = xs.len();
    let mut buf = vec![0.0; n];
    (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect()
}

/// Equal-tailed percentile interval at the given level.
pub fn percentile_ci(replicates: &[f64], level: f64) -> (f64, f64) {
    let mut d = Data::new(replicates.to_vec());
    let tail = (1.0 - level) / 2.0;
    (d.quantile(tail), d.quantile(1.0 - tail))
}

/// One horizon of a variance curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// 95% bootstrap interval, widened if needed to contain `variance`.
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(skip)]
    pub replicates: Vec<f64>,
}

impl CurvePoint {
    pub fn from_samples(t: f64, xs: &[f64], resamples: usize, seed: u64) -> Result<CurvePoint> {
        if xs.len() < 2 {
            return Err(Error::Degenerate(format!("t = {t}: fewer than two samples")));
        }
        let variance = unbiased_variance(xs);
        let replicates = bootstrap(xs, resamples, seed, unbiased_variance);
        let (lo, hi) = percentile_ci(&replicates, 0.95);
        Ok(CurvePoint { t, n: xs.len(), mean: mean(xs), variance, ci_lo: lo.min(variance), ci_hi: hi.max(variance), replicates })
    }

    pub fn ratio(&self) -> f64 {
        self.variance / self.t
    }
}

/// Variance per horizon plus growth fits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceCurve {
    pub points: Vec<CurvePoint>,
    pub fits: Option<super::fit::GrowthReport>,
    /// Why `fits` is absent.
    pub fit_error: Option<String>,
}

impl VarianceCurve {
    pub fn new(points: Vec<CurvePoint>) -> VarianceCurve {
        let mut c = VarianceCurve { points, fits: None, fit_error: None };
        match super::fit::fit_growth(&c) {
            Ok(f) => c.fits = Some(f),
            Err(e) => c.fit_error = Some(e.to_string()),
        }
        c
    }

    /// `var/t` never rises above the previous horizon's upper interval end.
    pub fn ratio_non_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].ratio() <= w[0].ci_hi / w[0].t)
    }

    /// Plot-data CSV: `t, var, ci_lo, ci_hi` and one column per fitted model.
    pub fn write_plot_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let fits = self.fits.as_ref().map(|f| f.fits.as_slice()).unwrap_or(&[]);
        let names: Vec<String> = fits.iter().map(|f| format!("fit_{}", f.model.key())).collect();
        let mut header = vec!["t", "var", "ci_lo", "ci_hi"].into_iter().map(String::from).collect::<Vec<_>>();
        header.extend(names);
        writeln!(w, "{}", header.join(","))?;
        for p in &self.points {
            let mut row = vec![p.t.to_string(), p.variance.to_string(), p.ci_lo.to_string(), p.ci_hi.to_string()];
            row.extend(fits.iter().map(|f| f.predict(p.t).to_string()));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
