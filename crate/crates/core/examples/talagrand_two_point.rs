//! The influence sum on a function of two sites, against its exact variance.

use std::collections::BTreeMap;

use hjb_variance::influence::talagrand_sum_weighted;
use hjb_variance::SiteIndex;

fn main() -> hjb_variance::Result<()> {
    // f = 1{omega_0 = b} with alpha = 1/2, a = 0, b = 1
    let outcomes = [0.0, 1.0];
    let weights = [0.5, 0.5];
    let f: Vec<f64> = outcomes.to_vec();
    let mean: f64 = f.iter().zip(&weights).map(|(x, w)| x * w).sum();
    let var: f64 = f.iter().zip(&weights).map(|(x, w)| w * (x - mean).powi(2)).sum();
    // rho_0 f = (f(flipped) - f) / 2
    let rho: Vec<f64> = f.iter().map(|x| ((1.0 - x) - x) / 2.0).collect();
    let mut samples = BTreeMap::new();
    samples.insert(SiteIndex::new(vec![0]), rho);
    let sum = talagrand_sum_weighted(&samples, &weights)?;
    println!("var f = {var}  influence sum = {}", sum.total);
    Ok(())
}
