//! Small Monte Carlo campaign with growth fits and shift diagnostics.

use hjb_variance::variance::{run_campaign, CampaignConfig};

fn main() -> hjb_variance::Result<()> {
    let cfg = CampaignConfig {
        horizons: vec![8.0, 16.0, 32.0],
        samples: 200,
        bootstrap_resamples: 1000,
        shift_averaging: true,
        ..CampaignConfig::default()
    };
    let res = run_campaign(&cfg)?;
    for p in &res.curve.points {
        println!("t = {:>4}  var = {:.4} [{:.4}, {:.4}]  var/t = {:.4}", p.t, p.variance, p.ci_lo, p.ci_hi, p.ratio());
    }
    println!("var/t non-increasing within CI: {}", res.curve.ratio_non_increasing());
    if let Some(g) = &res.curve.fits {
        for f in &g.fits {
            println!("  {:<12} bic {:>8.3}", f.model.key(), f.bic);
        }
        println!("selected {}  kappa = {:.3} [{:.3}, {:.3}]", g.selected.key(), g.kappa, g.kappa_ci_lo, g.kappa_ci_hi);
    }
    for s in &res.shift {
        println!("t = {:>4}  m = {}  max |u - u~| / t^zeta = {:.3}", s.t, s.m, s.scaled_max);
    }
    Ok(())
}
