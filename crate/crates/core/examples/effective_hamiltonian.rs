//! Long-time rates E[u(t)]/t for several slopes.

use hjb_variance::variance::{effective_hamiltonian, CampaignConfig};

fn main() -> hjb_variance::Result<()> {
    let cfg = CampaignConfig { horizons: vec![8.0, 16.0, 32.0], samples: 100, bootstrap_resamples: 200, ..CampaignConfig::default() };
    let etas = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    for est in effective_hamiltonian(&cfg, &etas)? {
        let rates: Vec<String> = est.rates.iter().map(|r| format!("{:.4}", r.mean)).collect();
        println!("eta {:?}: u/t = [{}]  extrapolated {:?}", est.eta, rates.join(", "), est.richardson);
    }
    Ok(())
}
