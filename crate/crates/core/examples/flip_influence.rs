//! Influence of single-site flips on the value.

use hjb_variance::influence::{argmax_path_flips, flip_difference};
use hjb_variance::solver::solve_value;
use hjb_variance::variance::ModelConfig;

fn main() -> hjb_variance::Result<()> {
    let model = ModelConfig::default();
    let t = 8.0;
    let inputs = model.inputs(t)?;
    let env = model.environment(t, 5, 0)?;

    // a-sites off the argmax path have zero influence
    let (u, recs) = argmax_path_flips(&env, &inputs)?;
    println!("u = {u}");
    for r in &recs {
        println!("  site {:?}: sigma u = {:.4}  rho = {:+.4}", r.site.coords(), r.sigma_u, r.rho);
    }

    let table = solve_value(&env, &inputs)?;
    let mut nonzero = 0;
    let mut largest: f64 = 0.0;
    for j in env.bbox().sites() {
        let r = flip_difference(&table, &env, &j)?;
        if r.rho != 0.0 {
            nonzero += 1;
        }
        largest = largest.max(r.rho.abs());
        assert!(!r.far_field || r.rho == 0.0);
    }
    println!("{} sites scanned, {nonzero} with nonzero influence, max |rho| = {largest:.4}", env.bbox().len());
    Ok(())
}
