//! The flip-Lipschitz hash of auxiliary bits and the shifted value.

use hjb_variance::influence::{build_shift_hash, hash_order, shifted_value, ShiftBits};
use hjb_variance::solver::solve_u;
use hjb_variance::variance::ModelConfig;

fn main() -> hjb_variance::Result<()> {
    for m in [2, 4, 8, 16, 32] {
        let h = build_shift_hash(m, 0.5)?;
        println!("m = {m:>2}  max P = {:.4}  3/m = {:.4}", h.max_probability(), 3.0 / m as f64);
    }

    let model = ModelConfig::default();
    let t = 16.0;
    let m = hash_order(t, 0.45);
    let hash = build_shift_hash(m, model.alpha)?;
    let inputs = model.inputs(t)?;
    let env = model.environment(t, 9, m as i64 - 1)?;
    let u = solve_u(&env, &inputs)?;
    for seed in 0..5 {
        let bits = ShiftBits::sample(m, model.dim(), model.alpha, seed);
        let (ut, z) = shifted_value(&env, &hash, &bits, &inputs)?;
        println!("shift {z:?}: u~ = {ut:.4}  |u - u~| = {:.4}", (u - ut).abs());
    }
    Ok(())
}
