//! Constant potential: the discrete value converges to g(x) + t K*(eta) - t V.

use hjb_variance::solver::{hopf_lax_tolerance, solve_u, KineticCost, Payoff, SolverInputs, SolverParams};
use hjb_variance::{Environment, Levels};

fn main() -> hjb_variance::Result<()> {
    let t = 32.0;
    let eta = vec![1.0, 0.0];
    let kinetic = KineticCost::quadratic();
    let exact = kinetic.legendre(&eta);
    for h in [1.0, 0.5, 0.25] {
        let params = SolverParams::new(t, h, 5, vec![0.0, 0.0]);
        let inputs = SolverInputs::new(Payoff::linear(eta.clone()), kinetic, params);
        let grid = inputs.grid()?;
        // alpha = 1: every cube at level a = 0
        let env = Environment::sample(grid.required_box(), 1.0, Levels::new(0.0, 1.0)?, 0)?;
        let u = solve_u(&env, &inputs)?;
        let tol = hopf_lax_tolerance(&kinetic, &grid).unwrap();
        println!("h = {h:<5} u/t = {:.6}  exact {exact}  error {:.2e}  bound {tol:.2e}", u / t, (u / t - exact).abs());
    }
    Ok(())
}
