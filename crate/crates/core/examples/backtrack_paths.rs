//! Solve once, then enumerate near-optimal paths and check the path bounds.

use hjb_variance::solver::{
    backtrack_paths, brute_force_value, check_cost_bounds, check_finite_speed, occupation_times, solve_value, KineticCost, LeastKinetic,
    Payoff, SolverInputs, SolverParams, Stencil,
};
use hjb_variance::{Environment, Levels};

fn main() -> hjb_variance::Result<()> {
    let params = SolverParams::new(4.0, 1.0, 1, vec![0.0, 0.0]);
    let inputs = SolverInputs::new(Payoff::linear(vec![1.0, 0.0]), KineticCost::quadratic(), params);
    let grid = inputs.grid()?;
    let levels = Levels::new(0.0, 1.0)?;
    let env = Environment::sample(grid.required_box(), 0.5, levels, 11)?;

    let table = solve_value(&env, &inputs)?;
    println!("dp u = {}  brute force u = {}", table.u(), brute_force_value(&env, &inputs)?);

    let set = backtrack_paths(&table, &env, 0.5, 50)?;
    let least = LeastKinetic::new(&grid, &Stencil::new(&grid, &inputs.kinetic), grid.steps);
    let radius = inputs.finite_speed(levels)?.radius;
    for p in &set.paths {
        let bad = check_cost_bounds(p, levels, &inputs.kinetic, &least, 0.5).len() + check_finite_speed(p, radius).len();
        println!("value {:.3}  slack {:.3}  nodes {:?}  violations {bad}", p.value(), p.slack, p.nodes);
    }
    if let Some(best) = set.paths.first() {
        for (cube, time) in occupation_times(best) {
            println!("  cube {:?}: time {time:.3}", cube.coords());
        }
    }
    Ok(())
}
