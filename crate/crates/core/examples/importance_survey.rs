//! Important and very important cubes from the near-optimal path set.

use hjb_variance::influence::{classify_importance, hash_order, SurveyParams};
use hjb_variance::solver::{solve_u, solve_value_above};
use hjb_variance::variance::ModelConfig;

fn main() -> hjb_variance::Result<()> {
    let model = ModelConfig::default();
    for (t, seed) in [(8.0, 1), (8.0, 2), (16.0, 3)] {
        let inputs = model.inputs(t)?;
        let env = model.environment(t, seed, 0)?;
        let delta = 0.1;
        let u = solve_u(&env, &inputs)?;
        let table = solve_value_above(&env, &inputs, u - delta - 1e-9)?;
        let s = classify_importance(&table, &env, &SurveyParams::new(delta, hash_order(t, 0.45)))?;
        println!(
            "t = {t:>4}  paths {:>4}  visited {:>3}  important {:>2}  very important {}  max lambda {}  G {}  nested {:?}",
            s.paths,
            s.visited.len(),
            s.important.len(),
            s.very_important.len(),
            s.max_lambda(),
            s.g_event,
            s.nested
        );
    }
    Ok(())
}
