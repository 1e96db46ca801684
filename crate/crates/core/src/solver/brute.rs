//! Exhaustive enumeration over every move sequence.

use super::dp::{prepare, Prepared, SolverInputs};
use crate::env::Environment;
use crate::error::{Error, Result};

const MAX_PATHS: f64 = 1e8;

struct Walker<'a> {
    prep: &'a Prepared,
    inputs: &'a SolverInputs,
    nodes: Vec<Vec<i64>>,
    moves: Vec<usize>,
}

impl Walker<'_> {
    fn leaf_value(&self) -> f64 {
        let grid = &self.prep.grid;
        let mut v = self.inputs.payoff.eval(&grid.position(self.nodes.last().expect("nonempty")));
        for (i, &m) in self.moves.iter().enumerate().rev() {
            v -= self.prep.cost.cost(&self.nodes[i], m);
        }
        v
    }

    fn walk(&mut self, visit: &mut dyn FnMut(&[Vec<i64>], f64)) {
        if self.moves.len() == self.prep.grid.steps {
            let v = self.leaf_value();
            visit(&self.nodes, v);
            return;
        }
        for m in 0..self.prep.stencil.len() {
            let next: Vec<i64> =
                self.nodes.last().expect("nonempty").iter().zip(&self.prep.stencil.moves()[m]).map(|(a, b)| a + b).collect();
            self.nodes.push(next);
            self.moves.push(m);
            self.walk(visit);
            self.moves.pop();
            self.nodes.pop();
        }
    }
}

fn enumerate(env: &Environment, inputs: &SolverInputs, visit: &mut dyn FnMut(&[Vec<i64>], f64)) -> Result<()> {
    let prep = prepare(env, inputs)?;
    let count = (prep.stencil.len() as f64).powi(prep.grid.steps as i32);
    if count > MAX_PATHS {
        return Err(Error::InstanceTooLarge(count));
    }
    let start = prep.grid.start.clone();
    let mut w = Walker { prep: &prep, inputs, nodes: vec![start], moves: Vec::new() };
    w.walk(visit);
    Ok(())
}

/// Maximum of `g(path end) - cost` over all discrete paths.
pub fn brute_force_value(env: &Environment, inputs: &SolverInputs) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    enumerate(env, inputs, &mut |_, v| best = best.max(v))?;
    if best == f64::NEG_INFINITY {
        return Err(Error::Unreachable);
    }
    Ok(best)
}

/// Every path (as grid nodes) whose value is at least `threshold`, with its value.
pub fn brute_force_paths(env: &Environment, inputs: &SolverInputs, threshold: f64) -> Result<Vec<(Vec<Vec<i64>>, f64)>> {
    let mut out = Vec::new();
    enumerate(env, inputs, &mut |nodes, v| {
        if v >= threshold {
            out.push((nodes.to_vec(), v));
        }
    })?;
    Ok(out)
}
