//! Back-link extraction of optimal and near-optimal paths.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::dp::ValueTable;
use crate::env::{Environment, SiteIndex};
use crate::error::Result;
use crate::geometry::{segment_pieces, CompensatedSum};

/// A discrete path with its cost decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathRecord {
    pub dt: f64,
    /// Grid nodes `n` (position `n h`).
    pub nodes: Vec<Vec<i64>>,
    pub vertices: Vec<Vec<f64>>,
    /// `dt K(step / dt)` per step.
    pub kinetic: Vec<f64>,
    /// Potential integral per step.
    pub potential: Vec<f64>,
    pub total_cost: f64,
    pub payoff: f64,
    /// `u - (payoff - total_cost)`.
    pub slack: f64,
    /// Number of steps that use a move on the stencil boundary.
    pub boundary_moves: usize,
}

impl PathRecord {
    /// Re-evaluates every segment directly against the environment.
    pub fn evaluate(table: &ValueTable, env: &Environment, nodes: Vec<Vec<i64>>) -> Result<PathRecord> {
        let grid = table.grid();
        let kin = &table.inputs().kinetic;
        let vertices: Vec<Vec<f64>> = nodes.iter().map(|n| grid.position(n)).collect();
        let mut kinetic = Vec::with_capacity(grid.steps);
        let mut potential = Vec::with_capacity(grid.steps);
        let mut total = CompensatedSum::new();
        let mut boundary_moves = 0;
        for w in vertices.windows(2) {
            let vel: Vec<f64> = w[1].iter().zip(&w[0]).map(|(b, a)| (b - a) / grid.dt).collect();
            let k = grid.dt * kin.eval(&vel);
            let v = env.segment_potential_integral(&w[0], &w[1], grid.dt)?;
            total.add(k);
            total.add(v);
            kinetic.push(k);
            potential.push(v);
        }
        for w in nodes.windows(2) {
            if w[1].iter().zip(&w[0]).any(|(b, a)| (b - a).abs() == grid.q_max) {
                boundary_moves += 1;
            }
        }
        let payoff = table.inputs().payoff.eval(vertices.last().expect("nonempty"));
        let total_cost = total.value();
        Ok(PathRecord {
            dt: grid.dt,
            nodes,
            vertices,
            kinetic,
            potential,
            total_cost,
            payoff,
            slack: table.u() - (payoff - total_cost),
            boundary_moves,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.vertices.len() - 1) as f64
    }

    pub fn value(&self) -> f64 {
        self.payoff - self.total_cost
    }

    pub fn displacement(&self) -> f64 {
        let a = &self.vertices[0];
        let b = self.vertices.last().expect("nonempty");
        crate::geometry::norm(&b.iter().zip(a).map(|(x, y)| x - y).collect::<Vec<_>>())
    }
}

/// Paths within a slack budget.
#[derive(Clone, Debug, Serialize)]
pub struct PathSet {
    pub delta: f64,
    pub paths: Vec<PathRecord>,
    /// The enumeration hit its cap.
    pub truncated: bool,
}

const SLACK_TOL: f64 = 1e-9;

/// The argmax chain first, then every other chain whose accumulated
/// per-step slack stays within `delta`, up to `max_paths` paths in total.
pub fn backtrack_paths(table: &ValueTable, env: &Environment, delta: f64, max_paths: usize) -> Result<PathSet> {
    let grid = table.grid();
    let stencil = table.stencil();
    let cost = table.step_cost();
    let max_paths = max_paths.max(1);
    let mut found: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut truncated = false;
    // depth-first with the linked move tried first
    let mut stack: Vec<(usize, Vec<i64>, f64, usize)> = Vec::new();
    let mut prefix: Vec<Vec<i64>> = Vec::new();
    stack.push((grid.steps, grid.start.clone(), 0.0, 0));
    while let Some((k, n, acc, depth)) = stack.pop() {
        prefix.truncate(depth);
        prefix.push(n.clone());
        if k == 0 {
            if found.len() == max_paths {
                truncated = true;
                break;
            }
            found.push(prefix.clone());
            continue;
        }
        let w = table.value(k, &n).expect("node inside cone");
        let (base, class) = cost.locate(&n);
        let link = table.link(k, &n).expect("node inside cone");
        let mut children = Vec::new();
        for m in std::iter::once(link).chain((0..stencil.len()).filter(|&m| m != link)) {
            let next: Vec<i64> = n.iter().zip(&stencil.moves()[m]).map(|(a, b)| a + b).collect();
            let wn = table.value(k - 1, &next).expect("next node inside cone");
            if wn == f64::NEG_INFINITY {
                continue;
            }
            let s = w - (wn - cost.cost_at(base, class, m));
            if acc + s <= delta + SLACK_TOL {
                children.push((k - 1, next, acc + s.max(0.0), depth + 1));
            }
        }
        for c in children.into_iter().rev() {
            stack.push(c);
        }
    }
    let paths = found.into_iter().map(|nodes| PathRecord::evaluate(table, env, nodes)).collect::<Result<_>>()?;
    Ok(PathSet { delta, paths, truncated })
}

/// `pi_j`: time spent in each cube.
pub fn occupation_times(path: &PathRecord) -> BTreeMap<SiteIndex, f64> {
    let mut out: BTreeMap<SiteIndex, f64> = BTreeMap::new();
    for w in path.vertices.windows(2) {
        for pc in segment_pieces(&w[0], &w[1]) {
            *out.entry(SiteIndex(pc.cube)).or_insert(0.0) += pc.frac * path.dt;
        }
    }
    out
}

/// One JSON object per line.
pub fn write_paths_jsonl<W: Write>(mut w: W, paths: &[PathRecord]) -> Result<()> {
    for p in paths {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(vertices: Vec<Vec<f64>>) -> PathRecord {
        PathRecord {
            dt: 1.0,
            nodes: vec![],
            vertices,
            kinetic: vec![],
            potential: vec![],
            total_cost: 0.0,
            payoff: 0.0,
            slack: 0.0,
            boundary_moves: 0,
        }
    }

    #[test]
    fn stationary_occupation() {
        let p = record(vec![vec![0.5, 0.5]; 6]);
        let occ = occupation_times(&p);
        assert_eq!(occ.len(), 1);
        assert_eq!(occ[&SiteIndex::new(vec![0, 0])], 5.0);
    }

    #[test]
    fn axis_path_occupation() {
        let p = record((0..4).map(|i| vec![0.5 + i as f64, 0.5]).collect());
        let occ = occupation_times(&p);
        assert_eq!(occ[&SiteIndex::new(vec![0, 0])], 0.5);
        assert_eq!(occ[&SiteIndex::new(vec![1, 0])], 1.0);
        assert_eq!(occ[&SiteIndex::new(vec![2, 0])], 1.0);
        assert_eq!(occ[&SiteIndex::new(vec![3, 0])], 0.5);
        assert_eq!(occ.values().sum::<f64>(), 3.0);
    }
}
