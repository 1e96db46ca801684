//! Checkers for the structural bounds satisfied by near-optimal paths.

use serde::Serialize;

use super::dp::LayerGeom;
use super::kinetic::KineticCost;
use super::params::Grid;
use super::paths::PathRecord;
use super::stencil::Stencil;
use crate::env::Levels;
use crate::geometry::{norm, CompensatedSum};

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BoundViolation {
    UpperCost { from: usize, to: usize, excess: f64 },
    LowerCost { from: usize, to: usize, deficit: f64 },
    Speed { from: usize, to: usize, excess: f64 },
}

/// Minimal kinetic cost of an `s`-step stencil path with a given displacement.
#[derive(Clone, Debug)]
pub struct LeastKinetic {
    dim: usize,
    q_max: i64,
    layers: Vec<Vec<f64>>,
}

impl LeastKinetic {
    pub fn new(grid: &Grid, stencil: &Stencil, max_steps: usize) -> LeastKinetic {
        let d = grid.dim();
        let mut layers = vec![vec![0.0]];
        for s in 1..=max_steps {
            let g = LayerGeom::new(d, s as i64 * grid.q_max);
            let gp = LayerGeom::new(d, (s - 1) as i64 * grid.q_max);
            let prev = &layers[s - 1];
            let mut cur = vec![f64::INFINITY; g.len];
            let mut o = vec![0i64; d];
            let mut src = vec![0i64; d];
            for (f, slot) in cur.iter_mut().enumerate() {
                g.offset(f, &mut o);
                for (m, q) in stencil.moves().iter().enumerate() {
                    for i in 0..d {
                        src[i] = o[i] - q[i];
                    }
                    if let Some(pf) = gp.flat(&src) {
                        let v = prev[pf] + stencil.kinetic(m);
                        if v < *slot {
                            *slot = v;
                        }
                    }
                }
            }
            layers.push(cur);
        }
        LeastKinetic { dim: d, q_max: grid.q_max, layers }
    }

    /// `+inf` when unreachable.
    pub fn get(&self, steps: usize, disp: &[i64]) -> f64 {
        debug_assert_eq!(disp.len(), self.dim);
        LayerGeom::new(self.dim, steps as i64 * self.q_max).flat(disp).map_or(f64::INFINITY, |f| self.layers[steps][f])
    }

    pub fn max_steps(&self) -> usize {
        self.layers.len() - 1
    }
}

/// Two-sided section bounds on a `delta`-optimal path, over all pairs of grid times.
///
/// Upper: a section costs at most `(r2-r1) b` plus the cheapest kinetic cost of
/// any grid path with the same endpoints, plus `delta`. Lower: at least
/// `(r2-r1) a + (r2-r1) K(mean velocity)`.
pub fn check_cost_bounds(
    path: &PathRecord,
    levels: Levels,
    kinetic: &KineticCost,
    least: &LeastKinetic,
    delta: f64,
) -> Vec<BoundViolation> {
    let mut out = Vec::new();
    let n = path.kinetic.len();
    for i in 0..n {
        let mut sec = CompensatedSum::new();
        for j in (i + 1)..=n {
            sec.add(path.kinetic[j - 1]);
            sec.add(path.potential[j - 1]);
            let cost = sec.value();
            let dur = (j - i) as f64 * path.dt;
            let disp: Vec<f64> = path.vertices[j].iter().zip(&path.vertices[i]).map(|(a, b)| a - b).collect();
            let dn: Vec<i64> = path.nodes[j].iter().zip(&path.nodes[i]).map(|(a, b)| a - b).collect();
            let upper = dur * levels.b + least.get(j - i, &dn) + delta;
            if cost > upper + TOL {
                out.push(BoundViolation::UpperCost { from: i, to: j, excess: cost - upper });
            }
            let vel: Vec<f64> = disp.iter().map(|v| v / dur).collect();
            let lower = dur * levels.a + dur * kinetic.eval(&vel);
            if cost < lower - TOL {
                out.push(BoundViolation::LowerCost { from: i, to: j, deficit: lower - cost });
            }
        }
    }
    out
}

/// `|gamma(t2) - gamma(t1)| <= R (1 + |t2 - t1|)` over all pairs of grid times.
pub fn check_finite_speed(path: &PathRecord, radius: f64) -> Vec<BoundViolation> {
    let mut out = Vec::new();
    let v = &path.vertices;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            let d: Vec<f64> = v[j].iter().zip(&v[i]).map(|(a, b)| a - b).collect();
            let bound = radius * (1.0 + (j - i) as f64 * path.dt);
            let len = norm(&d);
            if len > bound + TOL {
                out.push(BoundViolation::Speed { from: i, to: j, excess: len - bound });
            }
        }
    }
    out
}

/// Bound on `|u/t - (K*(eta) - c)|` for constant potential `c` and linear payoff.
///
/// Rounding the optimal velocity to the grid moves it by at most
/// `sqrt(d) h / (2 dt)`, costing `scale * d h^2 / (4 dt^2)` per unit time for
/// quadratic `K`. Requires the optimal velocity inside the stencil. `None` for
/// non-quadratic costs.
pub fn hopf_lax_tolerance(kinetic: &KineticCost, grid: &Grid) -> Option<f64> {
    if kinetic.power() != 2.0 {
        return None;
    }
    Some(kinetic.scale() * grid.dim() as f64 * grid.h * grid.h / (4.0 * grid.dt * grid.dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverParams;

    #[test]
    fn least_kinetic_spreads_displacement() {
        let grid = SolverParams::new(4.0, 1.0, 2, vec![0.0, 0.0]).grid().unwrap();
        let k = KineticCost::quadratic();
        let st = Stencil::new(&grid, &k);
        let lk = LeastKinetic::new(&grid, &st, 4);
        assert_eq!(lk.get(0, &[0, 0]), 0.0);
        assert_eq!(lk.get(3, &[3, 0]), 1.5);
        // 5 over 3 steps: 2 + 2 + 1
        assert_eq!(lk.get(3, &[5, 0]), 0.5 * 9.0);
        assert_eq!(lk.get(2, &[5, 0]), f64::INFINITY);
    }

    #[test]
    fn tolerance_scales_quadratically() {
        let k = KineticCost::quadratic();
        let g1 = SolverParams::new(4.0, 0.5, 2, vec![0.0, 0.0]).grid().unwrap();
        let g2 = SolverParams::new(4.0, 0.25, 2, vec![0.0, 0.0]).grid().unwrap();
        let t1 = hopf_lax_tolerance(&k, &g1).unwrap();
        let t2 = hopf_lax_tolerance(&k, &g2).unwrap();
        assert_eq!(t1, 2.0 * 0.25 / 8.0);
        assert_eq!(t2, t1 / 4.0);
    }
}
