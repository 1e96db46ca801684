use serde::{Deserialize, Serialize};

use super::kinetic::KineticCost;
use super::payoff::Payoff;
use crate::env::{LatticeBox, Levels};
use crate::error::{Error, Result};

/// Discretisation of the control problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Time step; the horizon must be an integer multiple.
    pub dt: f64,
    /// Grid spacing; must be `1/p` for a positive integer `p`.
    pub h: f64,
    /// Stencil radius (Chebyshev) in grid units.
    pub q_max: usize,
    pub horizon: f64,
    pub start: Vec<f64>,
}

impl SolverParams {
    pub fn new(horizon: f64, h: f64, q_max: usize, start: Vec<f64>) -> Self {
        SolverParams { dt: 1.0, h, q_max, horizon, start }
    }

    /// Validates and resolves the integer grid.
    pub fn grid(&self) -> Result<Grid> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("solver.dt", "must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("solver.horizon", "must be positive"));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon || steps < 1.0 {
            return Err(Error::param("solver.horizon", "must be an integer multiple of dt"));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::param("solver.h", "must lie in (0, 1]"));
        }
        let p = (1.0 / self.h).round();
        if (p * self.h - 1.0).abs() > 1e-12 {
            return Err(Error::param("solver.h", "must be 1/p for an integer p"));
        }
        if self.start.len() < 2 {
            return Err(Error::param("solver.start", "dimension must be at least 2"));
        }
        let moves = (2.0 * self.q_max as f64 + 1.0).powi(self.start.len() as i32);
        if self.q_max == 0 || moves > 65536.0 {
            return Err(Error::param("solver.q_max", "stencil must have between 3^d and 65536 moves"));
        }
        let p = p as i64;
        let mut start = Vec::with_capacity(self.start.len());
        for &x in &self.start {
            let n = (x * p as f64).round();
            if (n / p as f64 - x).abs() > 1e-12 {
                return Err(Error::param("solver.start", "must be a grid point"));
            }
            start.push(n as i64);
        }
        let steps = steps as usize;
        let span = steps as f64 * self.q_max as f64;
        if span.powi(start.len() as i32) > 4e9 {
            return Err(Error::InstanceTooLarge(span));
        }
        Ok(Grid { p, h: 1.0 / p as f64, dt: self.dt, steps, q_max: self.q_max as i64, start })
    }
}

/// Integer form of [`SolverParams`]. Nodes are integer vectors `n` at position `n / p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub p: i64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub q_max: i64,
    pub start: Vec<i64>,
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.start.len()
    }

    /// Chebyshev radius (grid units) of the nodes stored at layer `k`.
    pub fn radius(&self, k: usize) -> i64 {
        (self.steps - k) as i64 * self.q_max
    }

    pub fn position(&self, n: &[i64]) -> Vec<f64> {
        n.iter().map(|&v| v as f64 / self.p as f64).collect()
    }

    /// Cubes any discrete path can touch.
    pub fn required_box(&self) -> LatticeBox {
        let r = self.radius(0);
        let lo = self.start.iter().map(|&s| (s - r).div_euclid(self.p)).collect();
        let hi = self.start.iter().map(|&s| (s + r).div_euclid(self.p) + 1).collect();
        LatticeBox::new(lo, hi).expect("nonempty")
    }

    pub fn check_box(&self, bbox: &LatticeBox) -> Result<()> {
        if bbox.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: bbox.dim() });
        }
        let need = self.required_box();
        if !bbox.contains_box(&need) {
            return Err(Error::BoxTooSmall { need_lo: need.lo().to_vec(), need_hi: need.hi().to_vec() });
        }
        Ok(())
    }

    /// Euclidean reach of one step.
    pub fn step_reach(&self) -> f64 {
        self.q_max as f64 * self.h * (self.dim() as f64).sqrt()
    }
}

/// Constants of the finite-speed construction for radial `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiniteSpeed {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    /// The speed bound `R`.
    pub radius: f64,
}

impl FiniteSpeed {
    /// Follows the constructive bounds: `R0` from `K(r) <= 1 + (b-a) + C1 + C1 r`,
    /// `R1` from `K(R1)/3 > 1 + (b-a) + K(R0)`, `M = 4(b-a) + K(2 R1)`,
    /// `R2` from `K(s z) - s K(z) > M + 1` for `|z| >= R2/3`, `s` in `[3/2, 2]`,
    /// and `R = 2 R2`.
    pub fn compute(kinetic: &KineticCost, levels: Levels, c1: f64) -> FiniteSpeed {
        let gap = levels.gap();
        let pad = 1.0 + 1e-9;
        let r0 = kinetic.radial_crossing(1.0 + gap + c1, c1);
        let r1 = kinetic.radius_for(3.0 * (1.0 + gap + kinetic.radial(r0))).max(r0) * pad;
        let m = 4.0 * gap + kinetic.radial(2.0 * r1);
        let p = kinetic.power();
        // min over s in [3/2, 2] of s^p - s is attained at 3/2 for p > 1
        let g = 1.5f64.powf(p) - 1.5;
        let r2 = (3.0 * kinetic.radius_for((m + 1.0) / g)).max(r1) * pad;
        FiniteSpeed { r0, r1, r2, radius: 2.0 * r2 }
    }
}

/// Default stencil: one step reaches speed `R0`, padded by one grid unit.
pub fn default_q_max(kinetic: &KineticCost, levels: Levels, payoff: &Payoff, start: &[f64], dt: f64, h: f64) -> Result<usize> {
    let c1 = payoff.growth_constant(start).ok_or(Error::Unreachable)?;
    let fs = FiniteSpeed::compute(kinetic, levels, c1);
    Ok((fs.r0 * dt / h).ceil() as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        let p = SolverParams::new(4.0, 0.5, 2, vec![0.0, 0.5]);
        let g = p.grid().unwrap();
        assert_eq!(g.p, 2);
        assert_eq!(g.steps, 4);
        assert_eq!(g.start, vec![0, 1]);
        assert_eq!(g.radius(0), 8);
        assert_eq!(g.radius(4), 0);
        let b = g.required_box();
        assert_eq!(b.lo(), &[-4, -4]);
        assert_eq!(b.hi(), &[5, 5]);
        assert!(SolverParams::new(4.0, 0.3, 2, vec![0.0, 0.0]).grid().is_err());
        assert!(SolverParams::new(4.5, 1.0, 2, vec![0.0, 0.0]).grid().is_err());
        assert!(SolverParams::new(4.0, 0.5, 2, vec![0.25, 0.0]).grid().is_err());
        assert!(SolverParams::new(4.0, 0.5, 0, vec![0.0, 0.0]).grid().is_err());
    }

    #[test]
    fn finite_speed_defaults() {
        let k = KineticCost::quadratic();
        let fs = FiniteSpeed::compute(&k, Levels::default(), 1.0);
        assert!((fs.r0 - (1.0 + 7f64.sqrt())).abs() < 1e-9);
        assert!(fs.r1 > fs.r0 && fs.r2 > fs.r1);
        assert!(k.radial(fs.r1) / 3.0 > 2.0 + k.radial(fs.r0));
        let m = 4.0 + k.radial(2.0 * fs.r1);
        let z = fs.r2 / 3.0;
        for s in [1.5, 1.75, 2.0] {
            assert!(k.radial(s * z) - s * k.radial(z) > m + 1.0);
        }
        assert_eq!(default_q_max(&k, Levels::default(), &Payoff::linear(vec![1.0, 0.0]), &[0.0, 0.0], 1.0, 1.0).unwrap(), 5);
    }
}
