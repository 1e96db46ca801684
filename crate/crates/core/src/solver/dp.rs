//! Backward dynamic programming over the space-time grid.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::kinetic::KineticCost;
use super::params::{FiniteSpeed, Grid, SolverParams};
use super::payoff::Payoff;
use super::stencil::{Stencil, StepCost};
use crate::env::Environment;
use crate::error::{Error, Result};

/// Everything besides the environment that defines an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverInputs {
    pub payoff: Payoff,
    pub kinetic: KineticCost,
    pub params: SolverParams,
}

impl SolverInputs {
    pub fn new(payoff: Payoff, kinetic: KineticCost, params: SolverParams) -> Self {
        SolverInputs { payoff, kinetic, params }
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = self.params.grid()?;
        if self.payoff.dim() != g.dim() {
            return Err(Error::Dimension { expected: g.dim(), got: self.payoff.dim() });
        }
        Ok(g)
    }

    /// Finite-speed constants for this payoff at the start point.
    pub fn finite_speed(&self, levels: crate::env::Levels) -> Result<FiniteSpeed> {
        let c1 = self.payoff.growth_constant(&self.params.start).ok_or(Error::Unreachable)?;
        Ok(FiniteSpeed::compute(&self.kinetic, levels, c1))
    }
}

/// Dense cube `[-r, r]^d` of node offsets around the start, row-major.
#[derive(Clone, Debug)]
pub(crate) struct LayerGeom {
    pub radius: i64,
    pub side: usize,
    pub strides: Vec<usize>,
    pub len: usize,
}

impl LayerGeom {
    pub fn new(dim: usize, radius: i64) -> Self {
        let side = (2 * radius + 1) as usize;
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * side;
        }
        LayerGeom { radius, side, strides, len: side.pow(dim as u32) }
    }

    pub fn flat(&self, o: &[i64]) -> Option<usize> {
        let mut f = 0usize;
        for (i, &v) in o.iter().enumerate() {
            if v.abs() > self.radius {
                return None;
            }
            f += (v + self.radius) as usize * self.strides[i];
        }
        Some(f)
    }

    pub fn offset(&self, mut f: usize, out: &mut [i64]) {
        for i in (0..out.len()).rev() {
            out[i] = (f % self.side) as i64 - self.radius;
            f /= self.side;
        }
    }

    pub fn move_offsets(&self, stencil: &Stencil) -> Vec<isize> {
        stencil.moves().iter().map(|q| q.iter().zip(&self.strides).map(|(&v, &s)| v as isize * s as isize).sum()).collect()
    }
}

/// Shared node update used by every solver variant.
pub(crate) struct Kernel<'a> {
    pub grid: &'a Grid,
    pub stencil: &'a Stencil,
    pub cost: &'a StepCost,
    pub nmoves: usize,
}

impl Kernel<'_> {
    /// Best move from node `n` given next-layer values. Ties keep the first
    /// (lexicographically smallest) move.
    #[inline]
    pub fn update(&self, n: &[i64], prev: &[f64], prev_flat: usize, moff: &[isize]) -> (f64, u16) {
        let (base, class) = self.cost.locate(n);
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u16;
        for m in 0..self.nmoves {
            let w = prev[(prev_flat as isize + moff[m]) as usize];
            if w == f64::NEG_INFINITY {
                continue;
            }
            let v = w - self.cost.cost_at(base, class, m);
            if v > best {
                best = v;
                arg = m as u16;
            }
        }
        (best, arg)
    }

    /// Fills layer `k` from layer `k - 1`; nodes outside `region` get `-inf`.
    pub fn sweep(&self, k: usize, prev: &[f64], cur: &mut [f64], links: &mut [u16], region: &Region) {
        let d = self.grid.dim();
        let g_cur = LayerGeom::new(d, self.grid.radius(k));
        let g_prev = LayerGeom::new(d, self.grid.radius(k - 1));
        let moff = g_prev.move_offsets(self.stencil);
        let side = g_cur.side;
        cur.par_chunks_mut(side).zip(links.par_chunks_mut(side)).enumerate().for_each(|(row, (vals, lks))| {
            let mut o = vec![0i64; d];
            let mut n = vec![0i64; d];
            g_cur.offset(row * side, &mut o);
            let range = region.row(k, &o[..d - 1], g_cur.radius);
            for (j, (v, l)) in vals.iter_mut().zip(lks.iter_mut()).enumerate() {
                let z = j as i64 - g_cur.radius;
                if !range.is_some_and(|(lo, hi)| lo <= z && z <= hi) {
                    *v = f64::NEG_INFINITY;
                    *l = 0;
                    continue;
                }
                o[d - 1] = z;
                for t in 0..d {
                    n[t] = self.grid.start[t] + o[t];
                }
                let pf = g_prev.flat(&o).expect("inner layer nests in outer");
                let (best, arg) = self.update(&n, prev, pf, &moff);
                *v = best;
                *l = arg;
            }
        });
    }
}

/// Nodes retained by a solve. `Above` keeps only nodes through which some path
/// could still reach value `floor`, using the linear-payoff bound
/// `g(start) + eta.x + k dt (K*(eta) - a) - s dt (K(|x|/(s dt)) + a)`
/// for a node at offset `x` with `k` steps remaining after `s` steps taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    All,
    Above(LinearBound),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearBound {
    eta: Vec<f64>,
    kinetic: KineticCost,
    kstar: f64,
    a: f64,
    gstart: f64,
    h: f64,
    dt: f64,
    steps: usize,
    floor: f64,
}

impl LinearBound {
    fn value(&self, o: &[i64], k: usize) -> f64 {
        let s = self.steps - k;
        let mut lin = 0.0;
        let mut r2 = 0.0;
        for (i, &v) in o.iter().enumerate() {
            let x = v as f64 * self.h;
            lin += self.eta[i] * x;
            r2 += x * x;
        }
        let ahead = k as f64 * self.dt * (self.kstar - self.a);
        let behind = if s == 0 {
            if r2 > 0.0 {
                return f64::NEG_INFINITY;
            }
            0.0
        } else {
            let sd = s as f64 * self.dt;
            sd * (self.kinetic.radial(r2.sqrt() / sd) + self.a)
        };
        self.gstart + lin + ahead - behind
    }
}

impl Region {
    /// Linear-payoff pruning at `floor`; `All` for other payoffs.
    pub fn above(inputs: &SolverInputs, grid: &Grid, a: f64, floor: f64) -> Region {
        match inputs.payoff.slope() {
            Some(eta) if floor > f64::NEG_INFINITY => Region::Above(LinearBound {
                eta: eta.to_vec(),
                kinetic: inputs.kinetic,
                kstar: inputs.kinetic.legendre(eta),
                a,
                gstart: inputs.payoff.eval(&grid.position(&grid.start)),
                h: grid.h,
                dt: grid.dt,
                steps: grid.steps,
                floor,
            }),
            _ => Region::All,
        }
    }

    pub fn floor(&self) -> f64 {
        match self {
            Region::All => f64::NEG_INFINITY,
            Region::Above(b) => b.floor,
        }
    }

    /// Retained interval of the last coordinate on the row with the given leading offsets.
    pub fn row(&self, k: usize, prefix: &[i64], radius: i64) -> Option<(i64, i64)> {
        let b = match self {
            Region::All => return Some((-radius, radius)),
            Region::Above(b) => b,
        };
        let mut o = prefix.to_vec();
        o.push(0);
        let last = o.len() - 1;
        let mut f = |z: i64| {
            o[last] = z;
            b.value(&o, k)
        };
        // the bound is concave along the row
        let (mut lo, mut hi) = (-radius, radius);
        while hi - lo > 2 {
            let m1 = lo + (hi - lo) / 3;
            let m2 = hi - (hi - lo) / 3;
            if f(m1) < f(m2) {
                lo = m1 + 1;
            } else {
                hi = m2;
            }
        }
        let top = (lo..=hi).max_by(|&x, &y| f(x).total_cmp(&f(y))).expect("nonempty");
        if f(top) < b.floor {
            return None;
        }
        let (mut l, mut r) = (-radius, top);
        while l < r {
            let m = l + (r - l) / 2;
            if f(m) >= b.floor {
                r = m;
            } else {
                l = m + 1;
            }
        }
        let left = l;
        let (mut l, mut r) = (top, radius);
        while l < r {
            let m = r - (r - l) / 2;
            if f(m) >= b.floor {
                l = m;
            } else {
                r = m - 1;
            }
        }
        Some((left, l))
    }

    pub fn contains(&self, k: usize, o: &[i64], radius: i64) -> bool {
        let d = o.len();
        self.row(k, &o[..d - 1], radius).is_some_and(|(lo, hi)| lo <= o[d - 1] && o[d - 1] <= hi)
    }
}

fn terminal_layer(grid: &Grid, payoff: &Payoff, region: &Region) -> Vec<f64> {
    let d = grid.dim();
    let geom = LayerGeom::new(d, grid.radius(0));
    let mut out = vec![f64::NEG_INFINITY; geom.len];
    let mut o = vec![0i64; d];
    let mut n = vec![0i64; d];
    for (row, vals) in out.chunks_mut(geom.side).enumerate() {
        geom.offset(row * geom.side, &mut o);
        if let Some((lo, hi)) = region.row(0, &o[..d - 1], geom.radius) {
            for z in lo..=hi {
                o[d - 1] = z;
                for t in 0..d {
                    n[t] = grid.start[t] + o[t];
                }
                vals[(z + geom.radius) as usize] = payoff.eval(&grid.position(&n));
            }
        }
    }
    out
}

pub(crate) struct Prepared {
    pub grid: Grid,
    pub stencil: Arc<Stencil>,
    pub cost: Arc<StepCost>,
}

pub(crate) fn prepare(env: &Environment, inputs: &SolverInputs) -> Result<Prepared> {
    let grid = inputs.grid()?;
    grid.check_box(env.bbox())?;
    let stencil = Arc::new(Stencil::new(&grid, &inputs.kinetic));
    let cost = Arc::new(StepCost::new(&stencil, &grid, env, &grid.required_box()));
    Ok(Prepared { grid, stencil, cost })
}

/// Solved value field with back-links.
#[derive(Clone, Debug)]
pub struct ValueTable {
    pub(crate) inputs: SolverInputs,
    pub(crate) grid: Grid,
    pub(crate) stencil: Arc<Stencil>,
    pub(crate) cost: Arc<StepCost>,
    /// `layers[k]`: values with `k` steps remaining.
    pub(crate) layers: Vec<Vec<f64>>,
    pub(crate) links: Vec<Vec<u16>>,
    pub(crate) region: Region,
    pub(crate) u: f64,
}

#[derive(Serialize)]
struct TableHeader<'a> {
    dim: usize,
    p: i64,
    h: f64,
    dt: f64,
    steps: usize,
    q_max: i64,
    start: &'a [i64],
    layer_radii: Vec<i64>,
    layer_lengths: Vec<usize>,
    dtype: &'static str,
    order: &'static str,
    kinetic: KineticCost,
    payoff: String,
    floor: f64,
    u: f64,
}

impl ValueTable {
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn inputs(&self) -> &SolverInputs {
        &self.inputs
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn step_cost(&self) -> &StepCost {
        &self.cost
    }

    /// Values below this floor may be underestimated; `-inf` for a full solve.
    pub fn floor(&self) -> f64 {
        self.region.floor()
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn layer(&self, k: usize) -> &[f64] {
        &self.layers[k]
    }

    pub(crate) fn geom(&self, k: usize) -> LayerGeom {
        LayerGeom::new(self.grid.dim(), self.grid.radius(k))
    }

    /// `W_k(n)` for an absolute node `n`.
    pub fn value(&self, k: usize, n: &[i64]) -> Option<f64> {
        let o: Vec<i64> = n.iter().zip(&self.grid.start).map(|(a, b)| a - b).collect();
        self.geom(k).flat(&o).map(|f| self.layers[k][f])
    }

    /// Argmax move index at node `n`, layer `k >= 1`.
    pub fn link(&self, k: usize, n: &[i64]) -> Option<usize> {
        if k == 0 {
            return None;
        }
        let o: Vec<i64> = n.iter().zip(&self.grid.start).map(|(a, b)| a - b).collect();
        self.geom(k).flat(&o).map(|f| self.links[k][f] as usize)
    }

    /// Argmax chain of nodes from the start.
    pub fn argmax_chain(&self) -> Vec<Vec<i64>> {
        let mut n = self.grid.start.clone();
        let mut out = vec![n.clone()];
        for k in (1..=self.grid.steps).rev() {
            let m = self.link(k, &n).expect("chain stays in the cone");
            for (a, b) in n.iter_mut().zip(&self.stencil.moves()[m]) {
                *a += b;
            }
            out.push(n.clone());
        }
        out
    }

    pub fn header_json(&self) -> serde_json::Value {
        let g = &self.grid;
        let h = TableHeader {
            dim: g.dim(),
            p: g.p,
            h: g.h,
            dt: g.dt,
            steps: g.steps,
            q_max: g.q_max,
            start: &g.start,
            layer_radii: (0..=g.steps).map(|k| g.radius(k)).collect(),
            layer_lengths: self.layers.iter().map(Vec::len).collect(),
            dtype: "f64-le",
            order: "layer 0 (terminal) first, row-major offsets from start, -inf = unreachable",
            kinetic: self.inputs.kinetic,
            payoff: self.inputs.payoff.describe(),
            floor: self.floor(),
            u: self.u,
        };
        serde_json::to_value(h).expect("header serialises")
    }

    /// Writes all layers as little-endian `f64`, terminal layer first.
    pub fn write_layers<W: Write>(&self, mut w: W) -> Result<()> {
        for layer in &self.layers {
            let mut buf = Vec::with_capacity(layer.len() * 8);
            for v in layer {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }
}

/// Full solve with back-links. `u = W_steps(start)`.
pub fn solve_value(env: &Environment, inputs: &SolverInputs) -> Result<ValueTable> {
    let Prepared { grid, stencil, cost } = prepare(env, inputs)?;
    solve_prepared(inputs, grid, stencil, cost, Region::All)
}

/// Solve that only resolves values at or above `floor` (linear payoffs).
///
/// `u`, the argmax chain and every path with value `>= floor` coincide with
/// the full solve. Errors if `u` itself falls below the floor.
pub fn solve_value_above(env: &Environment, inputs: &SolverInputs, floor: f64) -> Result<ValueTable> {
    let Prepared { grid, stencil, cost } = prepare(env, inputs)?;
    let floor = floor - 1e-9 * (1.0 + floor.abs());
    let region = Region::above(inputs, &grid, env.levels().a, floor);
    let tab = solve_prepared(inputs, grid, stencil, cost, region)?;
    if tab.u < floor {
        return Err(Error::param("floor", "value lies below the requested floor"));
    }
    Ok(tab)
}

pub(crate) fn solve_prepared(
    inputs: &SolverInputs,
    grid: Grid,
    stencil: Arc<Stencil>,
    cost: Arc<StepCost>,
    region: Region,
) -> Result<ValueTable> {
    let kern = Kernel { grid: &grid, stencil: &stencil, cost: &cost, nmoves: stencil.len() };
    let mut layers = Vec::with_capacity(grid.steps + 1);
    let mut links = Vec::with_capacity(grid.steps + 1);
    layers.push(terminal_layer(&grid, &inputs.payoff, &region));
    links.push(Vec::new());
    for k in 1..=grid.steps {
        let len = LayerGeom::new(grid.dim(), grid.radius(k)).len;
        let mut cur = vec![0.0; len];
        let mut lk = vec![0u16; len];
        kern.sweep(k, &layers[k - 1], &mut cur, &mut lk, &region);
        layers.push(cur);
        links.push(lk);
    }
    let u = layers[grid.steps][0];
    if u == f64::NEG_INFINITY {
        return Err(Error::Unreachable);
    }
    Ok(ValueTable { inputs: inputs.clone(), grid, stencil, cost, layers, links, region, u })
}

/// Value of a move sequence from `start`, accumulated backwards from the payoff
/// exactly as the recursion does.
pub(crate) fn path_value(grid: &Grid, stencil: &Stencil, cost: &StepCost, payoff: &Payoff, moves: &[usize]) -> f64 {
    let mut nodes = Vec::with_capacity(moves.len() + 1);
    let mut n = grid.start.clone();
    nodes.push(n.clone());
    for &m in moves {
        for (a, b) in n.iter_mut().zip(&stencil.moves()[m]) {
            *a += b;
        }
        nodes.push(n.clone());
    }
    let mut v = payoff.eval(&grid.position(&n));
    for (i, &m) in moves.iter().enumerate().rev() {
        v -= cost.cost(&nodes[i], m);
    }
    v
}

/// Value of the better of two explicit paths: staying put, and repeating the
/// move that is best against a flat potential. A lower bound on `u`.
pub(crate) fn simple_lower_bound(inputs: &SolverInputs, grid: &Grid, stencil: &Stencil, cost: &StepCost) -> f64 {
    let stay = path_value(grid, stencil, cost, &inputs.payoff, &vec![stencil.zero_move(); grid.steps]);
    let Some(eta) = inputs.payoff.slope() else {
        return stay;
    };
    let gain =
        |m: usize| -> f64 { stencil.moves()[m].iter().zip(eta).map(|(&q, e)| q as f64 * grid.h * e).sum::<f64>() - stencil.kinetic(m) };
    let greedy = (0..stencil.len()).max_by(|&x, &y| gain(x).total_cmp(&gain(y))).expect("nonempty stencil");
    stay.max(path_value(grid, stencil, cost, &inputs.payoff, &vec![greedy; grid.steps]))
}

/// `u` only, without back-links. For linear payoffs nodes that provably cannot
/// lie on an optimal path are skipped; the result equals `solve_value(..).u()` bit for bit.
pub fn solve_u(env: &Environment, inputs: &SolverInputs) -> Result<f64> {
    let Prepared { grid, stencil, cost } = prepare(env, inputs)?;
    solve_u_prepared(inputs, &grid, &stencil, &cost, env.levels().a)
}

pub(crate) fn solve_u_prepared(inputs: &SolverInputs, grid: &Grid, stencil: &Stencil, cost: &StepCost, a: f64) -> Result<f64> {
    let kern = Kernel { grid, stencil, cost, nmoves: stencil.len() };
    let d = grid.dim();
    let mut lb = simple_lower_bound(inputs, grid, stencil, cost);
    if grid.q_max > 1 && inputs.payoff.slope().is_some() {
        // a unit-stencil solve is a cheap, much tighter lower bound
        let g1 = Grid { q_max: 1, ..grid.clone() };
        let s1 = Stencil::new(&g1, &inputs.kinetic);
        let c1 = cost.restencil(&s1, &g1);
        if let Ok(u1) = solve_u_prepared(inputs, &g1, &s1, &c1, a) {
            lb = lb.max(u1);
        }
    }
    let region = Region::above(inputs, grid, a, lb - 1e-9 * (1.0 + lb.abs()));
    let mut prev = terminal_layer(grid, &inputs.payoff, &region);
    let mut cur = Vec::new();
    let mut lk = Vec::new();
    for k in 1..=grid.steps {
        let len = LayerGeom::new(d, grid.radius(k)).len;
        cur.resize(len, 0.0);
        lk.resize(len, 0);
        kern.sweep(k, &prev, &mut cur[..len], &mut lk[..len], &region);
        std::mem::swap(&mut prev, &mut cur);
    }
    let u = prev[0];
    if u == f64::NEG_INFINITY {
        return Err(Error::Unreachable);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{LatticeBox, Levels};

    fn inputs(t: f64, h: f64, q: usize, eta: Vec<f64>) -> SolverInputs {
        SolverInputs::new(Payoff::linear(eta), KineticCost::quadratic(), SolverParams::new(t, h, q, vec![0.0, 0.0]))
    }

    #[test]
    fn constant_potential_stationary() {
        let inp = inputs(5.0, 1.0, 2, vec![0.0, 0.0]);
        let env = Environment::sample(inp.grid().unwrap().required_box(), 0.0, Levels::default(), 1).unwrap();
        let tab = solve_value(&env, &inp).unwrap();
        assert_eq!(tab.u(), -5.0);
        assert!(tab.argmax_chain().iter().all(|n| n == &vec![0, 0]));
        assert_eq!(solve_u(&env, &inp).unwrap(), -5.0);
    }

    #[test]
    fn pruned_matches_full() {
        for seed in 0..20 {
            let inp = inputs(6.0, 0.5, 4, vec![0.75, -0.5]);
            let env = Environment::sample(inp.grid().unwrap().required_box(), 0.5, Levels::default(), seed).unwrap();
            let full = solve_value(&env, &inp).unwrap().u();
            assert_eq!(solve_u(&env, &inp).unwrap(), full);
        }
    }

    #[test]
    fn floored_table_keeps_optimal_structure() {
        for seed in 0..10 {
            let inp = inputs(6.0, 0.5, 4, vec![1.0, 0.25]);
            let env = Environment::sample(inp.grid().unwrap().required_box(), 0.5, Levels::default(), seed).unwrap();
            let full = solve_value(&env, &inp).unwrap();
            let part = solve_value_above(&env, &inp, full.u() - 1.0).unwrap();
            assert_eq!(part.u(), full.u());
            assert_eq!(part.argmax_chain(), full.argmax_chain());
            let kept = part.layers.iter().flatten().filter(|v| v.is_finite()).count();
            let all = full.layers.iter().flatten().count();
            assert!(kept < all);
            for k in 0..=6 {
                for (x, y) in part.layer(k).iter().zip(full.layer(k)) {
                    assert!(x <= y);
                }
            }
        }
    }

    #[test]
    fn box_too_small_is_reported() {
        let inp = inputs(4.0, 1.0, 2, vec![1.0, 0.0]);
        let env = Environment::sample(LatticeBox::around(&[0, 0], 3).unwrap(), 0.5, Levels::default(), 1).unwrap();
        assert!(matches!(solve_value(&env, &inp), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn argmax_chain_reproduces_u() {
        let inp = inputs(5.0, 0.5, 3, vec![1.0, 0.0]);
        let env = Environment::sample(inp.grid().unwrap().required_box(), 0.5, Levels::default(), 4).unwrap();
        let tab = solve_value(&env, &inp).unwrap();
        let chain = tab.argmax_chain();
        let moves: Vec<usize> = (0..5)
            .map(|i| {
                let q: Vec<i64> = chain[i + 1].iter().zip(&chain[i]).map(|(a, b)| a - b).collect();
                tab.stencil().moves().iter().position(|m| *m == q).unwrap()
            })
            .collect();
        assert_eq!(path_value(tab.grid(), tab.stencil(), tab.step_cost(), &inp.payoff, &moves), tab.u());
    }
}
