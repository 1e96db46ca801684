//! Move set and per-move segment templates.
//!
//! A move from node `n` to `n + q` crosses cubes that depend only on the
//! residue `n mod p`, so the cube pieces are precomputed once per residue class.

use super::kinetic::KineticCost;
use super::params::Grid;
use crate::env::{Environment, LatticeBox};
use crate::geometry::segment_pieces;

#[derive(Clone, Debug)]
pub struct Stencil {
    dim: usize,
    p: i64,
    moves: Vec<Vec<i64>>,
    /// `dt * K(q h / dt)` per move.
    kin: Vec<f64>,
    /// Indexed by `class * moves + m`: cube offsets relative to `floor(n/p)` and fractions.
    templates: Vec<Vec<(Vec<i64>, f64)>>,
}

impl Stencil {
    pub fn new(grid: &Grid, kinetic: &KineticCost) -> Stencil {
        let d = grid.dim();
        let q = grid.q_max;
        let side = (2 * q + 1) as usize;
        let count = side.pow(d as u32);
        let mut moves = Vec::with_capacity(count);
        for f in 0..count {
            let mut v = vec![0i64; d];
            let mut r = f;
            for i in (0..d).rev() {
                v[i] = (r % side) as i64 - q;
                r /= side;
            }
            moves.push(v);
        }
        let kin = moves
            .iter()
            .map(|m| {
                let vel: Vec<f64> = m.iter().map(|&v| v as f64 * grid.h / grid.dt).collect();
                grid.dt * kinetic.eval(&vel)
            })
            .collect();
        let p = grid.p;
        let classes = (p as usize).pow(d as u32);
        let mut templates = Vec::with_capacity(classes * count);
        for c in 0..classes {
            let mut r = vec![0i64; d];
            let mut rem = c;
            for i in (0..d).rev() {
                r[i] = (rem % p as usize) as i64;
                rem /= p as usize;
            }
            let x0: Vec<f64> = r.iter().map(|&v| v as f64 / p as f64).collect();
            for m in &moves {
                let x1: Vec<f64> = r.iter().zip(m).map(|(&a, &b)| (a + b) as f64 / p as f64).collect();
                templates.push(segment_pieces(&x0, &x1).into_iter().map(|pc| (pc.cube, pc.frac)).collect());
            }
        }
        Stencil { dim: d, p, moves, kin, templates }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn moves(&self) -> &[Vec<i64>] {
        &self.moves
    }

    pub fn kinetic(&self, m: usize) -> f64 {
        self.kin[m]
    }

    pub fn class_of(&self, n: &[i64]) -> usize {
        n.iter().fold(0usize, |acc, &v| acc * self.p as usize + v.rem_euclid(self.p) as usize)
    }

    /// Index of the stationary move.
    pub fn zero_move(&self) -> usize {
        self.len() / 2
    }

    /// Whether move `m` lies on the boundary of the stencil square.
    pub fn on_boundary(&self, m: usize, q_max: i64) -> bool {
        self.moves[m].iter().any(|v| v.abs() == q_max)
    }
}

/// Cost of every move, bound to one environment.
#[derive(Clone, Debug)]
pub struct StepCost {
    dim: usize,
    p: i64,
    dt: f64,
    nmoves: usize,
    kin: Vec<f64>,
    bbox: LatticeBox,
    strides: Vec<usize>,
    levels: Vec<f64>,
    /// Per template: (flat cube offset, fraction) ranges into `pieces`.
    spans: Vec<(u32, u32)>,
    pieces: Vec<(isize, f64)>,
}

impl StepCost {
    /// Levels are copied for `window` only, which must contain every cube the grid can touch.
    pub fn new(stencil: &Stencil, grid: &Grid, env: &Environment, window: &LatticeBox) -> StepCost {
        let levels = if env.bbox() == window {
            env.dense_levels()
        } else {
            let lv = env.levels();
            window.sites().map(|k| if env.is_b(&k).expect("window inside box") { lv.b } else { lv.a }).collect()
        };
        Self::from_levels(stencil, grid, window.clone(), levels)
    }

    pub(crate) fn from_levels(stencil: &Stencil, grid: &Grid, bbox: LatticeBox, levels: Vec<f64>) -> StepCost {
        let strides = bbox.strides();
        let mut spans = Vec::with_capacity(stencil.templates.len());
        let mut pieces = Vec::new();
        for t in &stencil.templates {
            let start = pieces.len() as u32;
            for (cube, frac) in t {
                let off: isize = cube.iter().zip(&strides).map(|(&c, &s)| c as isize * s as isize).sum();
                pieces.push((off, *frac));
            }
            spans.push((start, pieces.len() as u32));
        }
        StepCost {
            dim: stencil.dim,
            p: stencil.p,
            dt: grid.dt,
            nmoves: stencil.len(),
            kin: stencil.kin.clone(),
            bbox,
            strides,
            levels,
            spans,
            pieces,
        }
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    /// Same environment window under another stencil.
    pub(crate) fn restencil(&self, stencil: &Stencil, grid: &Grid) -> StepCost {
        StepCost::from_levels(stencil, grid, self.bbox.clone(), self.levels.clone())
    }

    /// `(flat index of floor(n/p), residue class)`.
    #[inline]
    pub fn locate(&self, n: &[i64]) -> (usize, usize) {
        let mut base = 0usize;
        let mut class = 0usize;
        for i in 0..self.dim {
            let c = n[i].div_euclid(self.p);
            base += (c - self.bbox.lo()[i]) as usize * self.strides[i];
            class = class * self.p as usize + n[i].rem_euclid(self.p) as usize;
        }
        (base, class * self.nmoves)
    }

    /// `dt K(q/dt) + int V` for move `m` from the located node.
    #[inline]
    pub fn cost_at(&self, base: usize, class_off: usize, m: usize) -> f64 {
        let (s, e) = self.spans[class_off + m];
        let mut acc = 0.0;
        for &(off, frac) in &self.pieces[s as usize..e as usize] {
            acc += frac * self.levels[(base as isize + off) as usize];
        }
        self.kin[m] + self.dt * acc
    }

    pub fn cost(&self, n: &[i64], m: usize) -> f64 {
        let (b, c) = self.locate(n);
        self.cost_at(b, c, m)
    }

    /// Same model with site `j` at the opposite level.
    pub fn flipped(&self, j: &[i64], a: f64, b: f64) -> Option<StepCost> {
        let f = self.bbox.flat_index(j)?;
        let mut out = self.clone();
        out.levels[f] = if out.levels[f] == a { b } else { a };
        Some(out)
    }

    /// Whether move `m` from the located node passes through the cube at flat index `flat`.
    pub fn touches(&self, base: usize, class_off: usize, m: usize, flat: usize) -> bool {
        let (s, e) = self.spans[class_off + m];
        self.pieces[s as usize..e as usize].iter().any(|&(off, _)| (base as isize + off) as usize == flat)
    }
}
