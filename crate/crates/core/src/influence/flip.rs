//! Single-site flips by sparse re-solve.
//!
//! Only a box of nodes whose moves cross the flipped cube, or lead into a node
//! that already changed, is recomputed; everything else is read from the solved table.

use serde::Serialize;

use crate::env::{Environment, SiteIndex};
use crate::error::Result;
use crate::solver::{
    occupation_times, solve_prepared, solve_u, solve_value_above, LayerGeom, PathRecord, Region, SolverInputs, StepCost, ValueTable,
};

/// Effect of flipping one site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceRecord {
    pub site: SiteIndex,
    pub omega: f64,
    pub omega_is_b: bool,
    pub u: f64,
    pub sigma_u: f64,
    /// `(sigma_u - u) / 2`
    pub rho: f64,
    /// `beta (sigma_u - u)` if `omega_j = a`, `alpha (sigma_u - u)` otherwise.
    pub delta_weighted: f64,
    pub important: Option<bool>,
    pub very_important: Option<bool>,
    /// The cube lies farther than `R t` from the start.
    pub far_field: bool,
}

/// Recomputed values on a box of node offsets; `NaN` marks "unchanged".
struct Patch {
    lo: Vec<i64>,
    hi: Vec<i64>,
    strides: Vec<usize>,
    vals: Vec<f64>,
}

impl Patch {
    fn new(lo: Vec<i64>, hi: Vec<i64>) -> Patch {
        let d = lo.len();
        let mut strides = vec![1usize; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1] * (hi[i + 1] - lo[i + 1] + 1) as usize;
        }
        let len = strides[0] * (hi[0] - lo[0] + 1) as usize;
        Patch { lo, hi, strides, vals: vec![f64::NAN; len] }
    }

    #[inline]
    fn index(&self, o: &[i64]) -> Option<usize> {
        let mut f = 0;
        for i in 0..o.len() {
            if o[i] < self.lo[i] || o[i] > self.hi[i] {
                return None;
            }
            f += (o[i] - self.lo[i]) as usize * self.strides[i];
        }
        Some(f)
    }

    #[inline]
    fn get(&self, o: &[i64]) -> Option<f64> {
        self.index(o).map(|i| self.vals[i]).filter(|v| !v.is_nan())
    }

    fn shrink(&self, lo: Vec<i64>, hi: Vec<i64>) -> Patch {
        let mut out = Patch::new(lo, hi);
        let d = out.lo.len();
        let mut o = out.lo.clone();
        'rows: loop {
            let a = self.index(&o).expect("sub-box");
            let b = out.index(&o).expect("sub-box");
            let w = (out.hi[d - 1] - out.lo[d - 1] + 1) as usize;
            out.vals[b..b + w].copy_from_slice(&self.vals[a..a + w]);
            for i in (0..d - 1).rev() {
                if o[i] < out.hi[i] {
                    o[i] += 1;
                    continue 'rows;
                }
                o[i] = out.lo[i];
            }
            return out;
        }
    }

    /// Whether `[o - q, o + q]` meets the box.
    fn near(&self, o: &[i64], q: i64) -> bool {
        (0..o.len()).all(|i| o[i] + q >= self.lo[i] && o[i] - q <= self.hi[i])
    }
}

fn resolve_sparse(table: &ValueTable, flipped: &StepCost, j: &[i64]) -> f64 {
    let grid = table.grid();
    let d = grid.dim();
    let stencil = table.stencil();
    let q = grid.q_max;
    let p = grid.p;
    // offsets (from start) of nodes whose moves may cross the cube
    let near_lo: Vec<i64> = (0..d).map(|i| j[i] * p - q - grid.start[i]).collect();
    let near_hi: Vec<i64> = (0..d).map(|i| (j[i] + 1) * p + q - grid.start[i]).collect();
    let mut patch: Option<Patch> = None;
    let mut o = vec![0i64; d];
    let mut n = vec![0i64; d];
    let mut src = vec![0i64; d];
    for k in 1..=grid.steps {
        let gk = LayerGeom::new(d, grid.radius(k));
        let gp = LayerGeom::new(d, grid.radius(k - 1));
        let moff = gp.move_offsets(stencil);
        let prev = table.layer(k - 1);
        let cur = table.layer(k);
        let (mut lo, mut hi) = (near_lo.clone(), near_hi.clone());
        if let Some(pt) = &patch {
            for i in 0..d {
                lo[i] = lo[i].min(pt.lo[i] - q);
                hi[i] = hi[i].max(pt.hi[i] + q);
            }
        }
        for i in 0..d {
            lo[i] = lo[i].max(-gk.radius);
            hi[i] = hi[i].min(gk.radius);
        }
        if (0..d).any(|i| lo[i] > hi[i]) {
            patch = None;
            continue;
        }
        let mut next = Patch::new(lo.clone(), hi.clone());
        let mut clo = hi.clone();
        let mut chi = lo.clone();
        o.copy_from_slice(&lo);
        'rows: loop {
            // pruned or unreachable nodes stay -inf under any flip
            let row0 = {
                o[d - 1] = 0;
                gk.flat(&o).expect("clamped") as isize
            };
            for z in lo[d - 1]..=hi[d - 1] {
                let f = (row0 + z as isize) as usize;
                if cur[f] == f64::NEG_INFINITY {
                    continue;
                }
                o[d - 1] = z;
                for t in 0..d {
                    n[t] = grid.start[t] + o[t];
                }
                let pf = gp.flat(&o).expect("nested");
                let overlay = patch.as_ref().filter(|pt| pt.near(&o, q));
                let (base, class) = flipped.locate(&n);
                let mut best = f64::NEG_INFINITY;
                for (m, &mo) in moff.iter().enumerate() {
                    let mut w = prev[(pf as isize + mo) as usize];
                    if let Some(pt) = overlay {
                        for t in 0..d {
                            src[t] = o[t] + stencil.moves()[m][t];
                        }
                        if let Some(v) = pt.get(&src) {
                            w = v;
                        }
                    }
                    if w == f64::NEG_INFINITY {
                        continue;
                    }
                    let v = w - flipped.cost_at(base, class, m);
                    if v > best {
                        best = v;
                    }
                }
                if best != cur[f] {
                    let i = next.index(&o).expect("inside");
                    next.vals[i] = best;
                    for t in 0..d {
                        clo[t] = clo[t].min(o[t]);
                        chi[t] = chi[t].max(o[t]);
                    }
                }
            }
            for i in (0..d - 1).rev() {
                if o[i] < hi[i] {
                    o[i] += 1;
                    continue 'rows;
                }
                o[i] = lo[i];
            }
            break;
        }
        patch = if (0..d).any(|t| clo[t] > chi[t]) {
            None
        } else if clo == lo && chi == hi {
            Some(next)
        } else {
            Some(next.shrink(clo, chi))
        };
    }
    patch.and_then(|pt| pt.get(&vec![0; d])).unwrap_or(table.u())
}

/// `sigma_j u = u(phi_j omega)` reusing the solved table.
pub fn flip_value(table: &ValueTable, env: &Environment, j: &[i64]) -> Result<f64> {
    let lv = env.levels();
    let Some(flipped) = table.step_cost().flipped(j, lv.a, lv.b) else {
        // no discrete path reaches the cube
        return Ok(table.u());
    };
    let s = resolve_sparse(table, &flipped, j);
    if s >= table.floor() {
        return Ok(s);
    }
    // below the resolved band of a floored table: redo in full
    let grid = table.grid().clone();
    let tab =
        solve_prepared(table.inputs(), grid, std::sync::Arc::new(table.stencil().clone()), std::sync::Arc::new(flipped), Region::All)?;
    Ok(tab.u())
}

/// Fills an [`InfluenceRecord`] for site `j` (importance flags left unset).
pub fn flip_difference(table: &ValueTable, env: &Environment, j: &[i64]) -> Result<InfluenceRecord> {
    let omega_is_b = env.is_b(j)?;
    let lv = env.levels();
    let u = table.u();
    let sigma_u = flip_value(table, env, j)?;
    let diff = sigma_u - u;
    let rs = table.inputs().finite_speed(lv)?.radius * table.inputs().params.horizon;
    let far_field = cube_distance(&table.inputs().params.start, j) > rs;
    Ok(InfluenceRecord {
        site: SiteIndex::new(j.to_vec()),
        omega: if omega_is_b { lv.b } else { lv.a },
        omega_is_b,
        u,
        sigma_u,
        rho: diff / 2.0,
        delta_weighted: if omega_is_b { env.alpha() * diff } else { env.beta() * diff },
        important: None,
        very_important: None,
        far_field,
    })
}

/// `u` and the records of every `a`-site on the argmax path.
///
/// Flipping an `a`-site off every optimal path leaves `u` unchanged, so these
/// are the only `a`-sites with nonzero influence. The table is floored at
/// `u - (b - a) max_j pi_j`, below which no such flip can push `u`.
pub fn argmax_path_flips(env: &Environment, inputs: &SolverInputs) -> Result<(f64, Vec<InfluenceRecord>)> {
    let u = solve_u(env, inputs)?;
    let lv = env.levels();
    let narrow = solve_value_above(env, inputs, u)?;
    let path = PathRecord::evaluate(&narrow, env, narrow.argmax_chain())?;
    let mut sites = Vec::new();
    let mut pmax = 0.0f64;
    for (j, pi) in occupation_times(&path) {
        if pi > 0.0 && !env.is_b(&j.0)? {
            pmax = pmax.max(pi);
            sites.push(j);
        }
    }
    if sites.is_empty() {
        return Ok((u, Vec::new()));
    }
    let table = solve_value_above(env, inputs, u - lv.gap() * pmax - 1e-9 * (1.0 + u.abs()))?;
    let recs = sites.iter().map(|j| flip_difference(&table, env, &j.0)).collect::<Result<_>>()?;
    Ok((u, recs))
}

/// Euclidean distance from `x` to the closed cube `Q_j`.
pub fn cube_distance(x: &[f64], j: &[i64]) -> f64 {
    x.iter()
        .zip(j)
        .map(|(&v, &k)| {
            let (lo, hi) = (k as f64, k as f64 + 1.0);
            let g = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            g * g
        })
        .sum::<f64>()
        .sqrt()
}
