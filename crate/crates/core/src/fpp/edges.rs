use std::io::{Read, Write};
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::env::{chacha_from_seed, read_raw, unit_f64, write_raw, LatticeBox, Levels, RawSnapshot, RngAlgorithm, SnapshotKind};
use crate::error::{Error, Result};

/// The edge from `from` to `from + e_axis`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: Vec<i64>,
    pub axis: usize,
}

/// Edge weights over the vertices of a box. Edge `(v, i)` has bit index
/// `flat(v) * d + i`; set means weight `b`. Bits of edges that would leave
/// the box are drawn but never used.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeEnvironment {
    bbox: LatticeBox,
    alpha: f64,
    levels: Levels,
    seed: u64,
    bits: Arc<Vec<u64>>,
}

impl EdgeEnvironment {
    /// Each edge independently `a` with probability `alpha`; requires `0 < a < b`.
    pub fn sample(bbox: LatticeBox, alpha: f64, levels: Levels, seed: u64) -> Result<Self> {
        let levels = Self::check(&bbox, alpha, levels)?;
        let n = bbox.len() * bbox.dim();
        let mut bits = vec![0u64; n.div_ceil(64)];
        let mut rng = chacha_from_seed(seed);
        for i in 0..n {
            if unit_f64(rng.next_u64()) >= alpha {
                bits[i >> 6] |= 1u64 << (i & 63);
            }
        }
        Ok(EdgeEnvironment { bbox, alpha, levels, seed, bits: Arc::new(bits) })
    }

    /// Explicit weights; `is_b(edge)` selects level `b`.
    pub fn from_fn(bbox: LatticeBox, levels: Levels, is_b: impl Fn(&Edge) -> bool) -> Result<Self> {
        let levels = Self::check(&bbox, 0.5, levels)?;
        let d = bbox.dim();
        let n = bbox.len() * d;
        let mut bits = vec![0u64; n.div_ceil(64)];
        for (f, v) in bbox.sites().enumerate() {
            for axis in 0..d {
                if is_b(&Edge { from: v.clone(), axis }) {
                    let i = f * d + axis;
                    bits[i >> 6] |= 1u64 << (i & 63);
                }
            }
        }
        Ok(EdgeEnvironment { bbox, alpha: 0.5, levels, seed: 0, bits: Arc::new(bits) })
    }

    fn check(bbox: &LatticeBox, alpha: f64, levels: Levels) -> Result<Levels> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let levels = Levels::new(levels.a, levels.b)?;
        if !(levels.a > 0.0) {
            return Err(Error::param("a", "edge weights must be positive"));
        }
        if bbox.dim() < 2 {
            return Err(Error::param("dimension", "must be at least 2"));
        }
        Ok(levels)
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn bbox(&self) -> &LatticeBox {
        &self.bbox
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn bit_index(&self, e: &Edge) -> Result<usize> {
        let inside = e.axis < self.dim() && self.bbox.contains(&e.from) && {
            let mut to = e.from.clone();
            to[e.axis] += 1;
            self.bbox.contains(&to)
        };
        if !inside {
            return Err(Error::OutOfBox { site: e.from.clone() });
        }
        Ok(self.bbox.flat_index(&e.from).expect("inside") * self.dim() + e.axis)
    }

    #[inline]
    pub(crate) fn weight_at(&self, flat_vertex: usize, axis: usize) -> f64 {
        let i = flat_vertex * self.dim() + axis;
        if self.bits[i >> 6] >> (i & 63) & 1 == 1 {
            self.levels.b
        } else {
            self.levels.a
        }
    }

    pub fn weight(&self, e: &Edge) -> Result<f64> {
        let i = self.bit_index(e)?;
        Ok(if self.bits[i >> 6] >> (i & 63) & 1 == 1 { self.levels.b } else { self.levels.a })
    }

    /// Same weights with edge `e` at the opposite level.
    pub fn flip_edge(&self, e: &Edge) -> Result<Self> {
        let i = self.bit_index(e)?;
        let mut out = self.clone();
        Arc::make_mut(&mut out.bits)[i >> 6] ^= 1u64 << (i & 63);
        Ok(out)
    }

    /// Same weights with edge `e` set to `a`.
    pub fn lower_edge(&self, e: &Edge) -> Result<Self> {
        let i = self.bit_index(e)?;
        let mut out = self.clone();
        Arc::make_mut(&mut out.bits)[i >> 6] &= !(1u64 << (i & 63));
        Ok(out)
    }

    /// Every edge with both endpoints in the box.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.bbox.sites().flat_map(move |v| {
            (0..self.dim()).filter_map(move |axis| {
                let mut to = v.clone();
                to[axis] += 1;
                self.bbox.contains(&to).then(|| Edge { from: v.clone(), axis })
            })
        })
    }
}

/// Snapshot with the edge payload type tag.
pub fn write_edge_snapshot<W: Write>(w: W, env: &EdgeEnvironment) -> Result<()> {
    write_raw(
        w,
        &RawSnapshot {
            kind: SnapshotKind::Edges,
            bbox: env.bbox.clone(),
            alpha: env.alpha,
            levels: env.levels,
            seed: env.seed,
            rng: RngAlgorithm::ChaCha8,
            bits: env.bits.to_vec(),
            nbits: env.bbox.len() * env.dim(),
        },
    )
}

/// Reads an edge environment; site snapshots are rejected.
pub fn read_edge_snapshot<R: Read>(r: R) -> Result<EdgeEnvironment> {
    let raw = read_raw(r, |kind, d| if kind == SnapshotKind::Edges { d } else { 1 })?;
    if raw.kind != SnapshotKind::Edges {
        return Err(Error::Snapshot("expected an edge environment, found a site environment".into()));
    }
    let levels = EdgeEnvironment::check(&raw.bbox, raw.alpha, raw.levels)?;
    Ok(EdgeEnvironment { bbox: raw.bbox, alpha: raw.alpha, levels, seed: raw.seed, bits: Arc::new(raw.bits) })
}
