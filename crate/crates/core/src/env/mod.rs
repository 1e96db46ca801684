//! Random piecewise-constant potential on the unit-cube lattice.
//!
//! Each site `k` carries a level `omega_k` in `{a, b}`; the potential equals
//! that level on the half-open cube `Q_k = k + [0,1)^d`. Sites are i.i.d. with
//! `P(omega_k = a) = alpha`.

mod snapshot;

pub(crate) use snapshot::{read_raw, write_raw, RawSnapshot};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotKind, FORMAT_VERSION, MAGIC};

use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_pieces, Piece};

/// Integer lattice vector identifying the cube `k + [0,1)^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteIndex(pub Vec<i64>);

impl SiteIndex {
    pub fn new(k: impl Into<Vec<i64>>) -> Self {
        SiteIndex(k.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Euclidean norm of the corner vector.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Half-open integer box `[lo_0, hi_0) x ... x [lo_{d-1}, hi_{d-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() || lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(Error::EmptyBox);
        }
        Ok(LatticeBox { lo, hi })
    }

    /// `[-radius, radius]^d` shifted by `center`.
    pub fn around(center: &[i64], radius: i64) -> Result<Self> {
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius + 1).collect();
        LatticeBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis]) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.dim() && k.iter().enumerate().all(|(i, &v)| v >= self.lo[i] && v < self.hi[i])
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        other.dim() == self.dim() && (0..self.dim()).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.extent(i + 1);
        }
        s
    }

    /// Lexicographic (row-major) position of `k`.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut idx = 0usize;
        for (i, &v) in k.iter().enumerate() {
            idx = idx * self.extent(i) + (v - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn site_at(&self, mut flat: usize) -> Vec<i64> {
        let d = self.dim();
        let mut k = vec![0i64; d];
        for i in (0..d).rev() {
            let e = self.extent(i);
            k[i] = self.lo[i] + (flat % e) as i64;
            flat /= e;
        }
        k
    }

    /// Sites in lexicographic order.
    pub fn sites(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |f| self.site_at(f))
    }

    pub fn translated(&self, by: &[i64]) -> LatticeBox {
        LatticeBox { lo: self.lo.iter().zip(by).map(|(l, z)| l + z).collect(), hi: self.hi.iter().zip(by).map(|(h, z)| h + z).collect() }
    }
}

/// The two potential levels `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub a: f64,
    pub b: f64,
}

impl Levels {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidLevels { a, b });
        }
        Ok(Levels { a, b })
    }

    pub fn gap(&self) -> f64 {
        self.b - self.a
    }
}

impl Default for Levels {
    fn default() -> Self {
        Levels { a: 0.0, b: 1.0 }
    }
}

/// Identifier of the site-sampling stream, stored in snapshots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RngAlgorithm {
    /// ChaCha with 8 rounds; key = seed as little-endian u64 followed by 24
    /// zero bytes, stream 0. Each site consumes one `u64`; the site is `a`
    /// iff `(x >> 11) * 2^-53 < alpha`.
    ChaCha8 = 1,
}

impl RngAlgorithm {
    pub fn id(self) -> u16 {
        self as u16
    }

    pub fn from_id(id: u16) -> Option<Self> {
        match id {
            1 => Some(RngAlgorithm::ChaCha8),
            _ => None,
        }
    }
}

pub(crate) fn chacha_from_seed(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

#[inline]
pub(crate) fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Site values over a finite box. Bit set = level `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    bbox: LatticeBox,
    alpha: f64,
    levels: Levels,
    seed: u64,
    rng: RngAlgorithm,
    bits: Arc<Vec<u64>>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

impl Environment {
    /// Draws every site independently: `a` with probability `alpha`.
    pub fn sample(bbox: LatticeBox, alpha: f64, levels: Levels, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let levels = Levels::new(levels.a, levels.b)?;
        if bbox.dim() < 2 {
            return Err(Error::param("dimension", "must be at least 2"));
        }
        let n = bbox.len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        let mut rng = chacha_from_seed(seed);
        for i in 0..n {
            if unit_f64(rng.next_u64()) >= alpha {
                bits[i >> 6] |= 1u64 << (i & 63);
            }
        }
        Ok(Environment { bbox, alpha, levels, seed, rng: RngAlgorithm::ChaCha8, bits: Arc::new(bits) })
    }

    /// Builds an environment from an explicit rule; `is_b(k)` selects level `b`.
    pub fn from_fn(bbox: LatticeBox, alpha: f64, levels: Levels, mut is_b: impl FnMut(&[i64]) -> bool) -> Result<Self> {
        check_alpha(alpha)?;
        let levels = Levels::new(levels.a, levels.b)?;
        let n = bbox.len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        for i in 0..n {
            if is_b(&bbox.site_at(i)) {
                bits[i >> 6] |= 1u64 << (i & 63);
            }
        }
        Ok(Environment { bbox, alpha, levels, seed: 0, rng: RngAlgorithm::ChaCha8, bits: Arc::new(bits) })
    }

    pub(crate) fn from_parts(bbox: LatticeBox, alpha: f64, levels: Levels, seed: u64, rng: RngAlgorithm, bits: Vec<u64>) -> Result<Self> {
        check_alpha(alpha)?;
        let levels = Levels::new(levels.a, levels.b)?;
        if bits.len() != bbox.len().div_ceil(64) {
            return Err(Error::Snapshot("site payload length mismatch".into()));
        }
        Ok(Environment { bbox, alpha, levels, seed, rng, bits: Arc::new(bits) })
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

    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn levels(&self) -> Levels {
        self.levels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng_algorithm(&self) -> RngAlgorithm {
        self.rng
    }

    pub(crate) fn raw_bits(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    fn bit(&self, flat: usize) -> bool {
        (self.bits[flat >> 6] >> (flat & 63)) & 1 == 1
    }

    /// True when site `k` carries level `b`.
    pub fn is_b(&self, k: &[i64]) -> Result<bool> {
        let f = self.bbox.flat_index(k).ok_or_else(|| Error::OutOfBox { site: k.to_vec() })?;
        Ok(self.bit(f))
    }

    /// `omega_k`.
    pub fn site_value(&self, k: &[i64]) -> Result<f64> {
        Ok(if self.is_b(k)? { self.levels.b } else { self.levels.a })
    }

    /// `V(x, omega) = omega_{floor(x)}`.
    pub fn potential_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        let k: Vec<i64> = x.iter().map(|v| v.floor() as i64).collect();
        self.site_value(&k).map_err(|_| Error::PointOutOfBox { point: x.to_vec() })
    }

    /// Site levels as a dense array in lexicographic order.
    pub fn dense_levels(&self) -> Vec<f64> {
        (0..self.bbox.len()).map(|f| if self.bit(f) { self.levels.b } else { self.levels.a }).collect()
    }

    /// Number of sites at level `a`.
    pub fn count_a(&self) -> usize {
        self.bbox.len() - self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>()
    }

    /// `phi_j omega`: same environment with site `j` at the opposite level.
    pub fn flip_site(&self, j: &[i64]) -> Result<Environment> {
        let f = self.bbox.flat_index(j).ok_or_else(|| Error::OutOfBox { site: j.to_vec() })?;
        let mut out = self.clone();
        Arc::make_mut(&mut out.bits)[f >> 6] ^= 1u64 << (f & 63);
        Ok(out)
    }

    /// `tau_z omega` with `(tau_z omega)_k = omega_{k+z}`, on the relabelled box `box - z`.
    pub fn shifted(&self, z: &[i64]) -> Result<Environment> {
        if z.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: z.len() });
        }
        let neg: Vec<i64> = z.iter().map(|v| -v).collect();
        let mut out = self.clone();
        out.bbox = self.bbox.translated(&neg);
        Ok(out)
    }

    /// Copy restricted to `window`, which must lie inside the box.
    pub fn restrict(&self, window: &LatticeBox) -> Result<Environment> {
        if !self.bbox.contains_box(window) {
            return Err(Error::BoxTooSmall { need_lo: window.lo.clone(), need_hi: window.hi.clone() });
        }
        let n = window.len();
        let mut bits = vec![0u64; n.div_ceil(64)];
        for (i, k) in window.sites().enumerate() {
            if self.bit(self.bbox.flat_index(&k).expect("inside")) {
                bits[i >> 6] |= 1u64 << (i & 63);
            }
        }
        Ok(Environment { bbox: window.clone(), bits: Arc::new(bits), ..self.clone() })
    }

    /// Exact `int_0^dt V(x0 + (s/dt)(x1 - x0)) ds` by cube-boundary traversal.
    pub fn segment_potential_integral(&self, x0: &[f64], x1: &[f64], dt: f64) -> Result<f64> {
        if x0.len() != self.dim() || x1.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x0.len().min(x1.len()) });
        }
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let mut acc = 0.0;
        for Piece { cube, frac } in segment_pieces(x0, x1) {
            let v = self.site_value(&cube).map_err(|_| Error::SegmentOutsideBox { cube })?;
            acc += frac * v;
        }
        Ok(dt * acc)
    }
}

/// `sample_environment` as a free function.
pub fn sample_environment(bbox: LatticeBox, alpha: f64, levels: Levels, seed: u64) -> Result<Environment> {
    Environment::sample(bbox, alpha, levels, seed)
}

/// `tau_z omega` restricted to the query `window`; errors when `window + z`
/// is not covered by the sampled box.
pub fn shift_environment(env: &Environment, z: &[i64], window: &LatticeBox) -> Result<Environment> {
    let shifted = env.shifted(z)?;
    if !shifted.bbox.contains_box(window) {
        return Err(Error::ShiftMargin { shift: z.to_vec() });
    }
    shifted.restrict(window)
}
