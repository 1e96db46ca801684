//! Binary snapshot container.
//!
//! Layout (all little-endian):
//!
//! ```text
//! "HJVR" | version u16 | d u8 | (lo i32, hi i32) x d | alpha f64 | a f64 | b f64
//!        | seed u64 | rng id u16 | bit-packed payload
//! ```
//!
//! The low byte of the version word is the format version (1). The high byte
//! is the payload type: 0 for site environments (so a site snapshot carries
//! the plain version word 1), 1 for edge environments, which store `d` bits
//! per site (one per positive axis direction).

use std::io::{Read, Write};

use super::{Environment, LatticeBox, Levels, RngAlgorithm};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HJVR";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotKind {
    Sites = 0,
    Edges = 1,
}

/// Decoded snapshot contents, independent of payload type.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSnapshot {
    pub kind: SnapshotKind,
    pub bbox: LatticeBox,
    pub alpha: f64,
    pub levels: Levels,
    pub seed: u64,
    pub rng: RngAlgorithm,
    pub bits: Vec<u64>,
    pub nbits: usize,
}

pub(crate) fn write_raw<W: Write>(mut w: W, s: &RawSnapshot) -> Result<()> {
    let d = s.bbox.dim();
    if d > u8::MAX as usize {
        return Err(Error::Snapshot("dimension does not fit in u8".into()));
    }
    w.write_all(MAGIC)?;
    let word = ((s.kind as u16) << 8) | FORMAT_VERSION as u16;
    w.write_all(&word.to_le_bytes())?;
    w.write_all(&[d as u8])?;
    for i in 0..d {
        for v in [s.bbox.lo()[i], s.bbox.hi()[i]] {
            let v = i32::try_from(v).map_err(|_| Error::Snapshot("box bound exceeds i32".into()))?;
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.write_all(&s.alpha.to_le_bytes())?;
    w.write_all(&s.levels.a.to_le_bytes())?;
    w.write_all(&s.levels.b.to_le_bytes())?;
    w.write_all(&s.seed.to_le_bytes())?;
    w.write_all(&s.rng.id().to_le_bytes())?;
    let nbytes = s.nbits.div_ceil(8);
    let mut payload = Vec::with_capacity(nbytes);
    for word in &s.bits {
        payload.extend_from_slice(&word.to_le_bytes());
    }
    payload.truncate(nbytes);
    w.write_all(&payload)?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| Error::Snapshot(format!("truncated header: {e}")))?;
    Ok(buf)
}

pub(crate) fn read_raw<R: Read>(mut r: R, bits_per_site: impl Fn(SnapshotKind, usize) -> usize) -> Result<RawSnapshot> {
    if &take::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let word = u16::from_le_bytes(take::<2, _>(&mut r)?);
    if (word & 0xff) as u8 != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unknown format version {}", word & 0xff)));
    }
    let kind = match word >> 8 {
        0 => SnapshotKind::Sites,
        1 => SnapshotKind::Edges,
        t => return Err(Error::Snapshot(format!("unknown payload type {t}"))),
    };
    let d = take::<1, _>(&mut r)?[0] as usize;
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for _ in 0..d {
        lo.push(i32::from_le_bytes(take::<4, _>(&mut r)?) as i64);
        hi.push(i32::from_le_bytes(take::<4, _>(&mut r)?) as i64);
    }
    let bbox = LatticeBox::new(lo, hi)?;
    let alpha = f64::from_le_bytes(take::<8, _>(&mut r)?);
    let a = f64::from_le_bytes(take::<8, _>(&mut r)?);
    let b = f64::from_le_bytes(take::<8, _>(&mut r)?);
    let seed = u64::from_le_bytes(take::<8, _>(&mut r)?);
    let rng_id = u16::from_le_bytes(take::<2, _>(&mut r)?);
    let rng = RngAlgorithm::from_id(rng_id).ok_or_else(|| Error::Snapshot(format!("unknown rng algorithm id {rng_id}")))?;
    let nbits = bbox.len() * bits_per_site(kind, d);
    let mut payload = vec![0u8; nbits.div_ceil(8)];
    r.read_exact(&mut payload).map_err(|e| Error::Snapshot(format!("truncated payload: {e}")))?;
    let mut bits = vec![0u64; nbits.div_ceil(64)];
    for (i, byte) in payload.iter().enumerate() {
        bits[i / 8] |= (*byte as u64) << (8 * (i % 8));
    }
    Ok(RawSnapshot { kind, bbox, alpha, levels: Levels::new(a, b)?, seed, rng, bits, nbits })
}

/// Writes a site environment.
pub fn write_snapshot<W: Write>(w: W, env: &Environment) -> Result<()> {
    write_raw(
        w,
        &RawSnapshot {
            kind: SnapshotKind::Sites,
            bbox: env.bbox().clone(),
            alpha: env.alpha(),
            levels: env.levels(),
            seed: env.seed(),
            rng: env.rng_algorithm(),
            bits: env.raw_bits().to_vec(),
            nbits: env.bbox().len(),
        },
    )
}

/// Reads a site environment; edge snapshots and unknown versions are rejected.
pub fn read_snapshot<R: Read>(r: R) -> Result<Environment> {
    let raw = read_raw(r, |kind, d| if kind == SnapshotKind::Edges { d } else { 1 })?;
    if raw.kind != SnapshotKind::Sites {
        return Err(Error::Snapshot("expected a site environment, found an edge environment".into()));
    }
    Environment::from_parts(raw.bbox, raw.alpha, raw.levels, raw.seed, raw.rng, raw.bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let bbox = LatticeBox::new(vec![-1, 0], vec![2, 3]).unwrap();
        let env = Environment::sample(bbox, 0.5, Levels::default(), 7).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &env).unwrap();
        assert_eq!(&buf[..4], b"HJVR");
        assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
        assert_eq!(buf[6], 2);
        assert_eq!(i32::from_le_bytes(buf[7..11].try_into().unwrap()), -1);
        // 4 + 2 + 1 + 16 + 24 + 8 + 2 header bytes, 9 sites -> 2 payload bytes
        assert_eq!(buf.len(), 57 + 2);
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn unknown_version_is_rejected() {
        let env = Environment::sample(LatticeBox::new(vec![0, 0], vec![2, 2]).unwrap(), 0.5, Levels::default(), 1).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &env).unwrap();
        buf[4] = 2;
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Snapshot(_))));
        buf[4] = 1;
        buf[0] = b'X';
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Snapshot(_))));
    }
}
