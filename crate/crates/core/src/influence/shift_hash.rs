//! Random environment shift driven by auxiliary bits.
//!
//! Each axis reads a block of `m^2` bits; with `S` the number of `b` bits,
//! `h(S) = m - 1 - |(S mod (2m - 2)) - (m - 1)|` is a tent map onto `0..m`,
//! so flipping one bit moves `h` by at most one.

use rand::RngCore;
use serde::Serialize;
use statrs::distribution::{Binomial, Discrete};

use crate::env::{chacha_from_seed, shift_environment, unit_f64, Environment};
use crate::error::{Error, Result};
use crate::solver::{solve_u, SolverInputs};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftHash {
    m: usize,
    alpha: f64,
    distribution: Vec<f64>,
}

/// Auxiliary bits: one block of `m^2` per axis, `true` = level `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftBits {
    pub blocks: Vec<Vec<bool>>,
}

impl ShiftBits {
    /// Each bit is `b` with probability `1 - alpha`.
    pub fn sample(m: usize, dim: usize, alpha: f64, seed: u64) -> ShiftBits {
        let mut rng = chacha_from_seed(seed);
        let blocks = (0..dim).map(|_| (0..m * m).map(|_| unit_f64(rng.next_u64()) >= alpha).collect()).collect();
        ShiftBits { blocks }
    }

    /// Bits whose hash is zero on every axis.
    pub fn all_a(m: usize, dim: usize) -> ShiftBits {
        ShiftBits { blocks: vec![vec![false; m * m]; dim] }
    }
}

/// `h~` and its exact law under i.i.d. bits.
pub fn build_shift_hash(m: usize, alpha: f64) -> Result<ShiftHash> {
    if m < 2 {
        return Err(Error::HashOrder(m));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let n = (m * m) as u64;
    let law = Binomial::new(1.0 - alpha, n).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut distribution = vec![0.0; m];
    for s in 0..=n {
        distribution[tent(m, s as usize)] += law.pmf(s);
    }
    Ok(ShiftHash { m, alpha, distribution })
}

fn tent(m: usize, s: usize) -> usize {
    let period = 2 * m - 2;
    let r = (s % period) as i64;
    (m as i64 - 1 - (r - (m as i64 - 1)).abs()) as usize
}

impl ShiftHash {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn block_len(&self) -> usize {
        self.m * self.m
    }

    /// `h~` as a function of the `b`-count.
    pub fn of_count(&self, s: usize) -> usize {
        tent(self.m, s)
    }

    pub fn hash_block(&self, bits: &[bool]) -> usize {
        debug_assert_eq!(bits.len(), self.block_len());
        self.of_count(bits.iter().filter(|b| **b).count())
    }

    /// `h(omega_1) = sum_i h~(block_i) e_i`.
    pub fn shift(&self, bits: &ShiftBits) -> Vec<i64> {
        bits.blocks.iter().map(|b| self.hash_block(b) as i64).collect()
    }

    /// `P(h~ = i)` for `i` in `0..m`.
    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn max_probability(&self) -> f64 {
        self.distribution.iter().copied().fold(0.0, f64::max)
    }
}

/// `m = floor(t^zeta)`.
pub fn hash_order(t: f64, zeta: f64) -> usize {
    t.powf(zeta).floor() as usize
}

/// `u(t, tau_h omega)` with `h = h(bits)`; returns the value and the shift.
pub fn shifted_value(env: &Environment, hash: &ShiftHash, bits: &ShiftBits, inputs: &SolverInputs) -> Result<(f64, Vec<i64>)> {
    let z = hash.shift(bits);
    let window = inputs.grid()?.required_box();
    let shifted = shift_environment(env, &z, &window)?;
    Ok((solve_u(&shifted, inputs)?, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_range_and_period() {
        for m in 2..=32 {
            for s in 0..(m * m + 1) {
                assert!(tent(m, s) < m);
            }
            if m > 2 {
                assert_eq!(tent(m, m - 1), m - 1);
            }
            assert_eq!(tent(m, 0), 0);
        }
        assert_eq!((0..5).map(|s| tent(2, s)).collect::<Vec<_>>(), vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn m2_is_uniform() {
        let h = build_shift_hash(2, 0.5).unwrap();
        assert!(h.distribution().iter().all(|v| (v - 0.5).abs() < 1e-14));
        assert!(build_shift_hash(1, 0.5).is_err());
    }

    #[test]
    fn order() {
        assert_eq!(hash_order(8.0, 0.45), 2);
        assert_eq!(hash_order(16.0, 0.45), 3);
        assert_eq!(hash_order(32.0, 0.45), 4);
        assert_eq!(hash_order(64.0, 0.45), 6);
    }
}
