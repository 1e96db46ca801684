use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::norm;

/// Radial running cost `K(q) = scale * |q|^power`.
///
/// Construction checks the two-dimensional non-degeneracy requirement
/// `K(z) >= |z|^nu` on `|z| <= 1/2` for the supplied exponent `nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticCost {
    scale: f64,
    power: f64,
    nondeg_exponent: f64,
}

impl KineticCost {
    pub fn new(scale: f64, power: f64, nondeg_exponent: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param("kinetic.scale", "must be positive"));
        }
        if !(power > 1.0 && power.is_finite()) {
            return Err(Error::param("kinetic.power", "must exceed 1 (superlinear growth)"));
        }
        if !(nondeg_exponent > 1.0) {
            return Err(Error::param("kinetic.nondeg_exponent", "must exceed 1"));
        }
        // min over r in (0, 1/2] of scale * r^(power - nu) must be >= 1
        let ok = nondeg_exponent >= power && scale * 0.5f64.powf(power - nondeg_exponent) >= 1.0 - 1e-12;
        if !ok {
            return Err(Error::param(
                "kinetic.nondeg_exponent",
                format!("K(z) >= |z|^{nondeg_exponent} fails near the origin for scale {scale}, power {power}"),
            ));
        }
        Ok(KineticCost { scale, power, nondeg_exponent })
    }

    /// `|q|^2 / 2`, certified with `nu = 3`.
    pub fn quadratic() -> Self {
        KineticCost { scale: 0.5, power: 2.0, nondeg_exponent: 3.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn nondeg_exponent(&self) -> f64 {
        self.nondeg_exponent
    }

    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        if self.power == 2.0 {
            self.scale * r * r
        } else {
            self.scale * r.powf(self.power)
        }
    }

    pub fn eval(&self, q: &[f64]) -> f64 {
        if self.power == 2.0 {
            self.scale * q.iter().map(|v| v * v).sum::<f64>()
        } else {
            self.radial(norm(q))
        }
    }

    /// Closed-form Legendre transform `K*(p) = sup_q p.q - K(q)`.
    pub fn legendre(&self, p: &[f64]) -> f64 {
        let s = norm(p);
        if s == 0.0 {
            return 0.0;
        }
        let r = (s / (self.scale * self.power)).powf(1.0 / (self.power - 1.0));
        s * r - self.radial(r)
    }

    /// Largest `r` with `K(r) <= c0 + c1 * r`.
    pub fn radial_crossing(&self, c0: f64, c1: f64) -> f64 {
        let f = |r: f64| self.radial(r) - c1 * r - c0;
        let mut hi = 1.0;
        while f(hi) <= 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Inverse of the radial profile.
    pub fn radius_for(&self, value: f64) -> f64 {
        (value.max(0.0) / self.scale).powf(1.0 / self.power)
    }
}

impl Default for KineticCost {
    fn default() -> Self {
        KineticCost::quadratic()
    }
}
