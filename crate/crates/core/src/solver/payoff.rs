use crate::error::{Error, Result};
use crate::geometry::norm;

/// Terminal payoff `g`. Values of `-inf` mark forbidden endpoints.
#[derive(Clone, Debug, PartialEq)]
pub enum Payoff {
    /// `g(y) = slope . y + offset`
    Linear { slope: Vec<f64>, offset: f64 },
    /// Cellwise-constant table; `-inf` outside the table.
    Tabulated(TabulatedPayoff),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedPayoff {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl TabulatedPayoff {
    /// Cell `i` covers `origin + spacing * (i + [0,1)^d)`; `values` is row-major.
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if origin.len() != shape.len() {
            return Err(Error::Dimension { expected: origin.len(), got: shape.len() });
        }
        if !(spacing > 0.0) {
            return Err(Error::param("payoff.spacing", "must be positive"));
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(Error::param("payoff.values", "length does not match shape"));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::param("payoff.values", "must be finite or -inf"));
        }
        Ok(TabulatedPayoff { origin, spacing, shape, values })
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut idx = 0usize;
        for (i, &v) in y.iter().enumerate() {
            let c = ((v - self.origin[i]) / self.spacing).floor();
            if c < 0.0 || c >= self.shape[i] as f64 {
                return f64::NEG_INFINITY;
            }
            idx = idx * self.shape[i] + c as usize;
        }
        self.values[idx]
    }

    fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Payoff {
    pub fn linear(slope: Vec<f64>) -> Self {
        Payoff::Linear { slope, offset: 0.0 }
    }

    /// `g == 0`.
    pub fn zero(dim: usize) -> Self {
        Payoff::linear(vec![0.0; dim])
    }

    /// `y -> g(y + k)`.
    pub fn translated(&self, k: &[i64]) -> Payoff {
        match self {
            Payoff::Linear { slope, offset } => {
                Payoff::Linear { slope: slope.clone(), offset: offset + slope.iter().zip(k).map(|(s, &v)| s * v as f64).sum::<f64>() }
            }
            Payoff::Tabulated(t) => {
                let mut t = t.clone();
                for (o, &v) in t.origin.iter_mut().zip(k) {
                    *o -= v as f64;
                }
                Payoff::Tabulated(t)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Payoff::Linear { slope, .. } => slope.len(),
            Payoff::Tabulated(t) => t.shape.len(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Payoff::Linear { slope, offset } => slope.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + offset,
            Payoff::Tabulated(t) => t.eval(y),
        }
    }

    pub fn slope(&self) -> Option<&[f64]> {
        match self {
            Payoff::Linear { slope, .. } => Some(slope),
            Payoff::Tabulated(_) => None,
        }
    }

    /// A constant `C1` with `g(y) < g(x) + C1 (1 + |y - x|)` for all `y`.
    /// `None` when `g(x) = -inf`.
    pub fn growth_constant(&self, x: &[f64]) -> Option<f64> {
        match self {
            Payoff::Linear { slope, .. } => Some(norm(slope).max(f64::EPSILON)),
            Payoff::Tabulated(t) => {
                let gx = t.eval(x);
                if gx == f64::NEG_INFINITY {
                    return None;
                }
                Some((t.sup() - gx).max(0.0) + f64::EPSILON)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Payoff::Linear { slope, offset } => format!("linear{slope:?}+{offset}"),
            Payoff::Tabulated(t) => format!("tabulated{:?}@{}", t.shape, t.spacing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_bound_holds_on_samples() {
        let g = Payoff::linear(vec![1.0, -2.0]);
        let c1 = g.growth_constant(&[0.0, 0.0]).unwrap();
        for i in -20..20 {
            for j in -20..20 {
                let y = [i as f64 * 0.7, j as f64 * 1.3];
                assert!(g.eval(&y) < g.eval(&[0.0, 0.0]) + c1 * (1.0 + norm(&y)) + 1e-12);
            }
        }
    }

    #[test]
    fn tabulated_lookup() {
        let t = TabulatedPayoff::new(vec![0.0, 0.0], 1.0, vec![2, 2], vec![1.0, 2.0, f64::NEG_INFINITY, 4.0]).unwrap();
        let g = Payoff::Tabulated(t);
        assert_eq!(g.eval(&[0.5, 1.5]), 2.0);
        assert_eq!(g.eval(&[1.0, 0.0]), f64::NEG_INFINITY);
        assert_eq!(g.eval(&[2.0, 0.0]), f64::NEG_INFINITY);
        assert_eq!(g.growth_constant(&[0.0, 0.0]).unwrap(), 3.0 + f64::EPSILON);
        assert!(g.growth_constant(&[1.0, 0.0]).is_none());
    }
}
