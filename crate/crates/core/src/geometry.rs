//! Exact traversal of straight segments through the unit-cube lattice.
//!
//! A segment `x0 -> x1` is cut at every parameter `s` where one coordinate
//! crosses an integer. Between consecutive cuts the segment stays inside a
//! single half-open cube `k + [0,1)^d`, which is identified from the piece
//! midpoint. Both the potential integral and the occupation times are built
//! from these pieces, so neither carries quadrature error.

/// One piece of a segment: the cube it lies in and the fraction of the
/// segment's parameter range spent there.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub cube: Vec<i64>,
    pub frac: f64,
}

/// Cuts `x0 -> x1` at cube boundaries. Fractions sum to one up to rounding.
pub fn segment_pieces(x0: &[f64], x1: &[f64]) -> Vec<Piece> {
    debug_assert_eq!(x0.len(), x1.len());
    let mut cuts = vec![0.0, 1.0];
    for (&p, &q) in x0.iter().zip(x1) {
        let delta = q - p;
        if delta == 0.0 {
            continue;
        }
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        // integers strictly inside (lo, hi)
        let mut m = lo.floor() + 1.0;
        while m < hi {
            let s = (m - p) / delta;
            if s > 0.0 && s < 1.0 {
                cuts.push(s);
            }
            m += 1.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut pieces = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let mid = 0.5 * (s0 + s1);
        let cube = x0.iter().zip(x1).map(|(&p, &q)| (p + mid * (q - p)).floor() as i64).collect();
        pieces.push(Piece { cube, frac: s1 - s0 });
    }
    if pieces.is_empty() {
        // zero-length segment
        pieces.push(Piece { cube: x0.iter().map(|v| v.floor() as i64).collect(), frac: 1.0 });
    }
    pieces
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cube_segment() {
        let p = segment_pieces(&[0.25, 0.5], &[0.75, 0.5]);
        assert_eq!(p, vec![Piece { cube: vec![0, 0], frac: 1.0 }]);
    }

    #[test]
    fn crossing_splits_at_boundary() {
        let p = segment_pieces(&[0.5, 0.5], &[1.5, 0.5]);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0], Piece { cube: vec![0, 0], frac: 0.5 });
        assert_eq!(p[1], Piece { cube: vec![1, 0], frac: 0.5 });
    }

    #[test]
    fn face_aligned_segment_uses_floor_convention() {
        // runs along y = 0: belongs to the row of cubes above the face
        let p = segment_pieces(&[0.0, 0.0], &[2.0, 0.0]);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].cube, vec![0, 0]);
        assert_eq!(p[1].cube, vec![1, 0]);
        // and moving in the negative direction
        let p = segment_pieces(&[0.0, 0.0], &[-1.0, 0.0]);
        assert_eq!(p, vec![Piece { cube: vec![-1, 0], frac: 1.0 }]);
    }

    #[test]
    fn diagonal_through_corner() {
        let p = segment_pieces(&[0.0, 0.0], &[2.0, 2.0]);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].cube, vec![0, 0]);
        assert_eq!(p[1].cube, vec![1, 1]);
    }

    #[test]
    fn degenerate_segment() {
        let p = segment_pieces(&[1.5, -0.5], &[1.5, -0.5]);
        assert_eq!(p, vec![Piece { cube: vec![1, -1], frac: 1.0 }]);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-15)).abs() < 1e-30 + f64::EPSILON * 1e-15);
    }
}
