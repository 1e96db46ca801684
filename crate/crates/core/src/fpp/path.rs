use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::edges::EdgeEnvironment;
use crate::env::{LatticeBox, Levels};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FppPath {
    pub distance: f64,
    /// Vertices from source to target.
    pub vertices: Vec<Vec<i64>>,
}

/// Smallest box that must contain every geodesic from `x` to `y`.
///
/// The straight monotone path costs at most `b |y - x|_1`, so a geodesic has
/// at most `L = (b/a) |y - x|_1` edges and stays in `{z : |z - x|_1 + |z - y|_1 <= L}`,
/// whose extent beyond the corners of `x, y` is `(L - |y - x|_1) / 2` per axis.
pub fn required_box(x: &[i64], y: &[i64], levels: Levels) -> Result<LatticeBox> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    let l1: i64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
    let excess = ((levels.b / levels.a - 1.0) * l1 as f64 / 2.0).floor() as i64;
    let lo = x.iter().zip(y).map(|(a, b)| a.min(b) - excess).collect();
    let hi = x.iter().zip(y).map(|(a, b)| a.max(b) + excess + 1).collect();
    LatticeBox::new(lo, hi)
}

/// `d(x, y)` by Dijkstra, with one minimising path. The box must contain [`required_box`].
pub fn fpp_distance_between(env: &EdgeEnvironment, x: &[i64], y: &[i64]) -> Result<FppPath> {
    let need = required_box(x, y, env.levels())?;
    if !env.bbox().contains_box(&need) {
        return Err(Error::BoxTooSmall { need_lo: need.lo().to_vec(), need_hi: need.hi().to_vec() });
    }
    box_distance(env, x, y)
}

/// Passage time over paths that stay inside the environment box.
pub fn box_distance(env: &EdgeEnvironment, x: &[i64], y: &[i64]) -> Result<FppPath> {
    let bbox = env.bbox();
    let (Some(src), Some(dst)) = (bbox.flat_index(x), bbox.flat_index(y)) else {
        return Err(Error::OutOfBox { site: if bbox.contains(x) { y.to_vec() } else { x.to_vec() } });
    };
    let d = env.dim();
    let strides = bbox.strides();
    let mut dist = vec![f64::INFINITY; bbox.len()];
    let mut pred = vec![usize::MAX; bbox.len()];
    let mut coords = vec![0i64; d];
    // nonnegative f64 bit patterns order like the values
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((0f64.to_bits(), src)));
    while let Some(Reverse((bits, v))) = heap.pop() {
        let dv = f64::from_bits(bits);
        if dv > dist[v] {
            continue;
        }
        if v == dst {
            break;
        }
        let mut r = v;
        for i in (0..d).rev() {
            let ext = bbox.extent(i);
            coords[i] = (r % ext) as i64;
            r /= ext;
        }
        for axis in 0..d {
            let ext = bbox.extent(axis) as i64;
            if coords[axis] + 1 < ext {
                let w = v + strides[axis];
                relax(&mut dist, &mut pred, &mut heap, v, w, dv + env.weight_at(v, axis));
            }
            if coords[axis] > 0 {
                let w = v - strides[axis];
                relax(&mut dist, &mut pred, &mut heap, v, w, dv + env.weight_at(w, axis));
            }
        }
    }
    let mut vertices = vec![bbox.site_at(dst)];
    let mut v = dst;
    while v != src {
        v = pred[v];
        vertices.push(bbox.site_at(v));
    }
    vertices.reverse();
    Ok(FppPath { distance: dist[dst], vertices })
}

#[inline]
fn relax(dist: &mut [f64], pred: &mut [usize], heap: &mut BinaryHeap<Reverse<(u64, usize)>>, v: usize, w: usize, nd: f64) {
    if nd < dist[w] {
        dist[w] = nd;
        pred[w] = v;
        heap.push(Reverse((nd.to_bits(), w)));
    }
}

/// `d(0, v)`.
pub fn fpp_distance(env: &EdgeEnvironment, v: &[i64]) -> Result<FppPath> {
    fpp_distance_between(env, &vec![0; v.len()], v)
}

/// Minimum over all simple paths inside the box; at most 25 vertices.
pub fn brute_force_distance(env: &EdgeEnvironment, x: &[i64], y: &[i64]) -> Result<f64> {
    let bbox = env.bbox();
    if bbox.len() > 25 {
        return Err(Error::InstanceTooLarge(bbox.len() as f64));
    }
    let (Some(src), Some(dst)) = (bbox.flat_index(x), bbox.flat_index(y)) else {
        return Err(Error::OutOfBox { site: if bbox.contains(x) { y.to_vec() } else { x.to_vec() } });
    };
    let d = env.dim();
    let strides = bbox.strides();
    let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); bbox.len()];
    for (v, c) in bbox.sites().enumerate() {
        for axis in 0..d {
            if c[axis] + 1 < bbox.hi()[axis] {
                let w = v + strides[axis];
                let wt = env.weight_at(v, axis);
                nbrs[v].push((w, wt));
                nbrs[w].push((v, wt));
            }
        }
    }
    fn dfs(v: usize, dst: usize, acc: f64, seen: &mut Vec<bool>, nbrs: &[Vec<(usize, f64)>], best: &mut f64) {
        if v == dst {
            *best = best.min(acc);
            return;
        }
        for &(w, wt) in &nbrs[v] {
            if !seen[w] {
                seen[w] = true;
                dfs(w, dst, acc + wt, seen, nbrs, best);
                seen[w] = false;
            }
        }
    }
    let mut seen = vec![false; bbox.len()];
    seen[src] = true;
    let mut best = f64::INFINITY;
    dfs(src, dst, 0.0, &mut seen, &nbrs, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpp::Edge;

    #[test]
    fn constant_weights_give_l1() {
        let lv = Levels::new(1.0, 2.0).unwrap();
        let bbox = required_box(&[0, 0], &[3, 4], lv).unwrap();
        let env = EdgeEnvironment::sample(bbox, 1.0, lv, 0).unwrap();
        let p = fpp_distance(&env, &[3, 4]).unwrap();
        assert_eq!(p.distance, 7.0);
        assert_eq!(p.vertices.len(), 8);
        assert_eq!(p.vertices[0], vec![0, 0]);
        assert_eq!(p.vertices[7], vec![3, 4]);
    }

    #[test]
    fn path_cost_matches_distance() {
        let lv = Levels::new(1.0, 3.0).unwrap();
        let bbox = LatticeBox::new(vec![-12, -12], vec![20, 20]).unwrap();
        let env = EdgeEnvironment::sample(bbox, 0.5, lv, 5).unwrap();
        let p = fpp_distance(&env, &[6, 2]).unwrap();
        let cost: f64 = p
            .vertices
            .windows(2)
            .map(|w| {
                let axis = (0..2).find(|&i| w[0][i] != w[1][i]).unwrap();
                let from = if w[0][axis] < w[1][axis] { w[0].clone() } else { w[1].clone() };
                env.weight(&Edge { from, axis }).unwrap()
            })
            .sum();
        assert_eq!(cost, p.distance);
    }

    #[test]
    fn margin_is_enforced() {
        let lv = Levels::new(1.0, 2.0).unwrap();
        let env = EdgeEnvironment::sample(LatticeBox::new(vec![0, 0], vec![8, 2]).unwrap(), 0.5, lv, 1).unwrap();
        assert!(matches!(fpp_distance(&env, &[6, 0]), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn brute_force_on_small_box() {
        let lv = Levels::new(1.0, 2.0).unwrap();
        let bbox = LatticeBox::new(vec![0, 0], vec![3, 3]).unwrap();
        let env = EdgeEnvironment::from_fn(bbox, lv, |e| !(e.axis == 1 && e.from[0] == 2)).unwrap();
        // cheapest: along y at x = 2 (cost 2) plus two b-edges along x
        assert_eq!(brute_force_distance(&env, &[0, 0], &[2, 2]).unwrap(), 6.0);
    }
}
