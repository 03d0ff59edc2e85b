use alloc::vec::Vec;

use crate::grid::{Cube, Point, MAX_DIM};

/// Half-open axis-parallel box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn of_cube(q: &Cube) -> Self {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..q.dim() {
            lo[i] = q.lower(i);
            hi[i] = q.upper(i);
        }
        Self { lo, hi }
    }

    /// Intersection of the open boxes, if nonempty.
    pub fn intersect(&self, other: &Aabb, dim: usize) -> Option<Aabb> {
        let mut out = *self;
        for i in 0..dim {
            out.lo[i] = self.lo[i].max(other.lo[i]);
            out.hi[i] = self.hi[i].min(other.hi[i]);
            if out.hi[i] <= out.lo[i] {
                return None;
            }
        }
        Some(out)
    }

    pub fn min_extent(&self, dim: usize) -> f64 {
        (0..dim).map(|i| self.hi[i] - self.lo[i]).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|i| self.hi[i] - self.lo[i]).product()
    }
}

/// Pairs `(i, j)`, `i < j`, of boxes whose interiors meet; found by a
/// sort-and-sweep along axis 0.
pub fn overlapping_pairs(boxes: &[Aabb], dim: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[a].lo[0].total_cmp(&boxes[b].lo[0]).then(a.cmp(&b)));
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if boxes[j].lo[0] >= boxes[i].hi[0] {
                break;
            }
            if boxes[i].intersect(&boxes[j], dim).is_some() {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Neighbor lists from a pair list.
pub fn adjacency(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = alloc::vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
    }
    adj
}

/// `max_x Σ χ_B(x)` over open boxes, exact. Boxes have the Helly property,
/// so a deepest point sits just above the largest lower corner of the boxes
/// containing it; those corners are assembled from neighbor lower bounds.
pub fn max_depth(boxes: &[Aabb], adj: &[Vec<usize>], dim: usize) -> usize {
    let mut best = 0;
    let mut cand: [Vec<f64>; MAX_DIM] = [Vec::new(), Vec::new(), Vec::new()];
    for (a, ba) in boxes.iter().enumerate() {
        let group: Vec<usize> = core::iter::once(a).chain(adj[a].iter().copied()).collect();
        for (i, ci) in cand.iter_mut().enumerate().take(dim) {
            ci.clear();
            for &g in &group {
                let v = boxes[g].lo[i];
                if ba.lo[i] <= v && v < ba.hi[i] {
                    ci.push(v);
                }
            }
            ci.sort_by(f64::total_cmp);
            ci.dedup();
        }
        let sizes: [usize; MAX_DIM] = core::array::from_fn(|i| if i < dim { cand[i].len() } else { 1 });
        for x in 0..sizes[0] {
            for y in 0..sizes[1] {
                for z in 0..sizes[2] {
                    let idx = [x, y, z];
                    let count = group
                        .iter()
                        .filter(|&&g| {
                            (0..dim).all(|i| {
                                let p = cand[i][idx[i]];
                                boxes[g].lo[i] <= p && p < boxes[g].hi[i]
                            })
                        })
                        .count();
                    best = best.max(count);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(lo: [f64; 2], hi: [f64; 2]) -> Aabb {
        Aabb { lo: [lo[0], lo[1], 0.0], hi: [hi[0], hi[1], 0.0] }
    }

    #[test]
    fn depth_of_overlapping_squares() {
        let boxes = [
            bx([0.0, 0.0], [2.0, 2.0]),
            bx([1.0, 1.0], [3.0, 3.0]),
            bx([1.5, 0.0], [4.0, 1.5]),
            bx([2.0, 2.0], [3.0, 3.0]),
        ];
        let pairs = overlapping_pairs(&boxes, 2);
        assert_eq!(pairs, alloc::vec![(0, 1), (0, 2), (1, 2), (1, 3)]);
        let adj = adjacency(boxes.len(), &pairs);
        assert_eq!(max_depth(&boxes, &adj, 2), 3);
    }

    #[test]
    fn touching_boxes_do_not_overlap() {
        let boxes = [bx([0.0, 0.0], [1.0, 1.0]), bx([1.0, 0.0], [2.0, 1.0])];
        assert!(overlapping_pairs(&boxes, 2).is_empty());
        assert_eq!(max_depth(&boxes, &adjacency(2, &[]), 2), 1);
    }
}
