use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::boxes::{overlapping_pairs, Aabb};
use super::WhitneyDecomposition;
use crate::error::{Error, Result};
use crate::grid::{Cube, MAX_DIM};

/// Default adjacency constant.
pub const DEFAULT_C_ADJ: f64 = 1.0 / 16.0;

/// Breadth-first chain decomposition of a Whitney decomposition.
#[derive(Clone, Debug)]
pub struct ChainDecomposition {
    dim: usize,
    c_adj: f64,
    central: usize,
    cubes: Vec<Cube>,
    dilated: Vec<Aabb>,
    neighbors: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// BFS visiting order, starting at the central cube.
    order: Vec<usize>,
    /// Dilation of the largest cube in `Q* ∩ (πQ)*` needed to contain
    /// `Q* ∪ (πQ)*`, for the tree edge into each cube.
    lambda: Vec<Option<f64>>,
    /// Exact Boman exponent per cube: least `N` with `∪S(R) ⊂ NR`.
    boman: Vec<u64>,
}

/// Largest cube inside `b`, centered in it.
fn inner_cube(b: &Aabb, dim: usize) -> (crate::grid::Point, f64) {
    let s = b.min_extent(dim) / 2.0;
    let mut c = [0.0; MAX_DIM];
    for i in 0..dim {
        c[i] = (b.lo[i] + b.hi[i]) / 2.0;
    }
    (c, s)
}

fn containment_dilation(center: &crate::grid::Point, r: f64, boxes: &[&Aabb], dim: usize) -> f64 {
    let mut m: f64 = 0.0;
    for b in boxes {
        for i in 0..dim {
            m = m.max(center[i] - b.lo[i]).max(b.hi[i] - center[i]);
        }
    }
    m / r
}

/// Edges between Whitney cubes whose dilations share a cube of side at
/// least `c_adj · max(l(Q*), l(Q'*))`; chains are shortest paths from the
/// largest cube (ties broken by lexicographic center).
pub fn build_chains(w: &WhitneyDecomposition, c_adj: f64) -> Result<ChainDecomposition> {
    if !(c_adj > 0.0 && c_adj < 1.0) {
        return Err(Error::Parameter(alloc::format!("c_adj = {c_adj} must lie in (0,1)")));
    }
    if w.is_empty() {
        return Err(Error::Empty("whitney decomposition"));
    }
    let dim = w.grid().dim();
    let n = w.len();
    let cubes: Vec<Cube> = (0..n).map(|i| w.cube(i)).collect();
    let dilated = w.dilated_boxes();
    let mut neighbors = vec![Vec::new(); n];
    for (a, b) in overlapping_pairs(&dilated, dim) {
        let inter = dilated[a].intersect(&dilated[b], dim).expect("pair overlaps");
        let need = c_adj * (dilated[a].hi[0] - dilated[a].lo[0]).max(dilated[b].hi[0] - dilated[b].lo[0]);
        if inter.min_extent(dim) >= need {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for l in neighbors.iter_mut() {
        l.sort_unstable();
    }
    let central = (0..n)
        .min_by(|&a, &b| {
            cubes[b]
                .side()
                .total_cmp(&cubes[a].side())
                .then_with(|| {
                    let (ca, cb) = (cubes[a].center(), cubes[b].center());
                    ca.iter().zip(cb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
                })
        })
        .expect("nonempty");
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    seen[central] = true;
    queue.push_back(central);
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for &nb in &neighbors[q] {
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(q);
                queue.push_back(nb);
            }
        }
    }
    if order.len() < n {
        let mut comp_of = vec![usize::MAX; n];
        let mut components = Vec::new();
        for s in 0..n {
            if comp_of[s] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut comp = vec![s];
            comp_of[s] = id;
            let mut k = 0;
            while k < comp.len() {
                for &nb in &neighbors[comp[k]] {
                    if comp_of[nb] == usize::MAX {
                        comp_of[nb] = id;
                        comp.push(nb);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            components.push(comp);
        }
        return Err(Error::Disconnected { components });
    }
    let mut children = vec![Vec::new(); n];
    for &q in &order {
        if let Some(p) = parent[q] {
            children[p].push(q);
        }
    }
    let lambda = (0..n)
        .map(|q| {
            parent[q].map(|p| {
                let inter = dilated[q].intersect(&dilated[p], dim).expect("edge overlaps");
                let (c, r) = inner_cube(&inter, dim);
                containment_dilation(&c, r, &[&dilated[q], &dilated[p]], dim)
            })
        })
        .collect();
    // Shadow bounding boxes in half-cell units, accumulated leaves up.
    let h2 = w.grid().cell_side() / 2.0;
    let root = *w.grid().root();
    let units = |x: f64, axis: usize| -> i64 { libm::round((x - root.lower(axis)) / h2) as i64 };
    let mut lo = vec![[0i64; MAX_DIM]; n];
    let mut hi = vec![[0i64; MAX_DIM]; n];
    for q in 0..n {
        for i in 0..dim {
            lo[q][i] = units(cubes[q].lower(i), i);
            hi[q][i] = units(cubes[q].upper(i), i);
        }
    }
    for &q in order.iter().rev() {
        if let Some(p) = parent[q] {
            for i in 0..dim {
                lo[p][i] = lo[p][i].min(lo[q][i]);
                hi[p][i] = hi[p][i].max(hi[q][i]);
            }
        }
    }
    let boman = (0..n)
        .map(|r| {
            let lo_r = units(cubes[r].lower(0), 0);
            let hi_r = units(cubes[r].upper(0), 0);
            let rad = (hi_r - lo_r) / 2;
            let mut off = 0i64;
            for i in 0..dim {
                let c = units(cubes[r].center()[i], i);
                off = off.max(c - lo[r][i]).max(hi[r][i] - c);
            }
            let k = (off + rad - 1) / rad;
            k.max(1) as u64
        })
        .collect();
    Ok(ChainDecomposition {
        dim,
        c_adj,
        central,
        cubes,
        dilated,
        neighbors,
        parent,
        children,
        order,
        lambda,
        boman,
    })
}

impl ChainDecomposition {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c_adj(&self) -> f64 {
        self.c_adj
    }

    pub fn central(&self) -> usize {
        self.central
    }

    pub fn cube(&self, i: usize) -> &Cube {
        &self.cubes[i]
    }

    pub fn dilated(&self, i: usize) -> Cube {
        self.cubes[i].dilate(super::whitney::DILATION)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Breadth-first order from the central cube.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `C(Q) = (Q₀, …, Q)`.
    pub fn chain(&self, q: usize) -> Vec<usize> {
        let mut out = vec![q];
        let mut cur = q;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// `S(R) = {Q : R ∈ C(Q)}`, sorted.
    pub fn shadow(&self, r: usize) -> Vec<usize> {
        let mut out = vec![r];
        let mut k = 0;
        while k < out.len() {
            out.extend(self.children[out[k]].iter().copied());
            k += 1;
        }
        out.sort_unstable();
        out
    }

    /// Per-cube containment constant of the shadow.
    pub fn boman_per_cube(&self) -> &[u64] {
        &self.boman
    }

    /// Least `N ≥ 1` with `∪_{Q∈S(R)} Q ⊂ NR` for every `R`.
    pub fn boman_constant(&self) -> u64 {
        self.boman.iter().copied().max().unwrap_or(1)
    }

    /// λ for the edge from each cube to its parent.
    pub fn lambdas(&self) -> &[Option<f64>] {
        &self.lambda
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambda.iter().flatten().copied().fold(1.0, f64::max)
    }

    /// Longest chain, counted in cubes.
    pub fn max_chain_len(&self) -> usize {
        (0..self.len()).map(|q| self.chain(q).len()).max().unwrap_or(0)
    }

    /// Side ratios `l(Q_i)/l(Q_{i−1})` over every tree edge.
    pub fn side_ratios(&self) -> Vec<f64> {
        (0..self.len())
            .filter_map(|q| self.parent[q].map(|p| self.cubes[q].side() / self.cubes[p].side()))
            .collect()
    }

    pub(crate) fn dilated_box(&self, i: usize) -> &Aabb {
        &self.dilated[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{whitney_decompose, CoveragePolicy, DomainRaster, DomainSpec};
    use crate::grid::{CellMask, DyadicCube, Grid};

    fn square(level: u32) -> WhitneyDecomposition {
        let d = "box((0,0),(1,1))".parse::<DomainSpec>().unwrap().rasterize(Grid::unit(2, level).unwrap()).unwrap();
        whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap()
    }

    fn brute_boman(ch: &ChainDecomposition) -> u64 {
        let mut best = 1;
        for r in 0..ch.len() {
            let mut n = 1u64;
            loop {
                let big = ch.cube(r).dilate(n as f64);
                if ch.shadow(r).iter().all(|&q| big.contains_cube(ch.cube(q))) {
                    break;
                }
                n += 1;
            }
            best = best.max(n);
        }
        best
    }

    #[test]
    fn single_cube() {
        let g = Grid::unit(2, 2).unwrap();
        let d = DomainRaster::new(CellMask::from_fn(g, |c| c == 5)).unwrap();
        let ch = build_chains(&whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap(), DEFAULT_C_ADJ).unwrap();
        assert_eq!(ch.chain(0), alloc::vec![0]);
        assert_eq!(ch.shadow(0), alloc::vec![0]);
        assert_eq!(ch.boman_constant(), 1);
    }

    #[test]
    fn face_adjacent_equal_cubes() {
        // Two unit cells of a 1D grid; dilations overlap in l/8 = l(Q*)/9.
        let g = Grid::unit(1, 2).unwrap();
        let d = DomainRaster::new(CellMask::from_fn(g, |c| c == 1 || c == 2)).unwrap();
        let w = whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap();
        assert_eq!(w.len(), 2);
        assert!(build_chains(&w, 0.111).is_ok());
        assert!(matches!(build_chains(&w, 0.1112), Err(Error::Disconnected { ref components }) if components.len() == 2));
    }

    #[test]
    fn square_chains() {
        for level in [4, 5, 6] {
            let w = square(level);
            let ch = build_chains(&w, DEFAULT_C_ADJ).unwrap();
            for r in ch.side_ratios() {
                assert!([0.5, 1.0, 2.0].contains(&r), "ratio {r} at level {level}");
            }
            // Chains have distinct cubes and consecutive cubes are adjacent.
            for q in 0..ch.len() {
                let c = ch.chain(q);
                assert_eq!(c[0], ch.central());
                let mut s = c.clone();
                s.sort_unstable();
                s.dedup();
                assert_eq!(s.len(), c.len());
                for win in c.windows(2) {
                    assert!(ch.neighbors(win[0]).contains(&win[1]));
                }
            }
            // Duality R ∈ C(Q) ⇔ Q ∈ S(R).
            for r in 0..ch.len() {
                let shadow = ch.shadow(r);
                for q in 0..ch.len() {
                    assert_eq!(ch.chain(q).contains(&r), shadow.binary_search(&q).is_ok());
                }
            }
            assert_eq!(ch.boman_constant(), brute_boman(&ch));
        }
    }

    #[test]
    fn interval_boman_brute_force() {
        let g = Grid::unit(1, 6).unwrap();
        let w = whitney_decompose(&DomainRaster::full(g), CoveragePolicy::BoundaryLayer).unwrap();
        let ch = build_chains(&w, DEFAULT_C_ADJ).unwrap();
        assert_eq!(ch.boman_constant(), brute_boman(&ch));
        // Central cube: the larger one with the smaller center.
        assert_eq!(w.cubes()[ch.central()].cube, DyadicCube::new(2, &[1]).unwrap());
    }

    #[test]
    fn rejects_bad_c_adj() {
        assert!(build_chains(&square(3), 0.0).is_err());
        assert!(build_chains(&square(3), 1.0).is_err());
    }
}
