use alloc::vec;
use alloc::vec::Vec;

use super::boxes::{adjacency, max_depth, overlapping_pairs, Aabb};
use super::{BoundaryDistance, DomainRaster};
use crate::error::{Error, Result};
use crate::grid::{Cube, DyadicCube, Grid, Pyramid};
use crate::num;

/// Dilation factor of `Q*`.
pub const DILATION: f64 = 9.0 / 8.0;

/// What to do with cells adjacent to `∂Ω`, which no admissible cube of
/// depth at most `L` can contain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CoveragePolicy {
    /// Fail with the list of uncovered cells.
    Strict,
    /// Cover the remainder with finest cells, flagged as layer cubes.
    #[default]
    BoundaryLayer,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WhitneyCube {
    pub cube: DyadicCube,
    /// `d(Q, ∂Ω)`.
    pub distance: f64,
    /// Finest-level cube admitted only to complete the cover.
    pub layer: bool,
}

#[derive(Clone, Debug)]
pub struct WhitneyDecomposition {
    grid: Grid,
    cubes: Vec<WhitneyCube>,
    measure: f64,
}

/// Maximal dyadic cubes `Q ⊂ Ω` with `√n·l(Q) ≤ d(Q, ∂Ω)`, in depth-first
/// order.
pub fn whitney_decompose(domain: &DomainRaster, policy: CoveragePolicy) -> Result<WhitneyDecomposition> {
    let grid = *domain.grid();
    let dim = grid.dim();
    let indicator: Vec<f64> =
        (0..grid.num_cells()).map(|c| if domain.contains_cell(c) { 1.0 } else { 0.0 }).collect();
    let counts = Pyramid::new(&grid, &indicator);
    let dist = BoundaryDistance::new(domain);
    let sqrt_n = num::sqrt(dim as f64);
    let mut cubes = Vec::new();
    let mut uncovered = Vec::new();
    let mut stack = vec![DyadicCube::ROOT];
    while let Some(q) = stack.pop() {
        let inside = counts.sum(&q);
        if inside == 0.0 {
            continue;
        }
        let total = (1u64 << ((grid.level() - q.depth()) as usize * dim)) as f64;
        if inside == total {
            let d = dist.cube(&q)?;
            if sqrt_n * grid.side_of(&q) <= d {
                cubes.push(WhitneyCube { cube: q, distance: d, layer: false });
                continue;
            }
        }
        if q.depth() < grid.level() {
            // Reverse push keeps child 0 first in the output.
            for j in (0..1usize << dim).rev() {
                stack.push(q.child(j));
            }
        } else {
            let cell = grid.dyadic_index(&q);
            match policy {
                CoveragePolicy::Strict => uncovered.push(cell),
                CoveragePolicy::BoundaryLayer => {
                    cubes.push(WhitneyCube { cube: q, distance: dist.cube(&q)?, layer: true })
                }
            }
        }
    }
    if !uncovered.is_empty() {
        uncovered.sort_unstable();
        return Err(Error::Coverage { uncovered });
    }
    Ok(WhitneyDecomposition { grid, cubes, measure: domain.measure() })
}

impl WhitneyDecomposition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cubes(&self) -> &[WhitneyCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn cube(&self, i: usize) -> Cube {
        self.grid.cube_of(&self.cubes[i].cube)
    }

    /// `Q* = (9/8)Q`.
    pub fn dilated(&self, i: usize) -> Cube {
        self.cube(i).dilate(DILATION)
    }

    pub fn layer_count(&self) -> usize {
        self.cubes.iter().filter(|c| c.layer).count()
    }

    /// `Σ |Q|`, compensated.
    pub fn total_volume(&self) -> f64 {
        num::sum(self.cubes.iter().map(|c| self.grid.volume_of(&c.cube)))
    }

    /// Raster measure `|Ω|`.
    pub fn domain_measure(&self) -> f64 {
        self.measure
    }

    /// Owning cube of each cell, `None` outside Ω.
    pub fn cell_owner(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.grid.num_cells()];
        for (i, c) in self.cubes.iter().enumerate() {
            self.grid.for_each_cell_in(&c.cube, |cell| out[cell] = Some(i)).expect("whitney cubes resolve");
        }
        out
    }

    /// Extremes of `d(Q,∂Ω)/(√n·l(Q))` over non-layer cubes.
    pub fn comparability(&self) -> Option<(f64, f64)> {
        let sqrt_n = num::sqrt(self.grid.dim() as f64);
        self.cubes.iter().filter(|c| !c.layer).fold(None, |acc, c| {
            let r = c.distance / (sqrt_n * self.grid.side_of(&c.cube));
            Some(match acc {
                None => (r, r),
                Some((lo, hi)) => (f64::min(lo, r), f64::max(hi, r)),
            })
        })
    }

    pub(crate) fn dilated_boxes(&self) -> Vec<Aabb> {
        (0..self.len()).map(|i| Aabb::of_cube(&self.dilated(i))).collect()
    }

    /// Interior-overlap pairs of the dilated cubes.
    pub fn dilated_pairs(&self) -> Vec<(usize, usize)> {
        overlapping_pairs(&self.dilated_boxes(), self.grid.dim())
    }

    /// `max_x Σ_Q χ_{Q*}(x)` over all points, exact.
    pub fn overlap(&self) -> usize {
        let boxes = self.dilated_boxes();
        let adj = adjacency(boxes.len(), &overlapping_pairs(&boxes, self.grid.dim()));
        max_depth(&boxes, &adj, self.grid.dim())
    }

    /// `max Σ_Q χ_{Q*}` over cell centers only.
    pub fn overlap_at_centers(&self) -> usize {
        let dim = self.grid.dim();
        let mut counts = vec![0usize; self.grid.num_cells()];
        let full = DomainRaster::full(self.grid);
        for i in 0..self.len() {
            let q = self.dilated(i);
            if let Some((lo, hi)) = full.cell_box(&q) {
                self.grid.for_each_in_box(&lo, &hi, |c| {
                    if q.contains_open(&self.grid.cell_center(c)[..dim]) {
                        counts[c] += 1;
                    }
                });
            }
        }
        counts.into_iter().max().unwrap_or(0)
    }

    /// Indices of non-layer cubes whose dilation leaves Ω.
    pub fn dilations_outside(&self, domain: &DomainRaster) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !self.cubes[i].layer && !domain.contains_open_cube(&self.dilated(i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::grid::CellMask;

    fn unit_square(level: u32) -> DomainRaster {
        "box((0,0),(1,1))".parse::<DomainSpec>().unwrap().rasterize(Grid::unit(2, level).unwrap()).unwrap()
    }

    /// Independent reference: every admissible dyadic cube with no
    /// admissible strict ancestor, n = 1, Ω = (0,1).
    fn reference_interval(level: u32) -> Vec<(u32, u32)> {
        let admissible = |d: u32, k: u32| {
            let l = 1.0 / f64::from(1u32 << d);
            let a = f64::from(k) * l;
            let dist = a.min(1.0 - (a + l));
            l <= dist
        };
        let mut out = Vec::new();
        for d in 0..=level {
            for k in 0..1u32 << d {
                if admissible(d, k) && (0..d).all(|e| !admissible(e, k >> (d - e))) {
                    out.push((d, k));
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn interval_matches_reference() {
        let g = Grid::unit(1, 6).unwrap();
        let w = whitney_decompose(&DomainRaster::full(g), CoveragePolicy::BoundaryLayer).unwrap();
        let mut got: Vec<(u32, u32)> =
            w.cubes().iter().filter(|c| !c.layer).map(|c| (c.cube.depth(), c.cube.coords()[0])).collect();
        got.sort_unstable();
        assert_eq!(got, reference_interval(6));
        // Largest cubes: [1/4,1/2) and [1/2,3/4).
        assert!(got.contains(&(2, 1)) && got.contains(&(2, 2)));
        assert_eq!(w.layer_count(), 2);
        assert_eq!(w.total_volume(), 1.0);
        assert!(matches!(
            whitney_decompose(&DomainRaster::full(g), CoveragePolicy::Strict),
            Err(Error::Coverage { ref uncovered }) if uncovered == &alloc::vec![0, 63]
        ));
    }

    #[test]
    fn square_cover_and_comparability() {
        for level in [4, 5, 6] {
            let d = unit_square(level);
            let w = whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap();
            assert!((w.total_volume() - 1.0).abs() <= 1e-12);
            let owner = w.cell_owner();
            assert!(owner.iter().all(Option::is_some));
            let (lo, hi) = w.comparability().unwrap();
            assert!(lo >= 1.0 && hi <= 4.0, "{lo} {hi}");
            assert!(w.dilations_outside(&d).is_empty());
        }
    }

    #[test]
    fn punctured_square_refines() {
        let g = Grid::unit(2, 5).unwrap();
        let hole = g.index_of(&[16, 16]);
        let d = DomainRaster::new(CellMask::from_fn(g, |c| c != hole)).unwrap();
        let w = whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap();
        let (lo, hi) = w.comparability().unwrap();
        assert!(lo >= 1.0 && hi <= 4.0);
        let owner = w.cell_owner();
        let near = owner[g.index_of(&[15, 16])].unwrap();
        assert!(w.cubes()[near].layer);
        assert_eq!(w.total_volume(), d.measure());
    }

    #[test]
    fn single_cell_domain() {
        let g = Grid::unit(2, 3).unwrap();
        let d = DomainRaster::new(CellMask::from_fn(g, |c| c == 9)).unwrap();
        let w = whitney_decompose(&d, CoveragePolicy::BoundaryLayer).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w.cubes()[0].layer);
        assert!(whitney_decompose(&d, CoveragePolicy::Strict).is_err());
    }

    #[test]
    fn overlap_is_level_independent() {
        let counts: Vec<usize> = [5, 6, 7]
            .iter()
            .map(|&l| whitney_decompose(&unit_square(l), CoveragePolicy::BoundaryLayer).unwrap().overlap())
            .collect();
        assert!(counts.iter().all(|&c| c == counts[0] && c <= 144), "{counts:?}");
    }
}
