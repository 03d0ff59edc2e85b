use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{CellMask, Cube, Grid, GridFunction, MAX_DIM};
use crate::num;

/// A bounded open set given as the interior of a union of closed grid
/// cells.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainRaster {
    mask: CellMask,
    connected: bool,
}

impl DomainRaster {
    pub fn new(mask: CellMask) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::Empty("domain raster"));
        }
        let connected = components(&mask).len() == 1;
        Ok(Self { mask, connected })
    }

    /// Cells whose center satisfies `inside`.
    pub fn from_fn(grid: Grid, inside: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let dim = grid.dim();
        Self::new(CellMask::from_fn(grid, |c| inside(&grid.cell_center(c)[..dim])))
    }

    /// Every cell of the grid.
    pub fn full(grid: Grid) -> Self {
        Self::new(CellMask::full(grid)).expect("grid has cells")
    }

    pub fn grid(&self) -> &Grid {
        self.mask.grid()
    }

    pub fn mask(&self) -> &CellMask {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    #[inline]
    pub fn contains_cell(&self, cell: usize) -> bool {
        self.mask.contains(cell)
    }

    pub fn measure(&self) -> f64 {
        self.mask.measure()
    }

    /// Cells whose closure contains `x`; `None` marks a position outside
    /// the root.
    fn cells_around(&self, x: &[f64], mut f: impl FnMut(Option<usize>)) {
        let g = self.grid();
        let dim = g.dim();
        let side = g.side_cells() as i64;
        let h = g.cell_side();
        let mut options = [[0i64; 2]; MAX_DIM];
        let mut counts = [1usize; MAX_DIM];
        for i in 0..dim {
            let t = (x[i] - g.root().lower(i)) / h;
            let ft = num::floor(t);
            if ft == t {
                options[i] = [ft as i64 - 1, ft as i64];
                counts[i] = 2;
            } else {
                options[i] = [ft as i64, 0];
                counts[i] = 1;
            }
        }
        for a in 0..counts[0] {
            for b in 0..counts[1] {
                for c in 0..counts[2] {
                    let pick = [options[0][a], options[1][b], options[2][c]];
                    let mut coords = [0usize; MAX_DIM];
                    let mut outside = false;
                    for i in 0..dim {
                        if pick[i] < 0 || pick[i] >= side {
                            outside = true;
                        } else {
                            coords[i] = pick[i] as usize;
                        }
                    }
                    f(if outside { None } else { Some(g.index_of(&coords)) });
                }
            }
        }
    }

    /// Membership of a point in the open set.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        if x.iter().take(self.dim()).any(|v| !v.is_finite()) {
            return false;
        }
        let mut inside = true;
        self.cells_around(x, |c| inside &= c.is_some_and(|c| self.mask.contains(c)));
        inside
    }

    /// Cell-index box of cells meeting the closure of `q` (clamped to the
    /// root).
    pub fn cell_box(&self, q: &Cube) -> Option<([usize; MAX_DIM], [usize; MAX_DIM])> {
        let g = self.grid();
        let h = g.cell_side();
        let side = g.side_cells() as f64;
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [1usize; MAX_DIM];
        for i in 0..g.dim() {
            let a = num::floor((q.lower(i) - g.root().lower(i)) / h).max(0.0);
            let b = num::ceil((q.upper(i) - g.root().lower(i)) / h).min(side);
            if b <= a {
                return None;
            }
            lo[i] = a as usize;
            hi[i] = b as usize;
        }
        Some((lo, hi))
    }

    /// `∫_{Ω∩Q} w` with exact cell overlaps.
    pub fn weighted_overlap(&self, w: &GridFunction, q: &Cube) -> Result<f64> {
        self.grid().same_as(w.grid())?;
        let g = *self.grid();
        let Some((lo, hi)) = self.cell_box(q) else { return Ok(0.0) };
        let h = g.cell_side();
        let mut acc = num::Accumulator::new();
        g.for_each_in_box(&lo, &hi, |c| {
            if self.mask.contains(c) {
                let l = g.cell_lower(c);
                let mut u = l;
                for ui in u.iter_mut().take(g.dim()) {
                    *ui += h;
                }
                let v = q.overlap_volume(&l, &u);
                if v > 0.0 {
                    acc.add(w.value(c) * v);
                }
            }
        });
        Ok(acc.value())
    }

    /// True iff the open cube lies inside Ω.
    pub fn contains_open_cube(&self, q: &Cube) -> bool {
        let g = self.grid();
        let root = g.root();
        if (0..g.dim()).any(|i| q.lower(i) < root.lower(i) || q.upper(i) > root.upper(i)) {
            return false;
        }
        let Some((lo, hi)) = self.cell_box(q) else { return false };
        let h = g.cell_side();
        let mut ok = true;
        g.for_each_in_box(&lo, &hi, |c| {
            if ok && !self.mask.contains(c) {
                let l = g.cell_lower(c);
                let mut u = l;
                for ui in u.iter_mut().take(g.dim()) {
                    *ui += h;
                }
                if q.overlap_volume(&l, &u) > 0.0 {
                    ok = false;
                }
            }
        });
        ok
    }

    pub fn check_open_cube(&self, q: &Cube, what: &str) -> Result<()> {
        if self.contains_open_cube(q) {
            Ok(())
        } else {
            Err(Error::Admissibility(format!("{what} {q} is not contained in the domain")))
        }
    }

    /// Face-connected components of the raster, each sorted by cell index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components(&self.mask)
    }
}

fn components(mask: &CellMask) -> Vec<Vec<usize>> {
    let g = *mask.grid();
    let dim = g.dim();
    let side = g.side_cells();
    let strides = g.strides();
    let mut label = vec![usize::MAX; g.num_cells()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in mask.iter() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = Vec::new();
        label[start] = id;
        stack.push(start);
        while let Some(c) = stack.pop() {
            comp.push(c);
            let coords = g.coords_of(c);
            for i in 0..dim {
                if coords[i] > 0 {
                    let nb = c - strides[i];
                    if mask.contains(nb) && label[nb] == usize::MAX {
                        label[nb] = id;
                        stack.push(nb);
                    }
                }
                if coords[i] + 1 < side {
                    let nb = c + strides[i];
                    if mask.contains(nb) && label[nb] == usize::MAX {
                        label[nb] = id;
                        stack.push(nb);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_membership_on_faces() {
        let g = Grid::unit(1, 2).unwrap();
        let d = DomainRaster::new(CellMask::from_fn(g, |c| c < 2)).unwrap();
        assert!(d.contains_point(&[0.25]));
        assert!(d.contains_point(&[0.1]));
        assert!(!d.contains_point(&[0.5]));
        assert!(!d.contains_point(&[0.0]));
        assert!(!d.contains_point(&[0.7]));
    }

    #[test]
    fn overlap_example() {
        let g = Grid::unit(1, 1).unwrap();
        let w = GridFunction::from_samples(g, alloc::vec![1.0, 3.0]).unwrap();
        let d = DomainRaster::full(g);
        let q = Cube::new(&[0.5], 0.25).unwrap();
        assert_eq!(d.weighted_overlap(&w, &q).unwrap(), 1.0);
        assert_eq!(d.weighted_overlap(&w, &q.dilate(2.0)).unwrap(), 2.0);
    }

    #[test]
    fn connectivity() {
        let g = Grid::unit(2, 2).unwrap();
        let diag = DomainRaster::new(CellMask::from_fn(g, |c| c == 0 || c == 5)).unwrap();
        assert!(!diag.is_connected());
        assert_eq!(diag.components().len(), 2);
        assert!(DomainRaster::full(g).is_connected());
        assert!(DomainRaster::new(CellMask::empty(g)).is_err());
    }
}
