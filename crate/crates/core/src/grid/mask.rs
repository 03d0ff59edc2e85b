use alloc::vec;
use alloc::vec::Vec;

use super::{DyadicCube, Grid};
use crate::error::Result;

/// A set of cells of a [`Grid`], stored as a bitset.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMask {
    grid: Grid,
    bits: Vec<u64>,
}

impl CellMask {
    pub fn empty(grid: Grid) -> Self {
        Self { grid, bits: vec![0; grid.num_cells().div_ceil(64)] }
    }

    pub fn full(grid: Grid) -> Self {
        let mut m = Self::empty(grid);
        for c in 0..grid.num_cells() {
            m.insert(c);
        }
        m
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut m = Self::empty(grid);
        for c in 0..grid.num_cells() {
            if f(c) {
                m.insert(c);
            }
        }
        m
    }

    /// All cells of a dyadic cube.
    pub fn of_cube(grid: Grid, q: &DyadicCube) -> Result<Self> {
        let mut m = Self::empty(grid);
        grid.for_each_cell_in(q, |c| m.insert(c))?;
        Ok(m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell >> 6] >> (cell & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, cell: usize) {
        self.bits[cell >> 6] |= 1 << (cell & 63);
    }

    #[inline]
    pub fn remove(&mut self, cell: usize) {
        self.bits[cell >> 6] &= !(1 << (cell & 63));
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Lebesgue measure `|E|`.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    pub fn union_with(&mut self, other: &CellMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &CellMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &CellMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    pub fn complement(&self) -> Self {
        let mut m = Self::full(self.grid);
        m.subtract(self);
        m
    }

    pub fn is_disjoint(&self, other: &CellMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    pub fn is_subset(&self, other: &CellMask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Run lengths of alternating absent/present cells in row-major order,
    /// starting with an absent run (possibly of length 0).
    pub fn runs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut state = false;
        let mut len = 0;
        for c in 0..self.grid.num_cells() {
            if self.contains(c) == state {
                len += 1;
            } else {
                out.push(len);
                state = !state;
                len = 1;
            }
        }
        out.push(len);
        out
    }

    /// Inverse of [`CellMask::runs`]; `None` if the runs do not tile the grid.
    pub fn from_runs(grid: Grid, runs: &[usize]) -> Option<Self> {
        let mut m = Self::empty(grid);
        let mut pos = 0usize;
        for (k, &r) in runs.iter().enumerate() {
            let end = pos.checked_add(r)?;
            if end > grid.num_cells() {
                return None;
            }
            if k % 2 == 1 {
                for c in pos..end {
                    m.insert(c);
                }
            }
            pos = end;
        }
        (pos == grid.num_cells()).then_some(m)
    }
}
