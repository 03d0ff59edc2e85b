//! Cubes, dyadic addressing, grid functions and exact integration.
//!
//! A [`Grid`] is a root cube split into `2^{nL}` congruent cells, the
//! dyadic cubes of depth `L`. Cells are numbered row-major with axis 0
//! varying slowest.

mod cube;
mod dyadic;
mod function;
mod mask;
mod prefix;
mod pyramid;

pub use cube::{Cube, Point, MAX_DIM};
pub use dyadic::DyadicCube;
pub use function::{weighted_measure, GridFunction};
pub use mask::CellMask;
pub use prefix::PrefixSums;
pub use pyramid::Pyramid;

use crate::error::{Error, Result};

/// Largest level accepted in dimension `dim`.
pub const fn max_level(dim: usize) -> u32 {
    match dim {
        1 => 12,
        2 => 10,
        _ => 6,
    }
}

/// A root cube together with a refinement level.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    root: Cube,
    level: u32,
}

impl Grid {
    pub fn new(root: Cube, level: u32) -> Result<Self> {
        let dim = root.dim();
        let max = max_level(dim);
        if level > max {
            return Err(Error::LevelTooDeep { dim, level, max });
        }
        Ok(Self { root, level })
    }

    /// `[0,1)ⁿ` at `level`.
    pub fn unit(dim: usize, level: u32) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        Self::new(Cube::unit(dim), level)
    }

    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Same root at another level.
    pub fn with_level(&self, level: u32) -> Result<Self> {
        Self::new(self.root, level)
    }

    /// Cells per axis.
    pub fn side_cells(&self) -> usize {
        1 << self.level
    }

    pub fn num_cells(&self) -> usize {
        1 << (self.level as usize * self.dim())
    }

    pub fn cell_side(&self) -> f64 {
        self.root.side() / self.side_cells() as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.root.volume() / self.num_cells() as f64
    }

    /// Row-major strides; unused axes get stride 0.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0; MAX_DIM];
        let side = self.side_cells();
        let mut acc = 1;
        for i in (0..self.dim()).rev() {
            s[i] = acc;
            acc *= side;
        }
        s
    }

    pub fn coords_of(&self, cell: usize) -> [usize; MAX_DIM] {
        let mut c = [0; MAX_DIM];
        let mask = self.side_cells() - 1;
        let lvl = self.level as usize;
        let dim = self.dim();
        for (i, ci) in c.iter_mut().enumerate().take(dim) {
            *ci = (cell >> (lvl * (dim - 1 - i))) & mask;
        }
        c
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        let s = self.strides();
        (0..self.dim()).map(|i| coords[i] * s[i]).sum()
    }

    pub fn cell_lower(&self, cell: usize) -> Point {
        let c = self.coords_of(cell);
        let h = self.cell_side();
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.dim() {
            x[i] = self.root.lower(i) + c[i] as f64 * h;
        }
        x
    }

    pub fn cell_center(&self, cell: usize) -> Point {
        let c = self.coords_of(cell);
        let h = self.cell_side();
        let mut x = [0.0; MAX_DIM];
        for i in 0..self.dim() {
            x[i] = self.root.lower(i) + (c[i] as f64 + 0.5) * h;
        }
        x
    }

    /// The depth-`L` dyadic cube of a cell.
    pub fn cell_cube(&self, cell: usize) -> DyadicCube {
        let c = self.coords_of(cell);
        let mut u = [0u32; MAX_DIM];
        for i in 0..MAX_DIM {
            u[i] = c[i] as u32;
        }
        DyadicCube::new(self.level, &u[..self.dim()]).expect("cell coordinates in range")
    }

    /// Cell containing `x` in the half-open root, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if !self.root.contains(x) {
            return None;
        }
        let h = self.cell_side();
        let side = self.side_cells();
        let mut c = [0; MAX_DIM];
        for i in 0..self.dim() {
            let t = crate::num::floor((x[i] - self.root.lower(i)) / h);
            c[i] = (t.max(0.0) as usize).min(side - 1);
        }
        Some(self.index_of(&c))
    }

    pub fn check(&self, q: &DyadicCube) -> Result<()> {
        if q.depth() > self.level {
            return Err(Error::Resolution { depth: q.depth(), level: self.level });
        }
        Ok(())
    }

    /// Geometric cube of a dyadic address.
    pub fn cube_of(&self, q: &DyadicCube) -> Cube {
        let side = self.root.side() / (1u64 << q.depth()) as f64;
        let mut c = [0.0; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(self.dim()) {
            *ci = self.root.lower(i) + (f64::from(q.coords()[i]) + 0.5) * side;
        }
        Cube::new(&c[..self.dim()], side / 2.0).expect("dyadic cube is valid")
    }

    pub fn side_of(&self, q: &DyadicCube) -> f64 {
        self.root.side() / (1u64 << q.depth()) as f64
    }

    pub fn volume_of(&self, q: &DyadicCube) -> f64 {
        self.root.volume() / (1u64 << (q.depth() as usize * self.dim())) as f64
    }

    /// Number of cells inside a dyadic cube of depth at most `L`.
    pub fn cells_in(&self, q: &DyadicCube) -> usize {
        1 << ((self.level - q.depth()) as usize * self.dim())
    }

    /// Half-open cell-coordinate box `[lo, hi)` of a dyadic cube.
    pub fn cell_range(&self, q: &DyadicCube) -> Result<([usize; MAX_DIM], [usize; MAX_DIM])> {
        self.check(q)?;
        let shift = self.level - q.depth();
        let mut lo = [0; MAX_DIM];
        let mut hi = [1; MAX_DIM];
        for i in 0..self.dim() {
            lo[i] = (q.coords()[i] as usize) << shift;
            hi[i] = (q.coords()[i] as usize + 1) << shift;
        }
        Ok((lo, hi))
    }

    /// Row-major index of `q` among the cubes of its depth.
    pub fn dyadic_index(&self, q: &DyadicCube) -> usize {
        let d = q.depth() as usize;
        let dim = self.dim();
        (0..dim).map(|i| (q.coords()[i] as usize) << (d * (dim - 1 - i))).sum()
    }

    /// Inverse of [`Grid::dyadic_index`].
    pub fn dyadic_at(&self, depth: u32, index: usize) -> DyadicCube {
        let d = depth as usize;
        let dim = self.dim();
        let mask = (1usize << d) - 1;
        let mut u = [0u32; MAX_DIM];
        for (i, ui) in u.iter_mut().enumerate().take(dim) {
            *ui = ((index >> (d * (dim - 1 - i))) & mask) as u32;
        }
        DyadicCube::new(depth, &u[..dim]).expect("index in range")
    }

    /// Visits every cell of the box `[lo, hi)` in row-major order.
    pub fn for_each_in_box(&self, lo: &[usize; MAX_DIM], hi: &[usize; MAX_DIM], mut f: impl FnMut(usize)) {
        let s = self.strides();
        for a in lo[0]..hi[0] {
            for b in lo[1]..hi[1] {
                let base = a * s[0] + b * s[1];
                for c in lo[2]..hi[2] {
                    f(base + c * s[2]);
                }
            }
        }
    }

    pub fn for_each_cell_in(&self, q: &DyadicCube, f: impl FnMut(usize)) -> Result<()> {
        let (lo, hi) = self.cell_range(q)?;
        self.for_each_in_box(&lo, &hi, f);
        Ok(())
    }

    /// Grid on the cube `q` with the same cells.
    pub fn subgrid(&self, q: &DyadicCube) -> Result<Grid> {
        self.check(q)?;
        Grid::new(self.cube_of(q), self.level - q.depth())
    }

    /// Ancestor of a cell at `depth`.
    pub fn cell_ancestor(&self, cell: usize, depth: u32) -> DyadicCube {
        self.cell_cube(cell).ancestor(depth)
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Incompatible)
        }
    }
}
