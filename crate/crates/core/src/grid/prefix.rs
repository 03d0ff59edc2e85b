use alloc::vec;
use alloc::vec::Vec;

use super::{Grid, MAX_DIM};
use crate::num::DoubleDouble;

/// n-dimensional summed-area table over cell values, kept in
/// double-double precision so that box queries match direct compensated
/// summation to well below `1e-12` relative error.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    dim: usize,
    ext: usize,
    strides: [usize; MAX_DIM],
    table: Vec<DoubleDouble>,
}

impl PrefixSums {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        let dim = grid.dim();
        let side = grid.side_cells();
        let ext = side + 1;
        let mut strides = [0; MAX_DIM];
        let mut acc = 1;
        for i in (0..dim).rev() {
            strides[i] = acc;
            acc *= ext;
        }
        let mut table = vec![DoubleDouble::ZERO; acc];
        let mut hi = [1; MAX_DIM];
        hi[..dim].fill(side);
        grid.for_each_in_box(&[0; MAX_DIM], &hi, |cell| {
            let c = grid.coords_of(cell);
            let t: usize = (0..dim).map(|i| (c[i] + 1) * strides[i]).sum();
            table[t] = DoubleDouble::from_f64(values[cell]);
        });
        for axis in 0..dim {
            let s = strides[axis];
            for t in 0..table.len() {
                let along = (t / s) % ext;
                if along >= 1 {
                    table[t] = table[t].add(table[t - s]);
                }
            }
        }
        Self { dim, ext, strides, table }
    }

    /// Sum of values over the cell box `[lo, hi)`.
    pub fn box_sum(&self, lo: &[usize; MAX_DIM], hi: &[usize; MAX_DIM]) -> f64 {
        let mut acc = DoubleDouble::ZERO;
        for corner in 0..1usize << self.dim {
            let mut t = 0;
            let mut neg = false;
            for i in 0..self.dim {
                if corner >> i & 1 == 1 {
                    t += lo[i] * self.strides[i];
                    neg = !neg;
                } else {
                    t += hi[i] * self.strides[i];
                }
            }
            let v = self.table[t];
            acc = if neg { acc.sub(v) } else { acc.add(v) };
        }
        acc.to_f64()
    }

    pub fn extent(&self) -> usize {
        self.ext
    }
}
