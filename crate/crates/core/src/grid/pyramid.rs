use alloc::vec;
use alloc::vec::Vec;

use super::{DyadicCube, Grid};
use crate::num::DoubleDouble;

/// Sums of cell values over every dyadic cube, one array per depth,
/// indexed by [`Grid::dyadic_index`].
#[derive(Clone, Debug)]
pub struct Pyramid {
    grid: Grid,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        let dim = grid.dim();
        let lvl = grid.level();
        let mut levels: Vec<Vec<f64>> = vec![Vec::new(); lvl as usize + 1];
        let mut cur: Vec<DoubleDouble> = values.iter().map(|&v| DoubleDouble::from_f64(v)).collect();
        levels[lvl as usize] = values.to_vec();
        for d in (0..lvl).rev() {
            let count = 1usize << (d as usize * dim);
            let mut next = vec![DoubleDouble::ZERO; count];
            for (k, slot) in next.iter_mut().enumerate() {
                let q = grid.dyadic_at(d, k);
                for child in q.children(dim) {
                    *slot = slot.add(cur[grid.dyadic_index(&child)]);
                }
            }
            levels[d as usize] = next.iter().map(|x| x.to_f64()).collect();
            cur = next;
        }
        Self { grid: *grid, levels }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn sum(&self, q: &DyadicCube) -> f64 {
        self.levels[q.depth() as usize][self.grid.dyadic_index(q)]
    }

    /// Sums at one depth, indexed by [`Grid::dyadic_index`].
    pub fn level(&self, depth: u32) -> &[f64] {
        &self.levels[depth as usize]
    }
}
