use alloc::format;
use alloc::vec::Vec;

use super::Weight;
use crate::error::{Error, Result};
use crate::grid::{CellMask, DyadicCube, Grid, MAX_DIM};
use crate::num::{self, Accumulator};

/// Least `C` with `w(E)/w(Q) ≤ C (|E|/|Q|)^δ` over dyadic `Q ⊂ Q₀` and
/// cell sets `E ⊂ Q`, with a set attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct AInftyEstimate {
    pub c: f64,
    pub delta: f64,
    pub witness_cube: DyadicCube,
    pub witness: CellMask,
    /// Cells of the witness set.
    pub witness_size: usize,
}

/// Relative tolerance separating a new maximum from rounding noise.
const TIE: f64 = 1e-12;

/// Local Morton code of each cell of `q0`, so that every dyadic subcube
/// occupies a contiguous range.
fn morton_cells(grid: &Grid, q0: &DyadicCube) -> Result<Vec<usize>> {
    let (lo, _) = grid.cell_range(q0)?;
    let dim = grid.dim();
    let m = (grid.level() - q0.depth()) as usize;
    let count = 1usize << (m * dim);
    let mut out = Vec::with_capacity(count);
    for code in 0..count {
        let mut c = [0usize; MAX_DIM];
        for t in 0..m {
            let digit = (code >> (dim * t)) & ((1 << dim) - 1);
            for (i, ci) in c.iter_mut().enumerate().take(dim) {
                *ci |= ((digit >> i) & 1) << t;
            }
        }
        for i in 0..dim {
            c[i] += lo[i];
        }
        out.push(grid.index_of(&c));
    }
    Ok(out)
}

fn by_weight_desc(a: &(f64, usize), b: &(f64, usize)) -> core::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Extremal-subset scan: for a fixed cell count the heaviest cells maximize
/// `w(E)`, so sorted prefixes of every dyadic cube are exhaustive.
pub fn estimate_ainfty(w: &Weight, q0: &DyadicCube, delta: f64) -> Result<AInftyEstimate> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Parameter(format!("delta = {delta} must lie in (0, 1]")));
    }
    let grid = *w.grid();
    let dim = grid.dim();
    let order = morton_cells(&grid, q0)?;
    let m = grid.level() - q0.depth();
    let mut buf: Vec<(f64, usize)> = order.iter().map(|&c| (w.value(c), c)).collect();
    // Best (ratio, chunk, k) per relative depth.
    let mut best_at = alloc::vec![(0.0f64, 0usize, 0usize); m as usize + 1];
    for t in (0..=m).rev() {
        let size = 1usize << ((m - t) as usize * dim);
        let mut best = (0.0f64, 0usize, 0usize);
        for (chunk, cells) in buf.chunks_mut(size).enumerate() {
            if size > 1 {
                cells.sort_by(by_weight_desc);
            }
            let total = cells.iter().map(|x| x.0).collect::<Accumulator>().value();
            let mut acc = Accumulator::new();
            for (k, &(v, _)) in cells.iter().enumerate() {
                acc.add(v);
                let k = k + 1;
                let frac = k as f64 / size as f64;
                let r = if delta == 1.0 {
                    acc.value() * size as f64 / (total * k as f64)
                } else {
                    acc.value() / total / num::powf(frac, delta)
                };
                if r > best.0 * (1.0 + TIE) {
                    best = (r, chunk, k);
                }
            }
        }
        best_at[t as usize] = best;
    }
    let mut best = (0.0f64, 0u32, 0usize, 0usize);
    for (t, &(r, chunk, k)) in best_at.iter().enumerate() {
        if r > best.0 * (1.0 + TIE) {
            best = (r, t as u32, chunk, k);
        }
    }
    let (c, t, chunk, k) = best;
    // Morton chunk index to dyadic cube below q0.
    let mut cube = *q0;
    for s in (0..t).rev() {
        let digit = (chunk >> (dim * s as usize)) & ((1 << dim) - 1);
        cube = cube.child(digit);
    }
    let mut cells: Vec<(f64, usize)> = Vec::new();
    grid.for_each_cell_in(&cube, |cell| cells.push((w.value(cell), cell)))?;
    cells.sort_by(by_weight_desc);
    let mut witness = CellMask::empty(grid);
    for &(_, cell) in cells.iter().take(k) {
        witness.insert(cell);
    }
    Ok(AInftyEstimate { c, delta, witness_cube: cube, witness, witness_size: k })
}
