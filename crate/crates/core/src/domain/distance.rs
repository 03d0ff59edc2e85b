//! Exact Euclidean distance to the boundary of a rasterized domain.
//!
//! The boundary is a union of cell faces, so its distance to any point of
//! the half-cell lattice is attained at a lattice point. One separable
//! squared-distance transform over the `(2·side+1)ⁿ` lattice therefore
//! yields exact distances for cell centers, cell corners and, through a
//! scan of their surface, closed dyadic cubes.

use alloc::vec;
use alloc::vec::Vec;

use super::DomainRaster;
use crate::error::Result;
use crate::grid::{DyadicCube, Grid, MAX_DIM};
use crate::num;

/// `d(·, ∂Ω)` sampled on the half-cell lattice.
#[derive(Clone, Debug)]
pub struct BoundaryDistance {
    grid: Grid,
    ext: usize,
    strides: [usize; MAX_DIM],
    /// Squared distance in half-cell units.
    sq: Vec<f64>,
}

/// Lower envelope of parabolas; `f` holds 0 for features and `INFINITY`
/// elsewhere on the first pass.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let p = v[k as usize];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        out.fill(f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[j + 1] < qf {
            j += 1;
        }
        let p = v[j] as f64;
        *o = (qf - p) * (qf - p) + f[v[j]];
    }
}

impl BoundaryDistance {
    pub fn new(domain: &DomainRaster) -> Self {
        let grid = *domain.grid();
        let dim = grid.dim();
        let side = grid.side_cells();
        let ext = 2 * side + 1;
        let mut strides = [0; MAX_DIM];
        let mut total = 1;
        for i in (0..dim).rev() {
            strides[i] = total;
            total *= ext;
        }
        let mut sq = vec![f64::INFINITY; total];
        let gs = grid.strides();
        for (t, slot) in sq.iter_mut().enumerate() {
            let mut k = [0usize; MAX_DIM];
            for i in 0..dim {
                k[i] = (t / strides[i]) % ext;
            }
            // Closed cells containing the lattice point, per axis.
            let mut opts = [[0i64; 2]; MAX_DIM];
            let mut cnt = [1usize; MAX_DIM];
            for i in 0..dim {
                if k[i] % 2 == 0 {
                    opts[i] = [(k[i] / 2) as i64 - 1, (k[i] / 2) as i64];
                    cnt[i] = 2;
                } else {
                    opts[i] = [((k[i] - 1) / 2) as i64, 0];
                }
            }
            let mut any_in = false;
            let mut any_out = false;
            for a in 0..cnt[0] {
                for b in 0..cnt[1] {
                    for c in 0..cnt[2] {
                        let pick = [opts[0][a], opts[1][b], opts[2][c]];
                        let mut cell = 0usize;
                        let mut outside = false;
                        for i in 0..dim {
                            if pick[i] < 0 || pick[i] >= side as i64 {
                                outside = true;
                            } else {
                                cell += pick[i] as usize * gs[i];
                            }
                        }
                        if !outside && domain.contains_cell(cell) {
                            any_in = true;
                        } else {
                            any_out = true;
                        }
                    }
                }
            }
            if any_in && any_out {
                *slot = 0.0;
            }
        }
        let mut buf_in = vec![0.0; ext];
        let mut buf_out = vec![0.0; ext];
        let mut v = vec![0usize; ext];
        let mut z = vec![0.0; ext + 1];
        for axis in 0..dim {
            let s = strides[axis];
            for base in 0..total {
                if (base / s) % ext != 0 {
                    continue;
                }
                for (j, b) in buf_in.iter_mut().enumerate() {
                    *b = sq[base + j * s];
                }
                edt_1d(&buf_in, &mut buf_out, &mut v, &mut z);
                for (j, b) in buf_out.iter().enumerate() {
                    sq[base + j * s] = *b;
                }
            }
        }
        Self { grid, ext, strides, sq }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn half_unit(&self) -> f64 {
        self.grid.cell_side() / 2.0
    }

    /// Distance at a lattice point given in half-cell coordinates.
    pub fn at_lattice(&self, k: &[usize]) -> f64 {
        let t: usize = (0..self.grid.dim()).map(|i| k[i] * self.strides[i]).sum();
        num::sqrt(self.sq[t]) * self.half_unit()
    }

    /// `d(x_c, ∂Ω)` for the center of a cell.
    pub fn cell_center(&self, cell: usize) -> f64 {
        let c = self.grid.coords_of(cell);
        let mut k = [0usize; MAX_DIM];
        for i in 0..self.grid.dim() {
            k[i] = 2 * c[i] + 1;
        }
        self.at_lattice(&k)
    }

    /// Distance from every cell center, as a vector indexed by cell.
    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.grid.num_cells()).map(|c| self.cell_center(c)).collect()
    }

    /// `d(Q, ∂Ω)` for a closed dyadic cube. Zero if `Q` straddles the
    /// boundary.
    pub fn cube(&self, q: &DyadicCube) -> Result<f64> {
        let (lo, hi) = self.grid.cell_range(q)?;
        let dim = self.grid.dim();
        let mut lk = [0usize; MAX_DIM];
        let mut hk = [0usize; MAX_DIM];
        for i in 0..dim {
            lk[i] = 2 * lo[i];
            hk[i] = 2 * hi[i];
        }
        // ∂Ω is a union of cell faces; one meeting the interior of Q has its
        // midpoint strictly inside Q.
        let mut crosses = false;
        self.for_each_lattice(&lk, &hk, |t, on_surface| {
            crosses |= !on_surface && self.sq[t] == 0.0;
        });
        if crosses {
            return Ok(0.0);
        }
        let mut best = f64::INFINITY;
        self.for_each_lattice(&lk, &hk, |t, on_surface| {
            if on_surface {
                best = best.min(self.sq[t]);
            }
        });
        Ok(num::sqrt(best) * self.half_unit())
    }

    fn for_each_lattice(&self, lo: &[usize; MAX_DIM], hi: &[usize; MAX_DIM], mut f: impl FnMut(usize, bool)) {
        let dim = self.grid.dim();
        let mut h = [0usize; MAX_DIM];
        h[..dim].copy_from_slice(&hi[..dim]);
        let s = self.strides;
        let _ = self.ext;
        for a in lo[0]..=h[0] {
            let sa = dim > 0 && (a == lo[0] || a == h[0]);
            for b in lo[1]..=h[1] {
                let sb = dim > 1 && (b == lo[1] || b == h[1]);
                for c in lo[2]..=h[2] {
                    let sc = dim > 2 && (c == lo[2] || c == h[2]);
                    f(a * s[0] + b * s[1] + c * s[2], sa || sb || sc);
                }
            }
        }
    }

    /// Brute-force `d(x, ∂Ω)` for an arbitrary point, from the cell faces.
    pub fn point(domain: &DomainRaster, x: &[f64]) -> f64 {
        let g = domain.grid();
        let dim = g.dim();
        let h = g.cell_side();
        let inside = domain.contains_point(x);
        let root = g.root();
        let mut best = f64::INFINITY;
        if inside {
            // Outside of the root is part of the complement.
            for i in 0..dim {
                best = best.min(x[i] - root.lower(i)).min(root.upper(i) - x[i]);
            }
            best *= best;
        }
        for c in 0..g.num_cells() {
            if domain.contains_cell(c) == inside {
                continue;
            }
            let l = g.cell_lower(c);
            let mut d2 = 0.0;
            for i in 0..dim {
                let gap = (l[i] - x[i]).max(x[i] - (l[i] + h)).max(0.0);
                d2 += gap * gap;
            }
            best = best.min(d2);
        }
        num::sqrt(best)
    }
}
