use alloc::format;

use super::Weight;
use crate::error::{Error, Result};
use crate::grid::{DyadicCube, Pyramid};
use crate::num;

/// `K = max_Q |Q|^{−(1−α/n)p} w(Q)^{p/q} σ(Q)^{p−1}` and its maximizer.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoWeightReport {
    pub k: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub cube: DyadicCube,
}

fn check_exponents(p: f64, q: f64, alpha: f64, dim: usize) -> Result<()> {
    if !(p > 1.0 && p <= q && q.is_finite()) {
        return Err(Error::Parameter(format!("need 1 < p ≤ q < ∞, got p = {p}, q = {q}")));
    }
    if !(alpha >= 0.0 && alpha <= dim as f64) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside [0, {dim}]")));
    }
    Ok(())
}

/// Scan over every dyadic `Q ⊂ Q₀` of depth at most `L`.
pub fn two_weight_constant(w: &Weight, sigma: &Weight, p: f64, q: f64, alpha: f64, q0: &DyadicCube) -> Result<TwoWeightReport> {
    let grid = *w.grid();
    grid.check(q0)?;
    let dim = grid.dim();
    let mut cubes = alloc::vec::Vec::new();
    let mut frontier = alloc::vec![*q0];
    while let Some(c) = frontier.pop() {
        cubes.push(c);
        if c.depth() < grid.level() {
            frontier.extend(c.children(dim));
        }
    }
    two_weight_constant_over(w, sigma, p, q, alpha, cubes)
}

/// Scan over an explicit family of dyadic cubes.
pub fn two_weight_constant_over(
    w: &Weight,
    sigma: &Weight,
    p: f64,
    q: f64,
    alpha: f64,
    cubes: impl IntoIterator<Item = DyadicCube>,
) -> Result<TwoWeightReport> {
    let grid = *w.grid();
    grid.same_as(sigma.grid())?;
    let dim = grid.dim();
    check_exponents(p, q, alpha, dim)?;
    let pw = Pyramid::new(&grid, w.function().samples());
    let ps = Pyramid::new(&grid, sigma.function().samples());
    let vol = grid.cell_volume();
    let e = -(1.0 - alpha / dim as f64) * p;
    let mut best: Option<TwoWeightReport> = None;
    for c in cubes {
        grid.check(&c)?;
        let wq = pw.sum(&c) * vol;
        let sq = ps.sum(&c) * vol;
        let val = num::powf(grid.volume_of(&c), e) * num::powf(wq, p / q) * num::powf(sq, p - 1.0);
        if best.as_ref().map_or(true, |b| val > b.k) {
            best = Some(TwoWeightReport { k: val, p, q, alpha, cube: c });
        }
    }
    best.ok_or(Error::Empty("cube family"))
}
