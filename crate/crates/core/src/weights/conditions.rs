use alloc::format;
use alloc::vec::Vec;

use super::{DistanceSet, Weight};
use crate::domain::DomainRaster;
use crate::error::{Error, Result};
use crate::grid::{max_level, Cube, DyadicCube, Point, MAX_DIM};
use crate::num::{self, Accumulator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ConditionKind {
    Doubling,
    Aikawa,
    ReverseHolder,
    HalfHarnack,
    Supersolution,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionReport {
    pub kind: ConditionKind,
    /// Maximum ratio (minimum integral for supersolutions).
    pub constant: f64,
    /// β or γ, when the condition has one.
    pub parameter: Option<f64>,
    pub witness: Option<Cube>,
    pub trials: usize,
    /// Trials skipped as degenerate.
    pub flagged: Vec<usize>,
}

impl ConditionReport {
    fn new(kind: ConditionKind, parameter: Option<f64>) -> Self {
        Self { kind, constant: f64::NAN, parameter, witness: None, trials: 0, flagged: Vec::new() }
    }

    fn offer_max(&mut self, value: f64, at: Cube) {
        self.trials += 1;
        if self.constant.is_nan() || value > self.constant {
            self.constant = value;
            self.witness = Some(at);
        }
    }

    fn offer_min(&mut self, value: f64, at: Cube) {
        self.trials += 1;
        if self.constant.is_nan() || value < self.constant {
            self.constant = value;
            self.witness = Some(at);
        }
    }
}

/// `D = max w(Ω∩2Q)/w(Ω∩Q)` over the trial cubes, with exact overlaps.
pub fn doubling_constant(w: &Weight, domain: &DomainRaster, trials: &[Cube]) -> Result<ConditionReport> {
    let mut rep = ConditionReport::new(ConditionKind::Doubling, None);
    for (i, q) in trials.iter().enumerate() {
        if !domain.contains_point(q.center()) {
            return Err(Error::Admissibility(format!("trial cube {q} has its midpoint outside the domain")));
        }
        let small = domain.weighted_overlap(w.function(), q)?;
        if small <= 0.0 {
            rep.flagged.push(i);
            continue;
        }
        let big = domain.weighted_overlap(w.function(), &q.dilate(2.0))?;
        rep.offer_max(big / small, *q);
    }
    if rep.trials == 0 {
        return Err(Error::Empty("admissible doubling trials"));
    }
    Ok(rep)
}

/// Midpoint rule on each orthant of `R(x, r)` with `2^level` cells per
/// axis, so the singular point of a distance weight is never sampled.
pub fn aikawa_check(
    set: &DistanceSet<'_>,
    gamma: f64,
    radii: &[f64],
    base_points: &[Vec<f64>],
    level: u32,
) -> Result<ConditionReport> {
    let Some(dim) = base_points.first().map(Vec::len) else { return Err(Error::Empty("base points")) };
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Dimension(dim));
    }
    if gamma <= -(dim as f64) {
        return Err(Error::NonIntegrable { gamma, dim });
    }
    if gamma > 0.0 || gamma.is_nan() {
        return Err(Error::Parameter(format!("gamma = {gamma} must lie in (-n, 0]")));
    }
    let max = max_level(dim);
    if level > max {
        return Err(Error::LevelTooDeep { dim, level, max });
    }
    let per_axis = 2usize << level;
    let mut rep = ConditionReport::new(ConditionKind::Aikawa, Some(gamma));
    for x0 in base_points {
        if x0.len() != dim {
            return Err(Error::Parameter("base points of mixed dimension".into()));
        }
        for &r in radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!("radius {r} must be positive")));
            }
            let h = r / (1u64 << level) as f64;
            let mut acc = Accumulator::new();
            let mut counts = [1usize; MAX_DIM];
            counts[..dim].fill(per_axis);
            let coord = |k: usize| -> f64 {
                // Cells ordered −r..0 then 0..r; both halves use offsets (j + ½)h.
                let half = per_axis / 2;
                if k < half {
                    -((half - 1 - k) as f64 + 0.5) * h
                } else {
                    ((k - half) as f64 + 0.5) * h
                }
            };
            let mut x = [0.0; MAX_DIM];
            for a in 0..counts[0] {
                for b in 0..counts[1] {
                    for c in 0..counts[2] {
                        let k = [a, b, c];
                        for i in 0..dim {
                            x[i] = x0[i] + coord(k[i]);
                        }
                        let d = set.distance(&x[..dim]);
                        if d == 0.0 && gamma < 0.0 {
                            return Err(Error::SingularSample(format!("{:?}", &x[..dim])));
                        }
                        acc.add(if gamma == 0.0 { 1.0 } else { num::powf(d, gamma) });
                    }
                }
            }
            let n_pts: usize = counts.iter().product();
            let avg = acc.value() / n_pts as f64;
            let c1 = if gamma == 0.0 { avg } else { avg / num::powf(r, gamma) };
            rep.offer_max(c1, Cube::new(x0, r)?);
        }
    }
    Ok(rep)
}

/// `(⨍_Q w^β)^{1/β} / min_Q w`.
pub fn reverse_holder_check(w: &Weight, q: &DyadicCube, beta: f64) -> Result<ConditionReport> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta = {beta} must be at least 1")));
    }
    let g = *w.grid();
    let mut acc = Accumulator::new();
    let mut min = f64::INFINITY;
    let mut count = 0usize;
    g.for_each_cell_in(q, |c| {
        let v = w.value(c);
        acc.add(num::powf(v, beta));
        min = min.min(v);
        count += 1;
    })?;
    let mean = num::powf(acc.value() / count as f64, 1.0 / beta);
    let mut rep = ConditionReport::new(ConditionKind::ReverseHolder, Some(beta));
    rep.offer_max(mean / min, g.cube_of(q));
    Ok(rep)
}

/// Ratio on one cube using exact cell overlaps for the average and the
/// cells met by the open cube for the infimum.
fn harnack_ratio(w: &Weight, domain: &DomainRaster, q: &Cube, beta: f64) -> f64 {
    let g = domain.grid();
    let h = g.cell_side();
    let Some((lo, hi)) = domain.cell_box(q) else { return f64::NAN };
    let mut acc = Accumulator::new();
    let mut vol = Accumulator::new();
    let mut min = f64::INFINITY;
    g.for_each_in_box(&lo, &hi, |c| {
        let l = g.cell_lower(c);
        let mut u = l;
        for ui in u.iter_mut().take(g.dim()) {
            *ui += h;
        }
        let v = q.overlap_volume(&l, &u);
        if v > 0.0 {
            acc.add(v * num::powf(w.value(c), beta));
            vol.add(v);
            min = min.min(w.value(c));
        }
    });
    num::powf(acc.value() / vol.value(), 1.0 / beta) / min
}

/// Maximum of `(⨍_Q w^β)^{1/β} / ess inf_Q w` over cubes with `4Q ⊂ Ω`.
pub fn half_harnack_check(w: &Weight, domain: &DomainRaster, beta: f64, p: f64, cubes: &[Cube]) -> Result<ConditionReport> {
    w.grid().same_as(domain.grid())?;
    let n = domain.dim() as f64;
    if !(beta > 0.0 && beta * (n - p) < n * (p - 1.0)) {
        return Err(Error::Parameter(format!("beta = {beta} violates 0 < β(n−p) < n(p−1) for p = {p}")));
    }
    let mut rep = ConditionReport::new(ConditionKind::HalfHarnack, Some(beta));
    for q in cubes {
        domain.check_open_cube(&q.dilate(4.0), "fourfold dilation")?;
        rep.offer_max(harnack_ratio(w, domain, q, beta), *q);
    }
    if rep.trials == 0 {
        return Err(Error::Empty("half-Harnack trial cubes"));
    }
    Ok(rep)
}

/// Tensor product of `ψ(t) = exp(−1/(1−t²))` on a cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub support: Cube,
}

fn psi(t: f64) -> (f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - t * t;
    let v = num::exp(-1.0 / s);
    (v, v * (-2.0 * t / (s * s)))
}

impl Bump {
    pub fn new(center: &[f64], radius: f64) -> Result<Self> {
        Ok(Self { support: Cube::new(center, radius)? })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = self.support.half_side();
        (0..self.support.dim()).map(|i| psi((x[i] - self.support.center()[i]) / r).0).product()
    }

    pub fn gradient(&self, x: &[f64]) -> Point {
        let dim = self.support.dim();
        let r = self.support.half_side();
        let mut vals = [(1.0, 0.0); MAX_DIM];
        for (i, v) in vals.iter_mut().enumerate().take(dim) {
            *v = psi((x[i] - self.support.center()[i]) / r);
        }
        let mut g = [0.0; MAX_DIM];
        for (i, gi) in g.iter_mut().enumerate().take(dim) {
            let mut prod = vals[i].1 / r;
            for (j, v) in vals.iter().enumerate().take(dim) {
                if j != i {
                    prod *= v.0;
                }
            }
            *gi = prod;
        }
        g
    }
}

/// Minimum over bumps of `∫ |∇w|^{p−2} ∇w · ∇η`, by the midpoint rule on
/// the domain grid.
pub fn supersolution_check(
    gradient: &dyn Fn(&[f64]) -> Point,
    p: f64,
    domain: &DomainRaster,
    bumps: &[Bump],
) -> Result<ConditionReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p = {p} must exceed 1")));
    }
    let g = domain.grid();
    let dim = g.dim();
    let mut rep = ConditionReport::new(ConditionKind::Supersolution, Some(p));
    for b in bumps {
        if !domain.contains_open_cube(&b.support) {
            return Err(Error::Support(format!("{}", b.support)));
        }
        let Some((lo, hi)) = domain.cell_box(&b.support) else { continue };
        let mut acc = Accumulator::new();
        g.for_each_in_box(&lo, &hi, |c| {
            let x = g.cell_center(c);
            let gw = gradient(&x[..dim]);
            let ge = b.gradient(&x[..dim]);
            let norm = num::sqrt((0..dim).map(|i| gw[i] * gw[i]).sum());
            let scale = if p == 2.0 { 1.0 } else if norm == 0.0 { 0.0 } else { num::powf(norm, p - 2.0) };
            acc.add(scale * (0..dim).map(|i| gw[i] * ge[i]).sum::<f64>());
        });
        rep.offer_min(acc.value() * g.cell_volume(), b.support);
    }
    if rep.trials == 0 {
        return Err(Error::Empty("bumps"));
    }
    Ok(rep)
}
