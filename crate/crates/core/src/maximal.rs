//! Dyadic fractional, weighted and sharp maximal functions on a root cube,
//! and a finite lower bound for the non-centered weighted maximal function
//! on a domain.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::DomainRaster;
use crate::error::{Error, Result};
use crate::grid::{Cube, DyadicCube, Grid, GridFunction, Pyramid, MAX_DIM};
use crate::num::{self, Accumulator};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "operator", rename_all = "snake_case"))]
pub enum MaximalKind {
    Fractional { alpha: f64 },
    Weighted,
    Sharp,
    /// `cubes` counts the enumerated cubes; `truncated` is set when the cap
    /// removed part of the aligned family.
    Noncentered { cubes: usize, truncated: bool },
}

/// A maximal function together with digests of its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalField {
    pub kind: MaximalKind,
    pub field: GridFunction,
    pub input: u64,
    pub weight: Option<u64>,
    pub domain: Option<u64>,
}

impl MaximalField {
    fn new(kind: MaximalKind, samples: Vec<f64>, grid: Grid, f: &GridFunction, w: Option<&Weight>) -> Result<Self> {
        Ok(Self {
            kind,
            field: GridFunction::from_samples(grid, samples)?,
            input: num::digest(f.samples()),
            weight: w.map(|w| num::digest(w.function().samples())),
            domain: None,
        })
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.field.value(cell)
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }
}

/// Per-cell maximum over ancestors of `term(depth, index)`, one top-down
/// pass. Returns samples in cell order.
fn ancestor_max(g: &Grid, mut term: impl FnMut(u32, usize) -> f64) -> Vec<f64> {
    let dim = g.dim();
    let mut cur = vec![term(0, 0)];
    for d in 1..=g.level() {
        let count = 1usize << (d as usize * dim);
        let mut next = vec![0.0; count];
        for (k, slot) in next.iter_mut().enumerate() {
            let q = g.dyadic_at(d, k);
            let up = cur[g.dyadic_index(&q.parent().expect("non-root"))];
            *slot = term(d, k).max(up);
        }
        cur = next;
    }
    // The deepest level is in dyadic order, which matches row-major cells.
    cur
}

fn check_alpha(alpha: f64, dim: usize) -> Result<()> {
    if !(alpha >= 0.0 && alpha <= dim as f64) {
        return Err(Error::Parameter(format!("alpha = {alpha} must lie in [0, {dim}]")));
    }
    Ok(())
}

/// `sup_{Q∋x} |Q|^{α/n−1} ∫_Q |f|` over dyadic subcubes of `q0`.
pub fn fractional_maximal(f: &GridFunction, alpha: f64, q0: &DyadicCube) -> Result<MaximalField> {
    let g = f.grid().subgrid(q0)?;
    check_alpha(alpha, g.dim())?;
    let local = f.restrict(q0)?;
    let abs: Vec<f64> = local.samples().iter().map(|v| v.abs()).collect();
    let pyr = Pyramid::new(&g, &abs);
    let cell = g.cell_volume();
    let n = g.dim() as f64;
    let samples = ancestor_max(&g, |d, k| {
        let vol = g.root().volume() / (1u64 << (d as usize * g.dim())) as f64;
        pyr.level(d)[k] * cell * num::powf(vol, alpha / n - 1.0)
    });
    MaximalField::new(MaximalKind::Fractional { alpha }, samples, g, f, None)
}

/// `sup_{Q∋x} w(Q)⁻¹ ∫_Q |f| w` over dyadic subcubes of `q0`.
pub fn weighted_maximal(f: &GridFunction, w: &Weight, q0: &DyadicCube) -> Result<MaximalField> {
    f.grid().same_as(w.grid())?;
    let g = f.grid().subgrid(q0)?;
    let lf = f.restrict(q0)?;
    let lw = w.function().restrict(q0)?;
    let fw: Vec<f64> = lf.samples().iter().zip(lw.samples()).map(|(a, b)| a.abs() * b).collect();
    let num_pyr = Pyramid::new(&g, &fw);
    let den_pyr = Pyramid::new(&g, lw.samples());
    let samples = ancestor_max(&g, |d, k| num_pyr.level(d)[k] / den_pyr.level(d)[k]);
    MaximalField::new(MaximalKind::Weighted, samples, g, f, Some(w))
}

/// `sup_{Q∋x} ⨍_Q |f − f_Q|` over dyadic subcubes of `q0`.
pub fn sharp_maximal(f: &GridFunction, q0: &DyadicCube) -> Result<MaximalField> {
    let g = f.grid().subgrid(q0)?;
    let local = f.restrict(q0)?;
    let dim = g.dim();
    let lvl = g.level();
    let pyr = Pyramid::new(&g, local.samples());
    let mut dev: Vec<Vec<Accumulator>> =
        (0..=lvl).map(|d| vec![Accumulator::new(); 1usize << (d as usize * dim)]).collect();
    let mean = |d: u32, k: usize| pyr.level(d)[k] / (1usize << ((lvl - d) as usize * dim)) as f64;
    for c in 0..g.num_cells() {
        let v = local.value(c);
        let coords = g.coords_of(c);
        for d in 0..lvl {
            let shift = lvl - d;
            let k: usize = (0..dim).map(|i| (coords[i] >> shift) << (d as usize * (dim - 1 - i))).sum();
            dev[d as usize][k].add((v - mean(d, k)).abs());
        }
    }
    let samples = ancestor_max(&g, |d, k| {
        if d == lvl {
            0.0
        } else {
            dev[d as usize][k].value() / (1usize << ((lvl - d) as usize * dim)) as f64
        }
    });
    MaximalField::new(MaximalKind::Sharp, samples, g, f, None)
}

/// Enumerated cubes for [`noncentered_maximal`].
#[derive(Clone, Debug, PartialEq, Default)]
pub enum CubeFamily {
    /// Dyadic subcubes of the root.
    Dyadic,
    /// Cubes of dyadic side `2^m` cells with any cell corner as lower
    /// corner, smallest sides first while the running count stays within
    /// `cap`. Dyadic cubes of every side are always included.
    #[default]
    Aligned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubePolicy {
    pub family: CubeFamily,
    pub cap: usize,
    /// Arbitrary additional cubes; each must have its midpoint in Ω.
    pub extra: Vec<Cube>,
}

pub const DEFAULT_CUBE_CAP: usize = 1 << 24;

impl Default for CubePolicy {
    fn default() -> Self {
        Self { family: CubeFamily::Aligned, cap: DEFAULT_CUBE_CAP, extra: Vec::new() }
    }
}

impl CubePolicy {
    pub fn dyadic() -> Self {
        Self { family: CubeFamily::Dyadic, ..Self::default() }
    }
}

/// Trailing window maximum `out[c] = max(inp[c−s+1..=c])` along one axis.
fn sliding_max_axis(values: &mut [f64], g: &Grid, axis: usize, s: usize) {
    let side = g.side_cells();
    let stride = g.strides()[axis];
    let mut line = vec![0.0; side];
    let mut window: VecDeque<usize> = VecDeque::with_capacity(s);
    for start in 0..g.num_cells() {
        if (start / stride) % side != 0 {
            continue;
        }
        for (j, slot) in line.iter_mut().enumerate() {
            *slot = values[start + j * stride];
        }
        window.clear();
        for j in 0..side {
            while window.back().is_some_and(|&b| line[b] <= line[j]) {
                window.pop_back();
            }
            window.push_back(j);
            if window[0] + s <= j {
                window.pop_front();
            }
            values[start + j * stride] = line[window[0]];
        }
    }
}

/// Lower bound for `sup_{Q∋x} w(Ω∩Q)⁻¹ ∫_{Ω∩Q} |f| w` at each cell center,
/// the supremum running over the cubes of `policy` whose midpoint lies in
/// Ω. Cells outside Ω get 0.
pub fn noncentered_maximal(
    f: &GridFunction,
    w: &Weight,
    domain: &DomainRaster,
    policy: &CubePolicy,
) -> Result<MaximalField> {
    f.grid().same_as(w.grid())?;
    f.grid().same_as(domain.grid())?;
    let g = *f.grid();
    let dim = g.dim();
    let side = g.side_cells();
    let mask = domain.mask();
    let fw = GridFunction::from_samples(
        g,
        (0..g.num_cells()).map(|c| if mask.contains(c) { f.value(c).abs() * w.value(c) } else { 0.0 }).collect(),
    )?;
    let wm = GridFunction::from_samples(
        g,
        (0..g.num_cells()).map(|c| if mask.contains(c) { w.value(c) } else { 0.0 }).collect(),
    )?;
    let mut out = vec![f64::NEG_INFINITY; g.num_cells()];
    let mut count = 0usize;
    let mut truncated = false;
    let mut term = vec![f64::NEG_INFINITY; g.num_cells()];
    for m in 0..=g.level() {
        let s = 1usize << m;
        let aligned = (side - s + 1).pow(dim as u32);
        let stride = if policy.family == CubeFamily::Aligned && count + aligned <= policy.cap {
            1
        } else {
            if policy.family == CubeFamily::Aligned {
                truncated = true;
            }
            s
        };
        term.fill(f64::NEG_INFINITY);
        for (c, slot) in term.iter_mut().enumerate() {
            let k = g.coords_of(c);
            if (0..dim).any(|i| k[i] % stride != 0 || k[i] + s > side) {
                continue;
            }
            if !midpoint_inside(domain, &g, &k, s) {
                continue;
            }
            let mut lo = [0usize; MAX_DIM];
            let mut hi = [1usize; MAX_DIM];
            for i in 0..dim {
                lo[i] = k[i];
                hi[i] = k[i] + s;
            }
            count += 1;
            *slot = fw.box_integral(&lo, &hi) / wm.box_integral(&lo, &hi);
        }
        for axis in 0..dim {
            sliding_max_axis(&mut term, &g, axis, s);
        }
        for (o, t) in out.iter_mut().zip(&term) {
            *o = o.max(*t);
        }
    }
    for q in &policy.extra {
        if q.dim() != dim {
            return Err(Error::Parameter(format!("extra cube {q} has the wrong dimension")));
        }
        if !domain.contains_point(q.center()) {
            return Err(Error::Admissibility(format!("extra cube {q} has its midpoint outside the domain")));
        }
        let t = domain.weighted_overlap(&fw, q)? / domain.weighted_overlap(w.function(), q)?;
        count += 1;
        if let Some((lo, hi)) = domain.cell_box(q) {
            g.for_each_in_box(&lo, &hi, |c| {
                if q.contains(&g.cell_center(c)[..dim]) {
                    out[c] = out[c].max(t);
                }
            });
        }
    }
    if count == 0 {
        return Err(Error::Empty("enumerated cubes with midpoint in the domain"));
    }
    for (c, v) in out.iter_mut().enumerate() {
        if !mask.contains(c) || *v == f64::NEG_INFINITY {
            *v = 0.0;
        }
    }
    let mut field = MaximalField::new(MaximalKind::Noncentered { cubes: count, truncated }, out, g, f, Some(w))?;
    field.domain = Some(num::digest(&mask.runs().iter().map(|&r| r as f64).collect::<Vec<_>>()));
    Ok(field)
}

/// Midpoint of the cell box `[k, k+s)` lies in the open raster.
fn midpoint_inside(domain: &DomainRaster, g: &Grid, k: &[usize; MAX_DIM], s: usize) -> bool {
    let dim = g.dim();
    if s == 1 {
        return domain.contains_cell(g.index_of(&k[..dim]));
    }
    let h = s / 2;
    let mut ok = true;
    for corner in 0..1usize << dim {
        let mut c = [0usize; MAX_DIM];
        for i in 0..dim {
            c[i] = k[i] + h - 1 + ((corner >> i) & 1);
        }
        ok &= domain.contains_cell(g.index_of(&c[..dim]));
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellMask;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f1(v: &[f64]) -> GridFunction {
        let l = v.len().trailing_zeros();
        GridFunction::from_samples(Grid::unit(1, l).unwrap(), v.to_vec()).unwrap()
    }

    fn brute_dyadic(g: &Grid, c: usize, term: impl Fn(&DyadicCube) -> f64) -> f64 {
        let cell = g.cell_cube(c);
        (0..=g.level()).map(|d| term(&cell.ancestor(d))).fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn fractional_examples() {
        let one = GridFunction::constant(Grid::unit(2, 3).unwrap(), 1.0).unwrap();
        let m = fractional_maximal(&one, 0.0, &DyadicCube::ROOT).unwrap();
        assert!(m.field.samples().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let f = f1(&[0.0, 4.0]);
        assert_eq!(fractional_maximal(&f, 0.0, &DyadicCube::ROOT).unwrap().field.samples(), &[2.0, 4.0]);
        assert_eq!(fractional_maximal(&f, 1.0, &DyadicCube::ROOT).unwrap().field.samples(), &[2.0, 2.0]);
        assert!(fractional_maximal(&f, 1.5, &DyadicCube::ROOT).is_err());
    }

    #[test]
    fn weighted_examples() {
        let f = f1(&[0.0, 4.0]);
        let w = Weight::new(f1(&[1.0, 3.0])).unwrap();
        assert_eq!(weighted_maximal(&f, &w, &DyadicCube::ROOT).unwrap().field.samples(), &[3.0, 4.0]);
        let c = f1(&[-2.5; 8]);
        let w8 = Weight::new(f1(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])).unwrap();
        let m = weighted_maximal(&c, &w8, &DyadicCube::ROOT).unwrap();
        assert!(m.field.samples().iter().all(|&v| (v - 2.5).abs() < 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::unit(2, 3).unwrap();
        let r = GridFunction::build(g, |_| rng.random_range(-1.0..1.0)).unwrap();
        let a = weighted_maximal(&r, &Weight::lebesgue(g), &DyadicCube::ROOT).unwrap();
        let b = fractional_maximal(&r, 0.0, &DyadicCube::ROOT).unwrap();
        for (x, y) in a.field.samples().iter().zip(b.field.samples()) {
            assert!((x - y).abs() <= 1e-14 * y.max(1.0));
        }
    }

    #[test]
    fn sharp_examples() {
        let c = GridFunction::constant(Grid::unit(2, 2).unwrap(), 5.0).unwrap();
        assert!(sharp_maximal(&c, &DyadicCube::ROOT).unwrap().field.samples().iter().all(|&v| v == 0.0));
        assert_eq!(sharp_maximal(&f1(&[0.0, 4.0]), &DyadicCube::ROOT).unwrap().field.samples(), &[2.0, 2.0]);
        assert_eq!(sharp_maximal(&f1(&[0.0, 0.0, 4.0, 4.0]), &DyadicCube::ROOT).unwrap().field.samples(), &[2.0; 4]);
    }

    #[test]
    fn operators_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (dim, level) in [(1, 5), (2, 3), (3, 2)] {
            let g = Grid::new(Cube::centered(dim, 1.5).unwrap(), level).unwrap();
            let f = GridFunction::build(g, |_| rng.random_range(-3.0..3.0)).unwrap();
            let w = Weight::build(g, |_| rng.random_range(0.1..4.0)).unwrap();
            let alpha = 0.7;
            let fr = fractional_maximal(&f, alpha, &DyadicCube::ROOT).unwrap();
            let wm = weighted_maximal(&f, &w, &DyadicCube::ROOT).unwrap();
            let sh = sharp_maximal(&f, &DyadicCube::ROOT).unwrap();
            let abs = f.abs();
            let fw = abs.zip_map(w.function(), |a, b| a * b).unwrap();
            for c in 0..g.num_cells() {
                let want = brute_dyadic(&g, c, |q| {
                    abs.integral_direct(q).unwrap() * num::powf(g.volume_of(q), alpha / dim as f64 - 1.0)
                });
                assert!((fr.value(c) - want).abs() <= 1e-12 * want);
                let want = brute_dyadic(&g, c, |q| fw.integral_direct(q).unwrap() / w.function().integral_direct(q).unwrap());
                assert!((wm.value(c) - want).abs() <= 1e-12 * want);
                let want = brute_dyadic(&g, c, |q| f.oscillation(q).unwrap());
                assert!((sh.value(c) - want).abs() <= 1e-12 * want.max(1e-300));
            }
        }
    }

    #[test]
    fn subcube_root() {
        let f = f1(&[9.0, 9.0, 0.0, 4.0]);
        let q = DyadicCube::ROOT.child(1);
        let m = fractional_maximal(&f, 0.0, &q).unwrap();
        assert_eq!(m.field.samples(), &[2.0, 4.0]);
        assert_eq!(m.grid().root().lower(0), 0.5);
    }

    #[test]
    fn fractional_floor() {
        // M ≥ |Q₀|^{α/n−1}∫_{Q₀}|f| everywhere.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Grid::new(Cube::centered(2, 2.0).unwrap(), 4).unwrap();
        let f = GridFunction::build(g, |_| rng.random_range(0.0..1.0)).unwrap();
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let m = fractional_maximal(&f, alpha, &DyadicCube::ROOT).unwrap();
            let floor = f.total() * num::powf(16.0, alpha / 2.0 - 1.0);
            assert!(m.field.samples().iter().all(|&v| v >= floor * (1.0 - 1e-14)));
        }
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> (GridFunction, Weight) {
        let dim = rng.random_range(1..=2);
        let level = rng.random_range(0..=if dim == 1 { 7 } else { 4 });
        let g = Grid::unit(dim, level).unwrap();
        let spiky = rng.random_bool(0.5);
        let f = GridFunction::build(g, |_| {
            let v: f64 = rng.random_range(-1.0..1.0);
            if spiky { v * v * v * 10.0 } else { v }
        })
        .unwrap();
        let w = Weight::build(g, |_| num::exp(rng.random_range(-3.0..3.0))).unwrap();
        (f, w)
    }

    #[test]
    fn weak_type_one_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let (f, w) = random_instance(&mut rng);
            let g = *f.grid();
            let m = weighted_maximal(&f, &w, &DyadicCube::ROOT).unwrap();
            let fw = f.abs().zip_map(w.function(), |a, b| a * b).unwrap().total();
            let mut levels: Vec<f64> = m.field.samples().to_vec();
            levels.push(0.5 * m.field.max());
            for &t in levels.iter().map(|t| t * 0.999).collect::<Vec<_>>().iter() {
                if t <= 0.0 {
                    continue;
                }
                let set = CellMask::from_fn(g, |c| m.value(c) > t);
                let lhs = crate::grid::weighted_measure(w.function(), &set).unwrap();
                assert!(lhs <= fw / t * (1.0 + 1e-12), "{lhs} > {}", fw / t);
            }
        }
    }

    #[test]
    fn strong_type_p_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (f, w) = random_instance(&mut rng);
            let m = weighted_maximal(&f, &w, &DyadicCube::ROOT).unwrap();
            for p in [1.5, 2.0, 3.0] {
                let lhs = m.field.lp_norm_pow(p, Some(w.function())).unwrap();
                let rhs = f.lp_norm_pow(p, Some(w.function())).unwrap();
                assert!(lhs <= p * num::powf(2.0, p) / (p - 1.0) * rhs * (1.0 + 1e-12));
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_and_homogeneous(
            vals in proptest::collection::vec(-5.0f64..5.0, 16),
            bumps in proptest::collection::vec(0.0f64..2.0, 16),
            lambda in 0.01f64..100.0,
        ) {
            let g = Grid::unit(2, 2).unwrap();
            let f = GridFunction::from_samples(g, vals.clone()).unwrap();
            let big = GridFunction::from_samples(g, vals.iter().zip(&bumps).map(|(v, b)| v.abs() + b).collect()).unwrap();
            let scaled = f.map(|v| -lambda * v).unwrap();
            let w = Weight::build(g, |x| 1.0 + x[0] * 3.0 + x[1]).unwrap();
            let d = DomainRaster::full(g);
            let ops: [&dyn Fn(&GridFunction) -> MaximalField; 4] = [
                &|h| fractional_maximal(h, 0.5, &DyadicCube::ROOT).unwrap(),
                &|h| weighted_maximal(h, &w, &DyadicCube::ROOT).unwrap(),
                &|h| noncentered_maximal(h, &w, &d, &CubePolicy::default()).unwrap(),
                &|h| sharp_maximal(h, &DyadicCube::ROOT).unwrap(),
            ];
            for (i, op) in ops.iter().enumerate() {
                let a = op(&f);
                let s = op(&scaled);
                for c in 0..16 {
                    prop_assert!((s.value(c) - lambda * a.value(c)).abs() <= 1e-12 * lambda * a.value(c).max(1.0));
                }
                if i < 3 {
                    let b = op(&big);
                    for c in 0..16 {
                        prop_assert!(b.value(c) >= a.value(c) * (1.0 - 1e-14));
                    }
                }
            }
        }
    }

    fn brute_noncentered(f: &GridFunction, w: &Weight, d: &DomainRaster, all: bool) -> Vec<f64> {
        let g = *f.grid();
        let h = g.cell_side();
        let side = g.side_cells();
        let mut out = vec![0.0f64; g.num_cells()];
        for m in 0..=g.level() {
            let s = 1usize << m;
            let fw = f.abs().zip_map(w.function(), |a, b| a * b).unwrap();
            for corner in 0..g.num_cells() {
                let k = g.coords_of(corner);
                if (0..g.dim()).any(|i| k[i] + s > side || (!all && k[i] % s != 0)) {
                    continue;
                }
                let mut lo = [0.0; MAX_DIM];
                for i in 0..g.dim() {
                    lo[i] = g.root().lower(i) + k[i] as f64 * h;
                }
                let q = Cube::from_corner(&lo[..g.dim()], s as f64 * h).unwrap();
                if !d.contains_point(q.center()) {
                    continue;
                }
                let t = d.weighted_overlap(&fw, &q).unwrap() / d.weighted_overlap(w.function(), &q).unwrap();
                for c in 0..g.num_cells() {
                    if d.contains_cell(c) && q.contains(&g.cell_center(c)[..g.dim()]) {
                        out[c] = out[c].max(t);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn noncentered_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (dim, level) in [(1, 5), (2, 3)] {
            let g = Grid::unit(dim, level).unwrap();
            let d = DomainRaster::from_fn(g, |x| x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>() < 0.2).unwrap();
            let f = GridFunction::build(g, |_| rng.random_range(-1.0..1.0)).unwrap();
            let w = Weight::build(g, |_| rng.random_range(0.5..2.0)).unwrap();
            for (policy, all) in [(CubePolicy::default(), true), (CubePolicy::dyadic(), false)] {
                let got = noncentered_maximal(&f, &w, &d, &policy).unwrap();
                let want = brute_noncentered(&f, &w, &d, all);
                for c in 0..g.num_cells() {
                    assert!((got.value(c) - want[c]).abs() <= 1e-12 * want[c].max(1.0), "cell {c}");
                }
            }
        }
    }

    #[test]
    fn noncentered_examples() {
        let g = Grid::unit(2, 3).unwrap();
        let d = DomainRaster::from_fn(g, |x| x[0] + x[1] < 1.2).unwrap();
        let c = GridFunction::constant(g, -1.5).unwrap();
        let w = Weight::build(g, |x| 1.0 + x[0]).unwrap();
        let m = noncentered_maximal(&c, &w, &d, &CubePolicy::dyadic()).unwrap();
        for cell in 0..g.num_cells() {
            let want = if d.contains_cell(cell) { 1.5 } else { 0.0 };
            assert!((m.value(cell) - want).abs() < 1e-14);
        }
        let f = GridFunction::build(g, |x| x[0] * 3.0 - x[1]).unwrap();
        let full = DomainRaster::full(g);
        let one = Weight::lebesgue(g);
        let a = noncentered_maximal(&f, &one, &full, &CubePolicy::dyadic()).unwrap();
        let b = fractional_maximal(&f, 0.0, &DyadicCube::ROOT).unwrap();
        for cell in 0..g.num_cells() {
            assert!((a.value(cell) - b.value(cell)).abs() <= 1e-14 * b.value(cell));
        }
        let f = f1(&[0.0, 4.0]);
        let g1 = *f.grid();
        let d1 = DomainRaster::full(g1);
        let w1 = Weight::lebesgue(g1);
        let base = noncentered_maximal(&f, &w1, &d1, &CubePolicy::dyadic()).unwrap();
        let shifted = CubePolicy { extra: vec![Cube::new(&[0.5], 0.25).unwrap()], ..CubePolicy::dyadic() };
        let more = noncentered_maximal(&f, &w1, &d1, &shifted).unwrap();
        for cell in 0..2 {
            assert!(more.value(cell) >= base.value(cell));
        }
        let outside = CubePolicy { extra: vec![Cube::new(&[1.5], 0.25).unwrap()], ..CubePolicy::dyadic() };
        assert!(matches!(noncentered_maximal(&f, &w1, &d1, &outside), Err(Error::Admissibility(_))));
        let capped = CubePolicy { cap: 1, ..CubePolicy::default() };
        let t = noncentered_maximal(&f, &w1, &d1, &capped).unwrap();
        assert!(matches!(t.kind, MaximalKind::Noncentered { truncated: true, .. }));
    }
}
