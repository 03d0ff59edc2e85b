use alloc::format;
use alloc::vec::Vec;

use super::{CellMask, DyadicCube, Grid, PrefixSums, MAX_DIM};
use crate::error::{Error, Result};
use crate::num::{self, Accumulator};

/// Piecewise-constant function: one finite value per cell of a [`Grid`].
///
/// Integrals over dyadic cubes are exact cell sums; a compensated prefix
/// table is built at construction so that box queries cost `O(2ⁿ)`.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Grid,
    samples: Vec<f64>,
    prefix: PrefixSums,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl GridFunction {
    /// Samples `sampler` at every cell center.
    pub fn build(grid: Grid, mut sampler: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let samples = (0..grid.num_cells()).map(|c| sampler(&grid.cell_center(c)[..dim])).collect();
        Self::from_samples(grid, samples)
    }

    pub fn from_samples(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.num_cells() {
            return Err(Error::Parameter(format!(
                "{} samples for {} cells",
                samples.len(),
                grid.num_cells()
            )));
        }
        if let Some((cell, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { cell, value });
        }
        let prefix = PrefixSums::new(&grid, &samples);
        Ok(Self { grid, samples, prefix })
    }

    /// The samples inside `q`, as a function on [`Grid::subgrid`].
    pub fn restrict(&self, q: &DyadicCube) -> Result<Self> {
        if q.is_root() {
            return Ok(self.clone());
        }
        let sub = self.grid.subgrid(q)?;
        let mut samples = Vec::with_capacity(sub.num_cells());
        self.grid.for_each_cell_in(q, |c| samples.push(self.samples[c]))?;
        Self::from_samples(sub, samples)
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::from_samples(grid, alloc::vec![value; grid.num_cells()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.samples[cell]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples(self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        Self::from_samples(self.grid, self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn abs(&self) -> Self {
        self.map(num::abs).expect("abs of finite samples is finite")
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫_Q f`, from the prefix table.
    pub fn integral(&self, q: &DyadicCube) -> Result<f64> {
        let (lo, hi) = self.grid.cell_range(q)?;
        Ok(self.prefix.box_sum(&lo, &hi) * self.grid.cell_volume())
    }

    /// `∫_Q f` by direct compensated summation.
    /// Integral over the cell box `[lo, hi)`.
    pub fn box_integral(&self, lo: &[usize; MAX_DIM], hi: &[usize; MAX_DIM]) -> f64 {
        self.prefix.box_sum(lo, hi) * self.grid.cell_volume()
    }

    pub fn integral_direct(&self, q: &DyadicCube) -> Result<f64> {
        let mut acc = Accumulator::new();
        self.grid.for_each_cell_in(q, |c| acc.add(self.samples[c]))?;
        Ok(acc.value() * self.grid.cell_volume())
    }

    /// `∫ f` over the whole root.
    pub fn total(&self) -> f64 {
        self.integral(&DyadicCube::ROOT).expect("root is resolvable")
    }

    /// `f_Q`.
    pub fn average(&self, q: &DyadicCube) -> Result<f64> {
        let (lo, hi) = self.grid.cell_range(q)?;
        let count: usize = (0..self.grid.dim()).map(|i| hi[i] - lo[i]).product();
        Ok(self.prefix.box_sum(&lo, &hi) / count as f64)
    }

    /// `f_{w;Q} = w(Q)⁻¹ ∫_Q f w`.
    pub fn weighted_average(&self, w: &GridFunction, q: &DyadicCube) -> Result<f64> {
        self.grid.same_as(&w.grid)?;
        let mut num_acc = Accumulator::new();
        let mut den = Accumulator::new();
        self.grid.for_each_cell_in(q, |c| {
            num_acc.add(self.samples[c] * w.samples[c]);
            den.add(w.samples[c]);
        })?;
        if den.value() == 0.0 {
            return Err(Error::DegenerateWeight(format!("{q}")));
        }
        Ok(num_acc.value() / den.value())
    }

    /// `⨍_Q |f − f_Q|`.
    pub fn oscillation(&self, q: &DyadicCube) -> Result<f64> {
        let m = self.average(q)?;
        let mut acc = Accumulator::new();
        let mut count = 0usize;
        self.grid.for_each_cell_in(q, |c| {
            acc.add(num::abs(self.samples[c] - m));
            count += 1;
        })?;
        Ok(acc.value() / count as f64)
    }

    /// `∫_E f` for a cell mask.
    pub fn integral_over(&self, mask: &CellMask) -> Result<f64> {
        self.grid.same_as(mask.grid())?;
        let s = num::sum(mask.iter().map(|c| self.samples[c]));
        Ok(s * self.grid.cell_volume())
    }

    /// `∫ |f|^p g` over the root, with `g` an optional weight.
    pub fn lp_norm_pow(&self, p: f64, w: Option<&GridFunction>) -> Result<f64> {
        if let Some(w) = w {
            self.grid.same_as(&w.grid)?;
        }
        let s = num::sum(self.samples.iter().enumerate().map(|(c, &v)| {
            let wv = w.map_or(1.0, |w| w.samples[c]);
            num::powf(num::abs(v), p) * wv
        }));
        Ok(s * self.grid.cell_volume())
    }
}

/// `w(E) = ∫_E w`.
pub fn weighted_measure(w: &GridFunction, mask: &CellMask) -> Result<f64> {
    w.integral_over(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cube;
    use proptest::prelude::*;

    fn unit1(level: u32, v: &[f64]) -> GridFunction {
        GridFunction::from_samples(Grid::unit(1, level).unwrap(), v.to_vec()).unwrap()
    }

    #[test]
    fn build_samples_cell_centers() {
        let g = Grid::unit(1, 0).unwrap();
        assert_eq!(GridFunction::build(g, |_| 7.0).unwrap().samples(), &[7.0]);
        let g = Grid::unit(1, 2).unwrap();
        assert_eq!(GridFunction::build(g, |x| x[0]).unwrap().samples(), &[0.125, 0.375, 0.625, 0.875]);
        let g = Grid::unit(2, 1).unwrap();
        let f = GridFunction::build(g, |x| x[0] + x[1]).unwrap();
        let mut s = f.samples().to_vec();
        s.sort_by(f64::total_cmp);
        assert_eq!(s, [0.5, 1.0, 1.0, 1.5]);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::unit(1, 2).unwrap();
        let e = GridFunction::build(g, |x| if x[0] > 0.5 { f64::NAN } else { 0.0 }).unwrap_err();
        assert!(matches!(e, Error::NonFinite { cell: 2, .. }));
    }

    #[test]
    fn averages_and_oscillation() {
        let f = unit1(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(f.average(&DyadicCube::ROOT).unwrap(), 2.5);
        let left = DyadicCube::ROOT.child(0);
        assert_eq!(f.average(&left).unwrap(), 1.5);
        assert_eq!(f.oscillation(&DyadicCube::ROOT).unwrap(), 1.0);
        let g = unit1(1, &[0.0, 4.0]);
        assert_eq!(g.oscillation(&DyadicCube::ROOT).unwrap(), 2.0);
        let c = GridFunction::constant(Grid::unit(2, 3).unwrap(), 5.0).unwrap();
        assert_eq!(c.oscillation(&DyadicCube::ROOT.child(2)).unwrap(), 0.0);
        assert_eq!(c.average(&DyadicCube::ROOT.child(2)).unwrap(), 5.0);
    }

    #[test]
    fn resolution_error() {
        let f = unit1(1, &[0.0, 4.0]);
        let deep = DyadicCube::ROOT.child(0).child(0);
        assert_eq!(f.average(&deep), Err(Error::Resolution { depth: 2, level: 1 }));
    }

    #[test]
    fn weighted_average_examples() {
        let f = unit1(2, &[1.0, 2.0, 3.0, 4.0]);
        let w = unit1(2, &[1.0, 1.0, 1.0, 3.0]);
        assert_eq!(f.weighted_average(&w, &DyadicCube::ROOT).unwrap(), 3.0);
        let one = unit1(2, &[1.0; 4]);
        assert_eq!(f.weighted_average(&one, &DyadicCube::ROOT).unwrap(), 2.5);
        let zero = unit1(2, &[0.0, 0.0, 1.0, 1.0]);
        assert!(matches!(f.weighted_average(&zero, &DyadicCube::ROOT.child(0)), Err(Error::DegenerateWeight(_))));
    }

    #[test]
    fn weighted_measure_examples() {
        let g = Grid::unit(1, 1).unwrap();
        let w = unit1(1, &[1.0, 3.0]);
        assert_eq!(weighted_measure(&w, &CellMask::empty(g)).unwrap(), 0.0);
        let mut right = CellMask::empty(g);
        right.insert(1);
        assert_eq!(weighted_measure(&w, &right).unwrap(), 1.5);
        let g2 = Grid::unit(2, 4).unwrap();
        let one = GridFunction::constant(g2, 1.0).unwrap();
        assert_eq!(weighted_measure(&one, &CellMask::full(g2)).unwrap(), 1.0);
    }

    fn samples_strategy() -> impl Strategy<Value = (usize, u32, Vec<f64>)> {
        (1usize..=3).prop_flat_map(|dim| {
            let max: u32 = [0, 7, 4, 3][dim];
            (Just(dim), 0..=max).prop_flat_map(move |(dim, lvl)| {
                let n = 1usize << (lvl as usize * dim);
                (Just(dim), Just(lvl), proptest::collection::vec(-1.0e3..1.0e3f64, n))
            })
        })
    }

    proptest! {
        #[test]
        fn additivity_and_prefix_consistency((dim, lvl, v) in samples_strategy(), pick in any::<u64>()) {
            let root = Cube::new(&[0.3, -1.0, 2.0][..dim], 0.75).unwrap();
            let f = GridFunction::from_samples(Grid::new(root, lvl).unwrap(), v).unwrap();
            let depth = (pick % (u64::from(lvl) + 1)) as u32;
            let mut q = DyadicCube::ROOT;
            for d in 0..depth {
                q = q.child(((pick >> (8 + 3 * d)) as usize) & ((1 << dim) - 1));
            }
            let fast = f.integral(&q).unwrap();
            let direct = f.integral_direct(&q).unwrap();
            let scale = f.samples().iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
            prop_assert!((fast - direct).abs() <= 1e-12 * direct.abs().max(scale * f.grid().volume_of(&q) * 1e-3));
            if depth < lvl {
                let parts = num::sum(q.children(dim).map(|c| f.integral_direct(&c).unwrap()));
                prop_assert!((parts - direct).abs() <= 1e-12 * direct.abs().max(scale * f.grid().cell_volume()));
            }
        }
    }

    #[test]
    fn prefix_single_cells_large_grid() {
        use rand::{Rng, SeedableRng};
        let g = Grid::unit(2, 10).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<f64> = (0..g.num_cells()).map(|_| rng.random_range(0.0..1.0e6)).collect();
        let f = GridFunction::from_samples(g, v).unwrap();
        for _ in 0..2000 {
            let cell = rng.random_range(0..g.num_cells());
            let q = g.cell_cube(cell);
            let got = f.integral(&q).unwrap();
            let want = f.value(cell) * g.cell_volume();
            assert!((got - want).abs() <= 1e-12 * want.abs(), "{got} {want}");
        }
    }
}
