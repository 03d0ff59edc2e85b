//! Stopping-time sparse families and the pointwise domination checks built
//! on them.
//!
//! Families live on the grid of their root cube (see [`Grid::subgrid`]),
//! so the root is always [`DyadicCube::ROOT`]. Cubes are stored in
//! depth-first preorder with children in ascending child-index order, and
//! the carved sets `E_S = S \ ⋃ ch(S)` are represented by an owner array
//! mapping every cell to the deepest family cube containing it.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{CellMask, DyadicCube, Grid, GridFunction, Pyramid, MAX_DIM};
use crate::maximal::fractional_maximal;
use crate::num::{self, Accumulator};
use crate::report::{ratio, Instance, VerificationReport};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "variant", rename_all = "snake_case"))]
pub enum SparseKind {
    /// Children are the maximal `Q` with `⨍_Q|f − f_S| > ρ ⨍_S|f − f_S|`.
    Oscillation { rho: f64 },
    /// `S_k` are the maximal `Q` with `a^k < |Q|^{α/n−1}∫_Q|f|`; `k0` is
    /// `None` when `f ≡ 0`.
    LevelSet { alpha: f64, a: f64, k0: Option<i64> },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseCube {
    pub cube: DyadicCube,
    pub parent: Option<usize>,
    /// `κ(S)` for oscillation families, `|Q|^{α/n−1}∫_Q|f|` for level-set
    /// families.
    pub value: f64,
    /// Level `k` with `Q ∈ S_k` (level-set families only).
    pub level: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseFamily {
    grid: Grid,
    kind: SparseKind,
    cubes: Vec<SparseCube>,
    children: Vec<Vec<usize>>,
    owner: Vec<u32>,
    eta: Option<f64>,
    /// `w(E_S)/w(S)` per cube after carving.
    carved: Option<Vec<f64>>,
}

impl SparseFamily {
    /// Assembles a family and checks that it is a preorder tree of strictly
    /// nested dyadic cubes rooted at the root cube.
    pub fn from_parts(grid: Grid, kind: SparseKind, cubes: Vec<SparseCube>) -> Result<Self> {
        if cubes.first().map(|c| (c.cube, c.parent)) != Some((DyadicCube::ROOT, None)) {
            return Err(Error::InvalidCube("family must start at the root".into()));
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); cubes.len()];
        for (i, c) in cubes.iter().enumerate().skip(1) {
            grid.check(&c.cube)?;
            let Some(p) = c.parent.filter(|&p| p < i) else {
                return Err(Error::InvalidCube(format!("cube {} has no earlier parent", c.cube)));
            };
            let pc = &cubes[p].cube;
            if !(pc.contains(&c.cube) && pc.depth() < c.cube.depth()) {
                return Err(Error::InvalidCube(format!("{} is not strictly inside {pc}", c.cube)));
            }
            if let Some(&prev) = children[p].last() {
                let prev: &DyadicCube = &cubes[prev].cube;
                if prev.intersects(&c.cube) || prev.path() > c.cube.path() {
                    return Err(Error::InvalidCube(format!("siblings {prev} and {} out of order", c.cube)));
                }
            }
            children[p].push(i);
        }
        let mut owner = vec![0u32; grid.num_cells()];
        for (i, c) in cubes.iter().enumerate().skip(1) {
            let idx = u32::try_from(i).map_err(|_| Error::Parameter("family too large".into()))?;
            grid.for_each_cell_in(&c.cube, |cell| owner[cell] = idx)?;
        }
        Ok(Self { grid, kind, cubes, children, owner, eta: None, carved: None })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kind(&self) -> SparseKind {
        self.kind
    }

    pub fn cubes(&self) -> &[SparseCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Index of the deepest family cube containing `cell`.
    pub fn owner(&self, cell: usize) -> usize {
        self.owner[cell] as usize
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn carved_ratios(&self) -> Option<&[f64]> {
        self.carved.as_deref()
    }

    /// Reinstalls a recorded carving, e.g. when loading a family from disk.
    pub fn with_carving(mut self, eta: f64, ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() != self.cubes.len() {
            return Err(Error::Parameter(format!("{} ratios for {} cubes", ratios.len(), self.cubes.len())));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Parameter(format!("eta = {eta} must lie in (0, 1)")));
        }
        self.eta = Some(eta);
        self.carved = Some(ratios);
        Ok(self)
    }

    pub fn e_mask(&self, i: usize) -> CellMask {
        let mut m = CellMask::empty(self.grid);
        if self.cubes[i].cube.is_root() {
            for (c, &o) in self.owner.iter().enumerate() {
                if o == 0 {
                    m.insert(c);
                }
            }
        } else {
            self.grid
                .for_each_cell_in(&self.cubes[i].cube, |c| {
                    if self.owner[c] as usize == i {
                        m.insert(c);
                    }
                })
                .expect("family cube within grid");
        }
        m
    }

    /// `ρ` for the oscillation variant, `a·2^{−n}` for the level-set one.
    pub fn rho(&self) -> f64 {
        match self.kind {
            SparseKind::Oscillation { rho } => rho,
            SparseKind::LevelSet { a, .. } => a / (1u64 << self.grid.dim()) as f64,
        }
    }

    /// Largest `Σ_{S′∈ch(S)} w(S′) / w(S)` over the family.
    pub fn children_mass_ratio(&self, w: &GridFunction) -> Result<f64> {
        self.grid.same_as(w.grid())?;
        let mut worst = 0.0f64;
        for (i, c) in self.cubes.iter().enumerate() {
            let kids: f64 = num::sum(self.children[i].iter().map(|&j| w.integral(&self.cubes[j].cube).unwrap_or(0.0)));
            worst = worst.max(kids / w.integral(&c.cube)?);
        }
        Ok(worst)
    }

    /// For level-set families: the largest of `Σ_{R⊂Q}|R| / (2ⁿ|Q|/a)` over
    /// `k > k₀` and `Σ_R|R| / (|Q₀|/a)` at `k₀`. At most 1 when the mass
    /// bounds hold.
    pub fn level_mass_ratio(&self) -> Option<f64> {
        let SparseKind::LevelSet { a, k0, .. } = self.kind else { return None };
        let k0 = k0?;
        let two_n = (1u64 << self.grid.dim()) as f64;
        let mut worst = 0.0f64;
        for (i, c) in self.cubes.iter().enumerate() {
            let kids = num::sum(self.children[i].iter().map(|&j| self.grid.volume_of(&self.cubes[j].cube)));
            let vol = self.grid.volume_of(&c.cube);
            let bound = if c.level == Some(k0) { vol / a } else { two_n * vol / a };
            worst = worst.max(kids / bound);
        }
        Some(worst)
    }
}

fn compose(outer: &DyadicCube, local: &DyadicCube, dim: usize) -> DyadicCube {
    let d = local.depth();
    let mut c = [0u32; MAX_DIM];
    for i in 0..dim {
        c[i] = (outer.coords()[i] << d) + local.coords()[i];
    }
    DyadicCube::new(outer.depth() + d, &c[..dim]).expect("nested address")
}

/// Maximal strict dyadic subcubes `Q ⊊ q` with `select(Q, Σ_Q)`, in
/// preorder.
fn maximal_below(pyr: &Pyramid, q: &DyadicCube, select: &dyn Fn(&DyadicCube, f64) -> bool, out: &mut Vec<DyadicCube>) {
    let g = pyr.grid();
    if q.depth() >= g.level() {
        return;
    }
    for child in q.children(g.dim()) {
        if select(&child, pyr.sum(&child)) {
            out.push(child);
        } else {
            maximal_below(pyr, &child, select, out);
        }
    }
}

/// Oscillation stopping-time family of `f` on `q0`.
pub fn build_sparse_oscillation(f: &GridFunction, q0: &DyadicCube, rho: f64) -> Result<SparseFamily> {
    if !(rho > 1.0 && rho.is_finite()) {
        return Err(Error::Parameter(format!("rho = {rho} must exceed 1")));
    }
    let f0 = f.restrict(q0)?;
    let g = *f0.grid();
    let mut cubes = Vec::new();
    grow_oscillation(&f0, DyadicCube::ROOT, None, rho, &mut cubes)?;
    SparseFamily::from_parts(g, SparseKind::Oscillation { rho }, cubes)
}

fn grow_oscillation(
    f: &GridFunction,
    s: DyadicCube,
    parent: Option<usize>,
    rho: f64,
    cubes: &mut Vec<SparseCube>,
) -> Result<()> {
    let g = f.grid();
    let mean = f.average(&s)?;
    let local = f.restrict(&s)?;
    let dev: Vec<f64> = local.samples().iter().map(|v| (v - mean).abs()).collect();
    let sub = *local.grid();
    let pyr = Pyramid::new(&sub, &dev);
    let kappa = pyr.sum(&DyadicCube::ROOT) / sub.num_cells() as f64;
    let me = cubes.len();
    cubes.push(SparseCube { cube: s, parent, value: kappa, level: None });
    if kappa == 0.0 {
        return Ok(());
    }
    let threshold = rho * kappa;
    let mut kids = Vec::new();
    maximal_below(&pyr, &DyadicCube::ROOT, &|q, sum| sum / sub.cells_in(q) as f64 > threshold, &mut kids);
    for k in kids {
        grow_oscillation(f, compose(&s, &k, g.dim()), Some(me), rho, cubes)?;
    }
    Ok(())
}

fn eta_for(c_w: f64, delta_w: f64, rho: f64) -> Result<f64> {
    if !(c_w >= 1.0 && delta_w > 0.0 && delta_w <= 1.0) {
        return Err(Error::Parameter(format!("A∞ pair (C, δ) = ({c_w}, {delta_w}) is not admissible")));
    }
    let eta = 1.0 - c_w * num::powf(rho, -delta_w);
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("C·ρ^(−δ) = {} must be below 1", 1.0 - eta)));
    }
    Ok(eta)
}

/// Installs `η = 1 − C_w ρ^{−δ_w}` and checks `w(E_S) ≥ η w(S)` for every
/// family cube. `w` must live on the family grid.
pub fn carve_disjoint_sets(mut family: SparseFamily, w: &Weight, c_w: f64, delta_w: f64) -> Result<SparseFamily> {
    family.grid.same_as(w.grid())?;
    let eta = eta_for(c_w, delta_w, family.rho())?;
    let mut mass = vec![Accumulator::new(); family.len()];
    for (c, &o) in family.owner.iter().enumerate() {
        mass[o as usize].add(w.value(c));
    }
    let cell = family.grid.cell_volume();
    let mut ratios = Vec::with_capacity(family.len());
    for (i, c) in family.cubes.iter().enumerate() {
        let whole = w.function().integral(&c.cube)?;
        let r = mass[i].value() * cell / whole;
        if r < eta * (1.0 - 1e-12) {
            return Err(Error::Sparsity { cube: c.cube.to_string(), ratio: r, eta });
        }
        ratios.push(r);
    }
    family.eta = Some(eta);
    family.carved = Some(ratios);
    Ok(family)
}

/// `Σ_S χ_S ⨍_S|f − f_S|` with the oscillations taken from `f`.
pub fn sparse_operator(family: &SparseFamily, f: &GridFunction) -> Result<GridFunction> {
    family.grid.same_as(f.grid())?;
    let mut cum = vec![0.0; family.len()];
    for (i, c) in family.cubes.iter().enumerate() {
        let kappa = f.oscillation(&c.cube)?;
        cum[i] = kappa + c.parent.map_or(0.0, |p| cum[p]);
    }
    GridFunction::from_samples(family.grid, family.owner.iter().map(|&o| cum[o as usize]).collect())
}

/// Worst cell of `lhs ≤ C·rhs`, as an instance whose measured constant is
/// the largest cellwise ratio.
fn cellwise(label: &str, lhs: &[f64], rhs: &[f64], constant: f64, grid: &Grid) -> Instance {
    let mut worst = 0;
    let mut worst_slack = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for c in 0..lhs.len() {
        let slack = constant * rhs[c] - lhs[c];
        if slack < worst_slack {
            worst_slack = slack;
            worst = c;
        }
        max_ratio = max_ratio.max(ratio(lhs[c], rhs[c]));
    }
    let scale = lhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cube = grid.cube_of(&grid.cell_cube(worst));
    let mut inst = Instance::bound(label, lhs[worst], rhs[worst], Some(constant), 1e-12 * scale)
        .with_witness(format!("cell {worst} {cube}"))
        .metric("min_slack", worst_slack);
    inst.measured_constant = max_ratio;
    inst
}

/// Builds the oscillation family of `f` at `ρ`, carves it against `w` and
/// checks `|f − f_{Q₀}| ≤ ρ2ⁿ Σ_S χ_S κ(S)` at every cell of `q0`, together
/// with the sparsity and children-mass bounds.
pub fn verify_pointwise_domination(
    f: &GridFunction,
    w: &Weight,
    q0: &DyadicCube,
    rho: f64,
    c_w: f64,
    delta_w: f64,
) -> Result<VerificationReport> {
    f.grid().same_as(w.grid())?;
    let family = build_sparse_oscillation(f, q0, rho)?;
    let w0 = Weight::new(w.function().restrict(q0)?)?;
    let family = carve_disjoint_sets(family, &w0, c_w, delta_w)?;
    let f0 = f.restrict(q0)?;
    let g = *f0.grid();
    let mean = f0.average(&DyadicCube::ROOT)?;
    let lhs: Vec<f64> = f0.samples().iter().map(|v| (v - mean).abs()).collect();
    let op = sparse_operator(&family, &f0)?;
    let c = rho * (1u64 << g.dim()) as f64;
    let eta = family.eta().expect("carved");
    let min_e = family.carved_ratios().expect("carved").iter().copied().fold(f64::INFINITY, f64::min);
    let s3 = family.children_mass_ratio(w0.function())?;
    let s3_bound = c_w * num::powf(rho, -delta_w);
    let mut report = VerificationReport::new("SPARSE1");
    let mut inst = cellwise("pointwise domination", &lhs, op.samples(), c, &g)
        .metric("cubes", family.len() as f64)
        .metric("eta", eta)
        .metric("min_e_ratio", min_e)
        .metric("children_mass_ratio", s3)
        .metric("children_mass_bound", s3_bound);
    if s3 > s3_bound * (1.0 + 1e-12) {
        inst = inst.fail();
    }
    report.instances.push(inst);
    Ok(report)
}

fn level_k0(top: f64, a: f64) -> i64 {
    let mut k = num::ceil(num::ln(top) / num::ln(a)) as i64;
    while num::powi(a, k as i32) < top {
        k += 1;
    }
    while num::powi(a, (k - 1) as i32) >= top {
        k -= 1;
    }
    k
}

/// Level-set family of `|f|` on `q0`, carved against `σ` with the pair
/// `(C_σ, δ_σ)`.
pub fn build_sparse_levelset(
    f: &GridFunction,
    alpha: f64,
    q0: &DyadicCube,
    a: f64,
    sigma: &Weight,
    c_sigma: f64,
    delta_sigma: f64,
) -> Result<SparseFamily> {
    f.grid().same_as(sigma.grid())?;
    let dim = f.grid().dim();
    let two_n = (1u64 << dim) as f64;
    if !(a > two_n && a.is_finite()) {
        return Err(Error::Parameter(format!("a = {a} must exceed 2^n = {two_n}")));
    }
    if !(alpha >= 0.0 && alpha <= dim as f64) {
        return Err(Error::Parameter(format!("alpha = {alpha} must lie in [0, {dim}]")));
    }
    let f0 = f.restrict(q0)?;
    let g = *f0.grid();
    let abs: Vec<f64> = f0.samples().iter().map(|v| v.abs()).collect();
    let pyr = Pyramid::new(&g, &abs);
    let cell = g.cell_volume();
    let expo = alpha / dim as f64 - 1.0;
    let normalized = |q: &DyadicCube, sum: f64| sum * cell * num::powf(g.volume_of(q), expo);
    let top = normalized(&DyadicCube::ROOT, pyr.sum(&DyadicCube::ROOT));
    let mut cubes = vec![SparseCube { cube: DyadicCube::ROOT, parent: None, value: top, level: None }];
    let k0 = if top > 0.0 {
        let k0 = level_k0(top, a);
        cubes[0].level = Some(k0);
        grow_levelset(&pyr, &normalized, 0, k0, a, &mut cubes);
        Some(k0)
    } else {
        None
    };
    let family = SparseFamily::from_parts(g, SparseKind::LevelSet { alpha, a, k0 }, cubes)?;
    let s0 = Weight::new(sigma.function().restrict(q0)?)?;
    carve_disjoint_sets(family, &s0, c_sigma, delta_sigma)
}

fn grow_levelset(
    pyr: &Pyramid,
    normalized: &dyn Fn(&DyadicCube, f64) -> f64,
    me: usize,
    k: i64,
    a: f64,
    cubes: &mut Vec<SparseCube>,
) {
    let q = cubes[me].cube;
    let threshold = num::powi(a, (k + 1) as i32);
    let mut kids = Vec::new();
    maximal_below(pyr, &q, &|r, sum| normalized(r, sum) > threshold, &mut kids);
    for r in kids {
        let idx = cubes.len();
        cubes.push(SparseCube { cube: r, parent: Some(me), value: normalized(&r, pyr.sum(&r)), level: Some(k + 1) });
        grow_levelset(pyr, normalized, idx, k + 1, a, cubes);
    }
}

/// Checks `(M^d_α f)^p ≤ a^{2p} Σ_{Q∈S} χ_Q (|Q|^{α/n−1}∫_Q|f|)^p` at every
/// cell of `q0`, together with the sparsity and level-mass bounds.
pub fn verify_maximal_domination(
    f: &GridFunction,
    alpha: f64,
    p: f64,
    a: f64,
    q0: &DyadicCube,
    sigma: &Weight,
    c_sigma: f64,
    delta_sigma: f64,
) -> Result<VerificationReport> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("p = {p} must lie in [1, ∞)")));
    }
    let family = build_sparse_levelset(f, alpha, q0, a, sigma, c_sigma, delta_sigma)?;
    let m = fractional_maximal(f, alpha, q0)?;
    let lhs: Vec<f64> = m.field.samples().iter().map(|v| num::powf(*v, p)).collect();
    let mut cum = vec![0.0; family.len()];
    for (i, c) in family.cubes().iter().enumerate() {
        cum[i] = num::powf(c.value, p) + c.parent.map_or(0.0, |q| cum[q]);
    }
    let rhs: Vec<f64> = (0..family.grid().num_cells()).map(|c| cum[family.owner(c)]).collect();
    let constant = num::powf(a, 2.0 * p);
    let min_e = family.carved_ratios().expect("carved").iter().copied().fold(f64::INFINITY, f64::min);
    let mass = family.level_mass_ratio().unwrap_or(0.0);
    let mut inst = cellwise("maximal domination", &lhs, &rhs, constant, family.grid())
        .metric("cubes", family.len() as f64)
        .metric("eta", family.eta().expect("carved"))
        .metric("min_e_ratio", min_e)
        .metric("level_mass_ratio", mass);
    if mass > 1.0 + 1e-12 {
        inst = inst.fail();
    }
    let mut report = VerificationReport::new("SPARSE2");
    report.instances.push(inst);
    Ok(report)
}
