//! One runner per theorem id. Each returns the checked instances; the
//! report wrapper adds status and metadata.

use std::path::Path;

use sparse_poincare_core::grid::{Cube, DyadicCube, Grid, GridFunction};
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{estimate_ainfty, two_weight_constant, AInftyEstimate, Weight, WeightSpec};
use sparse_poincare_core::domain::DomainRaster;

use crate::config::{ExperimentConfig, TheoremId};
use crate::constants::{best_params, fefferman_stein, two_weight_maximal, SparseParams};
use crate::error::{HarnessError, Result};
use crate::family::{instance_rng, random_test_function, TestFunction};
use crate::report::{Report, STABILITY_PREFIX};

pub mod fs;
pub mod global;
pub mod local;
pub mod plaplace;
pub mod sparse;
pub mod twm;

/// Lower bound for `ρ` when it is chosen automatically.
pub const RHO_MIN: f64 = 2.0;

/// Validates `cfg`, runs its theorem and wraps the result. `base` resolves
/// relative raster paths.
pub fn run(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<Report> {
    cfg.validate()?;
    let id = cfg.theorem.as_str();
    let mut r = match cfg.theorem {
        TheoremId::Fs => fs::run(cfg),
        TheoremId::Twm => twm::run(cfg),
        TheoremId::LocalP => local::run(cfg),
        TheoremId::DistE => local::run_distance(cfg),
        TheoremId::GlobalP | TheoremId::DistBdy => global::run(cfg, base),
        TheoremId::L2g => global::run_local_to_global(cfg, base),
        TheoremId::PLaplace => plaplace::run(cfg, base),
        TheoremId::Sparse1 => sparse::run_pointwise(cfg),
        TheoremId::Sparse2 => sparse::run_maximal(cfg),
    }
    .map_err(|e| match e {
        HarnessError::Core { theorem, source } if theorem == "core" => HarnessError::core(id, source),
        e => e,
    })?;
    r.theorem = id.into();
    Ok(Report::new(cfg, r))
}

pub(crate) fn new_report(cfg: &ExperimentConfig) -> VerificationReport {
    VerificationReport::new(cfg.theorem.as_str())
}

/// Samples `spec` on `grid`, or `w ≡ 1` without one.
pub(crate) fn weight_or_one(spec: Option<&WeightSpec>, grid: Grid, domain: Option<&DomainRaster>) -> Result<Weight> {
    Ok(match spec {
        Some(s) => s.sample(grid, domain)?,
        None => Weight::lebesgue(grid),
    })
}

pub(crate) fn estimates(w: &Weight, deltas: &[f64]) -> Result<Vec<AInftyEstimate>> {
    deltas.iter().map(|&d| Ok(estimate_ainfty(w, &DyadicCube::ROOT, d)?)).collect()
}

/// Absolute slack for an identity of size `scale`.
pub(crate) fn exact_tol(cfg: &ExperimentConfig, scale: f64) -> f64 {
    cfg.tolerances.exact * scale.abs()
}

/// `max − min ≤ band · min` over the values; fails on fewer than two.
pub(crate) fn stability(label: &str, values: &[f64], band: f64) -> Instance {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if values.is_empty() { f64::NAN } else { hi - lo };
    let mut inst = Instance::bound(format!("{STABILITY_PREFIX} {label}"), spread, lo, Some(band), 0.0)
        .metric("min", lo)
        .metric("max", hi)
        .metric("band", band);
    if values.len() < 2 {
        inst = inst.fail();
    }
    inst
}

/// A value that must be finite, reported as `lhs` with `rhs = 1`.
pub(crate) fn observed(label: &str, value: f64) -> Instance {
    Instance::bound(label, value, 1.0, None, 0.0)
}

/// The configured test functions of dimension `root.dim()`, or `count`
/// random ones on `root` drawn from stream `salt + i`.
pub(crate) fn test_functions(cfg: &ExperimentConfig, root: &Cube, count: usize, salt: u64) -> Vec<TestFunction> {
    let given: Vec<TestFunction> = cfg.family.functions.iter().filter(|t| t.dim() == root.dim()).cloned().collect();
    if !given.is_empty() {
        return given;
    }
    (0..cfg.count(count))
        .map(|i| {
            let mut rng = instance_rng(cfg.seed, salt + i as u64);
            random_test_function(&mut rng, root)
        })
        .collect()
}

/// Both sides of the local Poincaré inequality on the grid root:
/// `(∫|u − u_{Q₀}|^q w)^{1/q}` and `(∫|∇u|^p v)^{1/p}`.
pub fn poincare_sides(u: &GridFunction, du: &GridFunction, w: &Weight, v: &Weight, p: f64, q: f64) -> Result<(f64, f64)> {
    let mean = u.average(&DyadicCube::ROOT)?;
    let dev = u.map(|x| x - mean)?;
    let lhs = dev.lp_norm_pow(q, Some(w.function()))?.powf(1.0 / q);
    let rhs = du.lp_norm_pow(p, Some(v.function()))?.powf(1.0 / p);
    Ok((lhs, rhs))
}

/// Constant of the local two-weight Poincaré inequality on the grid root,
/// with the hypotheses it was assembled from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalBound {
    pub k: f64,
    pub w: SparseParams,
    pub sigma: SparseParams,
    pub fefferman_stein: f64,
    pub two_weight: f64,
    pub poincare: f64,
    pub total: f64,
}

impl LocalBound {
    /// `C_FS(q)^{1/q} · C_P · C_TWM(α = 1)`, each factor minimized over the
    /// A∞ estimates.
    pub fn new(w: &Weight, sigma: &Weight, p: f64, q: f64, poincare: f64, deltas: &[f64], rho: Option<f64>) -> Result<Self> {
        let n = w.grid().dim();
        let k = two_weight_constant(w, sigma, p, q, 1.0, &DyadicCube::ROOT)?.k;
        let none = || HarnessError::config(format!("no admissible sparse parameters for rho = {rho:?}"));
        let (wp, fs) = best_params(&estimates(w, deltas)?, rho, RHO_MIN, |s| fefferman_stein(n, q, s.rho, s.eta)).ok_or_else(none)?;
        let two_n = (1u64 << n) as f64;
        let (sp, tw) = best_params(&estimates(sigma, deltas)?, rho, RHO_MIN, |s| two_weight_maximal(p, two_n * s.rho, k, s.eta))
            .ok_or_else(none)?;
        let total = fs.powf(1.0 / q) * poincare * tw;
        Ok(Self { k, w: wp, sigma: sp, fefferman_stein: fs, two_weight: tw, poincare, total })
    }

    pub fn annotate(&self, inst: Instance) -> Instance {
        inst.metric("k", self.k)
            .metric("c_w", self.w.c)
            .metric("delta_w", self.w.delta)
            .metric("c_sigma", self.sigma.c)
            .metric("delta_sigma", self.sigma.delta)
            .metric("c_fefferman_stein", self.fefferman_stein)
            .metric("c_two_weight", self.two_weight)
            .metric("c_poincare", self.poincare)
    }
}

pub(crate) fn default_poincare(cfg: &ExperimentConfig, n: usize) -> f64 {
    cfg.poincare_constant.unwrap_or((n as f64).sqrt())
}
