//! Experiment configuration, schema version 1.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sparse_poincare_core::domain::{DomainRaster, DomainSpec};
use sparse_poincare_core::grid::{max_level, Cube, Grid};
use sparse_poincare_core::weights::WeightSpec;

use crate::error::{HarnessError, Result};
use crate::family::TestFunction;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "FS")]
    Fs,
    #[serde(rename = "TWM")]
    Twm,
    #[serde(rename = "LOCAL_P")]
    LocalP,
    #[serde(rename = "GLOBAL_P")]
    GlobalP,
    #[serde(rename = "DIST_E")]
    DistE,
    #[serde(rename = "DIST_BDY")]
    DistBdy,
    #[serde(rename = "PLAPLACE")]
    PLaplace,
    #[serde(rename = "SPARSE1")]
    Sparse1,
    #[serde(rename = "SPARSE2")]
    Sparse2,
    #[serde(rename = "L2G")]
    L2g,
}

impl TheoremId {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Fs => "FS",
            TheoremId::Twm => "TWM",
            TheoremId::LocalP => "LOCAL_P",
            TheoremId::GlobalP => "GLOBAL_P",
            TheoremId::DistE => "DIST_E",
            TheoremId::DistBdy => "DIST_BDY",
            TheoremId::PLaplace => "PLAPLACE",
            TheoremId::Sparse1 => "SPARSE1",
            TheoremId::Sparse2 => "SPARSE2",
            TheoremId::L2g => "L2G",
        }
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Weight spec strings: `w` is the weight on the left, `v` on the right.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub w: Option<String>,
    pub v: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeConfig {
    pub center: Vec<f64>,
    pub half_side: f64,
}

impl CubeConfig {
    pub fn cube(&self) -> Result<Cube> {
        Cube::new(&self.center, self.half_side).map_err(|e| HarnessError::config(format!("cube: {e}")))
    }
}

/// Test inputs: `count` random members, plus the listed analytic
/// functions where the theorem takes Lipschitz `u`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub count: Option<usize>,
    #[serde(default)]
    pub functions: Vec<TestFunction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative slack for identities exact on piecewise-constant data.
    pub exact: f64,
    /// Allowed relative change of a measured constant between levels.
    pub refinement: f64,
    /// Allowed relative spread of a measured constant across cubes.
    pub uniformity: f64,
    /// Allowed relative spread of a decomposition constant across levels.
    pub stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { exact: 1e-12, refinement: 0.10, uniformity: 0.20, stability: 0.15 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub theorem: TheoremId,
    pub n: usize,
    /// Dimensions cycled through by random suites; defaults to `[n]`.
    #[serde(default)]
    pub dims: Vec<usize>,
    pub level: u32,
    /// Levels of a refinement study.
    #[serde(default)]
    pub levels: Vec<u32>,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Exponents tried on every instance; defaults to `[p]`.
    #[serde(default)]
    pub p_values: Vec<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub beta: Option<f64>,
    #[serde(default)]
    pub weights: WeightsConfig,
    pub domain: Option<String>,
    pub root: Option<CubeConfig>,
    #[serde(default)]
    pub cubes: Vec<CubeConfig>,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Exponents δ at which A∞ constants are estimated; the one giving the
    /// smallest proof constant is used.
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Constant of the pointwise bound `M♯u ≤ C M_1|∇u|`; defaults to `√n`.
    pub poincare_constant: Option<f64>,
    /// Level of the grids put on each dilated Whitney cube for the
    /// hypothesis checks.
    pub local_level: Option<u32>,
}

fn default_p() -> f64 {
    2.0
}

pub const DEFAULT_DELTAS: [f64; 3] = [1.0, 0.5, 0.25];

fn err(id: TheoremId, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::config(format!("{id}: {msg}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn q(&self) -> f64 {
        self.q.unwrap_or(self.p)
    }

    pub fn dims(&self) -> Vec<usize> {
        if self.dims.is_empty() {
            vec![self.n]
        } else {
            self.dims.clone()
        }
    }

    pub fn p_values(&self) -> Vec<f64> {
        if self.p_values.is_empty() {
            vec![self.p]
        } else {
            self.p_values.clone()
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        if self.deltas.is_empty() {
            DEFAULT_DELTAS.to_vec()
        } else {
            self.deltas.clone()
        }
    }

    pub fn count(&self, default: usize) -> usize {
        self.family.count.unwrap_or(default)
    }

    pub fn root_cube(&self) -> Result<Cube> {
        match &self.root {
            Some(r) => r.cube(),
            None => Ok(Cube::unit(self.n)),
        }
    }

    pub fn grid_at(&self, level: u32) -> Result<Grid> {
        Grid::new(self.root_cube()?, level).map_err(|e| err(self.theorem, e))
    }

    fn spec(&self, s: &Option<String>) -> Result<Option<WeightSpec>> {
        s.as_deref().map(|t| t.parse::<WeightSpec>().map_err(|e| err(self.theorem, e))).transpose()
    }

    pub fn w_spec(&self) -> Result<Option<WeightSpec>> {
        self.spec(&self.weights.w)
    }

    pub fn v_spec(&self) -> Result<Option<WeightSpec>> {
        self.spec(&self.weights.v)
    }

    pub fn domain_spec(&self) -> Result<Option<DomainSpec>> {
        match self.domain.as_deref() {
            None => Ok(None),
            Some(s) if s.starts_with("pgm:") => Ok(None),
            Some(s) => s.parse::<DomainSpec>().map(Some).map_err(|e| err(self.theorem, e)),
        }
    }

    /// Rasterizes the domain on the root grid at `level`; `pgm:<path>`
    /// loads a raster file instead.
    pub fn domain_at(&self, level: u32, base: Option<&Path>) -> Result<Option<DomainRaster>> {
        let Some(s) = self.domain.as_deref() else { return Ok(None) };
        if let Some(path) = s.strip_prefix("pgm:") {
            let path = match base {
                Some(b) => b.join(path),
                None => path.into(),
            };
            let d = crate::pgm::load(&path, self.root_cube()?)?;
            if d.grid().level() != level {
                return Err(err(self.theorem, format!("raster has level {}, expected {level}", d.grid().level())));
            }
            return Ok(Some(d));
        }
        let spec = self.domain_spec()?.expect("spec string");
        spec.rasterize(self.grid_at(level)?).map(Some).map_err(|e| err(self.theorem, e))
    }

    /// Levels of the refinement study, defaulting to `default(level)`.
    pub fn levels_or(&self, default: impl FnOnce(u32) -> Vec<u32>) -> Vec<u32> {
        if self.levels.is_empty() {
            default(self.level)
        } else {
            self.levels.clone()
        }
    }

    /// Checks the schema, dimensions, levels and the exponent constraints
    /// of the selected theorem.
    pub fn validate(&self) -> Result<()> {
        let id = self.theorem;
        if self.schema != SCHEMA {
            return Err(err(id, format!("unsupported schema {} (expected {SCHEMA})", self.schema)));
        }
        for &n in self.dims().iter().chain([self.n].iter()) {
            if !(1..=3).contains(&n) {
                return Err(err(id, format!("dimension {n} outside 1..=3")));
            }
        }
        let levels: Vec<u32> = std::iter::once(self.level).chain(self.levels.iter().copied()).collect();
        for &l in &levels {
            for &n in &self.dims() {
                if l > max_level(n) {
                    return Err(err(id, format!("level {l} exceeds {} for n = {n}", max_level(n))));
                }
            }
        }
        if let Some(r) = &self.root {
            if r.center.len() != self.n {
                return Err(err(id, "root center has the wrong dimension"));
            }
            r.cube()?;
        }
        for c in &self.cubes {
            if c.center.len() != self.n {
                return Err(err(id, "cube center has the wrong dimension"));
            }
            c.cube()?;
        }
        for t in &self.family.functions {
            if !self.dims().contains(&t.dim()) {
                return Err(err(id, format!("test function `{t}` has dimension {}", t.dim())));
            }
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d <= 1.0) {
                return Err(err(id, format!("delta = {d} outside (0, 1]")));
            }
        }
        let t = &self.tolerances;
        if !(t.exact >= 0.0 && t.refinement >= 0.0 && t.uniformity >= 0.0 && t.stability >= 0.0) {
            return Err(err(id, "tolerances must be nonnegative"));
        }
        if let Some(r) = self.rho {
            if !(r > 1.0 && r.is_finite()) {
                return Err(err(id, format!("rho = {r} must exceed 1")));
            }
        }
        self.w_spec()?;
        self.v_spec()?;
        self.domain_spec()?;
        let n = self.n as f64;
        let p = self.p;
        let q = self.q();
        let pq = || -> Result<()> {
            if !(p > 1.0 && p <= q && q.is_finite()) {
                return Err(err(id, format!("need 1 < p ≤ q < ∞, got p = {p}, q = {q}")));
            }
            Ok(())
        };
        let alpha_ok = |a: f64| -> Result<()> {
            if !(0.0..=n).contains(&a) {
                return Err(err(id, format!("alpha = {a} outside [0, n]")));
            }
            Ok(())
        };
        let need_domain = || -> Result<()> {
            if self.domain.is_none() {
                return Err(err(id, "a domain is required"));
            }
            Ok(())
        };
        match id {
            TheoremId::Fs => {
                for &p in &self.p_values() {
                    if !(p > 1.0 && p.is_finite()) {
                        return Err(err(id, format!("p = {p} must exceed 1")));
                    }
                }
            }
            TheoremId::Twm => {
                pq()?;
                alpha_ok(self.alpha.unwrap_or(0.0))?;
            }
            TheoremId::LocalP => pq()?,
            TheoremId::GlobalP | TheoremId::L2g => {
                if id == TheoremId::GlobalP {
                    pq()?;
                } else if !(p >= 1.0 && p.is_finite()) {
                    return Err(err(id, format!("p = {p} must lie in [1, ∞)")));
                }
                need_domain()?;
            }
            TheoremId::DistE | TheoremId::DistBdy => {
                pq()?;
                if p >= n {
                    return Err(err(id, format!("need p < n, got p = {p}, n = {n}")));
                }
                let top = n * p / (n - p);
                if q > top {
                    return Err(err(id, format!("need q ≤ np/(n−p) = {top}, got q = {q}")));
                }
                if id == TheoremId::DistBdy {
                    need_domain()?;
                }
            }
            TheoremId::PLaplace => {
                let lo = 2.0 * n / (n + 1.0);
                if !(p > lo && p.is_finite()) {
                    return Err(err(id, format!("need p > 2n/(n+1) = {lo}, got p = {p}")));
                }
                need_domain()?;
                if self.w_spec()?.is_none() {
                    return Err(err(id, "a supersolution weight `w` is required"));
                }
            }
            TheoremId::Sparse1 => {}
            TheoremId::Sparse2 => {
                for &p in &self.p_values() {
                    if !(p >= 1.0 && p.is_finite()) {
                        return Err(err(id, format!("p = {p} must lie in [1, ∞)")));
                    }
                }
                for &a in &self.alphas {
                    alpha_ok(a)?;
                }
                alpha_ok(self.alpha.unwrap_or(0.0))?;
            }
        }
        Ok(())
    }
}
