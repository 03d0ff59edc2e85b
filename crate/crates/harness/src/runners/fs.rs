//! `∫_{Q₀}|f − f_{Q₀}|^p w ≤ C ∫_{Q₀}(M♯f)^p w` over random data and
//! A∞ weights.

use sparse_poincare_core::grid::{Cube, DyadicCube, Grid, GridFunction};
use sparse_poincare_core::maximal::sharp_maximal;
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{AInftyEstimate, Weight};

use super::{estimates, exact_tol, new_report, RHO_MIN};
use crate::config::ExperimentConfig;
use crate::constants::{best_params, fefferman_stein};
use crate::error::{HarnessError, Result};
use crate::family::{instance_rng, random_grid_function, random_weight};
use crate::pool;

pub const DEFAULT_COUNT: usize = 100;

/// Both sides for one `(f, w, p)`.
pub fn sides(f: &GridFunction, w: &Weight, p: f64) -> Result<(f64, f64)> {
    let mean = f.average(&DyadicCube::ROOT)?;
    let lhs = f.map(|x| x - mean)?.lp_norm_pow(p, Some(w.function()))?;
    let sharp = sharp_maximal(f, &DyadicCube::ROOT)?.field;
    let rhs = sharp.lp_norm_pow(p, Some(w.function()))?;
    Ok((lhs, rhs))
}

fn check(
    cfg: &ExperimentConfig,
    label: String,
    f: &GridFunction,
    w: &Weight,
    est: &[AInftyEstimate],
    p: f64,
) -> Result<Instance> {
    let n = f.grid().dim();
    let (lhs, rhs) = sides(f, w, p)?;
    let (s, c) = best_params(est, cfg.rho, RHO_MIN, |s| fefferman_stein(n, p, s.rho, s.eta))
        .ok_or_else(|| HarnessError::config(format!("no admissible sparse parameters for rho = {:?}", cfg.rho)))?;
    Ok(Instance::bound(label, lhs, rhs, Some(c), exact_tol(cfg, lhs.max(c * rhs)))
        .metric("c_w", s.c)
        .metric("delta_w", s.delta)
        .metric("rho", s.rho)
        .metric("eta", s.eta))
}

fn instance(cfg: &ExperimentConfig, i: usize, n: usize) -> Result<Vec<Instance>> {
    let mut rng = instance_rng(cfg.seed, i as u64);
    let root = if n == cfg.n { cfg.root_cube()? } else { Cube::unit(n) };
    let grid = Grid::new(root, cfg.level)?;
    let (w, wlabel) = match cfg.w_spec()? {
        Some(s) => (s.sample(grid, None)?, s.to_string()),
        None => random_weight(&mut rng, grid)?,
    };
    let given: Vec<_> = cfg.family.functions.iter().filter(|t| t.dim() == n).collect();
    let (f, flabel) = if given.is_empty() {
        let (f, kind) = random_grid_function(&mut rng, grid, false)?;
        (f, kind.to_string())
    } else {
        let t = given[i % given.len()];
        (t.sample(grid)?.0, t.to_string())
    };
    let est = estimates(&w, &cfg.deltas())?;
    cfg.p_values()
        .into_iter()
        .map(|p| Ok(check(cfg, format!("instance {i} p={p}"), &f, &w, &est, p)?.with_witness(format!("n={n} f={flabel} w={wlabel}"))))
        .collect()
}

/// `f = (0, 4)` on two cells with `w ≡ 1`: both sides equal 4.
pub fn hand_case(cfg: &ExperimentConfig) -> Result<Instance> {
    let g = Grid::unit(1, 1)?;
    let f = GridFunction::from_samples(g, vec![0.0, 4.0])?;
    let w = Weight::lebesgue(g);
    let est = estimates(&w, &cfg.deltas())?;
    check(cfg, "hand case f=(0,4) p=2".into(), &f, &w, &est, 2.0)
}

pub fn run(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let dims = cfg.dims();
    let rows = pool::try_map(cfg.count(DEFAULT_COUNT), |i| instance(cfg, i, dims[i % dims.len()]))?;
    let mut r = new_report(cfg);
    r.instances = rows.into_iter().flatten().collect();
    if dims.contains(&1) {
        r.instances.push(hand_case(cfg)?);
    }
    r.notes.push(format!("level {}, dims {dims:?}, p {:?}", cfg.level, cfg.p_values()));
    Ok(r)
}
