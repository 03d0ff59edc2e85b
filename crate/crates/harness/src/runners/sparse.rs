//! Random suites for the two sparse domination bounds.

use rand::Rng;
use sparse_poincare_core::grid::{Cube, DyadicCube, Grid};
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::sparse::{verify_maximal_domination, verify_pointwise_domination};
use sparse_poincare_core::weights::AInftyEstimate;

use super::{estimates, new_report, weight_or_one, RHO_MIN};
use crate::config::ExperimentConfig;
use crate::constants::eta;
use crate::error::{HarnessError, Result};
use crate::family::{instance_rng, random_grid_function};
use crate::pool;

pub const DEFAULT_COUNT: usize = 200;

/// The estimate giving the largest `η` at `ρ`.
fn pick(est: &[AInftyEstimate], rho: f64) -> Result<&AInftyEstimate> {
    est.iter()
        .filter(|e| eta(e.c, e.delta, rho) > 0.0)
        .max_by(|a, b| eta(a.c, a.delta, rho).total_cmp(&eta(b.c, b.delta, rho)))
        .ok_or_else(|| HarnessError::config(format!("no A-infinity estimate gives eta > 0 at rho = {rho}")))
}

/// Grid of instance `i`: dimension cycled through `dims`, level drawn from
/// `1..=level`.
fn instance_grid(cfg: &ExperimentConfig, rng: &mut impl Rng, i: usize) -> Result<Grid> {
    let dims = cfg.dims();
    let n = dims[i % dims.len()];
    let root = if n == cfg.n { cfg.root_cube()? } else { Cube::unit(n) };
    let level = rng.random_range(1..=cfg.level.max(1));
    Ok(Grid::new(root, level)?)
}

fn relabel(mut inst: Instance, label: String, witness: &str) -> Instance {
    inst.label = label;
    inst.witness = Some(match inst.witness {
        Some(w) => format!("{witness} {w}"),
        None => witness.into(),
    });
    inst
}

/// Fails unless `w(E_S)/w(S) ≥ η` for every `S`.
fn check_carving(inst: Instance, slack: f64) -> Instance {
    match (inst.get("min_e_ratio"), inst.get("eta")) {
        (Some(m), Some(e)) if m >= e * (1.0 - slack) => inst,
        _ => inst.fail(),
    }
}

pub fn run_pointwise(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let rho = cfg.rho.unwrap_or(RHO_MIN);
    let w_spec = cfg.w_spec()?;
    let rows = pool::try_map(cfg.count(DEFAULT_COUNT), |i| -> Result<Instance> {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let grid = instance_grid(cfg, &mut rng, i)?;
        let w = weight_or_one(w_spec.as_ref(), grid, None)?;
        let e = pick(&estimates(&w, &cfg.deltas())?, rho)?.clone();
        let (f, kind) = random_grid_function(&mut rng, grid, false)?;
        let rep = verify_pointwise_domination(&f, &w, &DyadicCube::ROOT, rho, e.c, e.delta)?;
        let inst = rep.instances.into_iter().next().expect("one instance");
        let witness = format!("n={} L={} f={kind}", grid.dim(), grid.level());
        Ok(check_carving(relabel(inst, format!("instance {i}"), &witness), cfg.tolerances.exact)
            .metric("c_w", e.c)
            .metric("delta_w", e.delta)
            .metric("rho", rho))
    })?;
    let mut r = new_report(cfg);
    r.instances = rows;
    r.notes.push(format!("rho {rho}, levels 1..={}", cfg.level));
    Ok(r)
}

pub fn run_maximal(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let alphas = if cfg.alphas.is_empty() { vec![cfg.alpha.unwrap_or(0.0)] } else { cfg.alphas.clone() };
    // The carving measure σ is given directly as `weights.w`.
    let s_spec = cfg.w_spec()?;
    let p_values = cfg.p_values();
    let rows = pool::try_map(cfg.count(DEFAULT_COUNT), |i| -> Result<Vec<Instance>> {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let grid = instance_grid(cfg, &mut rng, i)?;
        let n = grid.dim();
        let alpha = alphas[i % alphas.len()].min(n as f64);
        let a = cfg.a.unwrap_or((2u64 << n) as f64);
        let two_n = (1u64 << n) as f64;
        let sigma = weight_or_one(s_spec.as_ref(), grid, None)?;
        let e = pick(&estimates(&sigma, &cfg.deltas())?, a / two_n)?.clone();
        let (f, kind) = random_grid_function(&mut rng, grid, true)?;
        let witness = format!("n={n} L={} alpha={alpha} f={kind}", grid.level());
        p_values
            .iter()
            .map(|&p| {
                let rep = verify_maximal_domination(&f, alpha, p, a, &DyadicCube::ROOT, &sigma, e.c, e.delta)?;
                let inst = rep.instances.into_iter().next().expect("one instance");
                Ok(check_carving(relabel(inst, format!("instance {i} p={p}"), &witness), cfg.tolerances.exact)
                    .metric("alpha", alpha)
                    .metric("a", a)
                    .metric("c_sigma", e.c)
                    .metric("delta_sigma", e.delta))
            })
            .collect()
    })?;
    let mut r = new_report(cfg);
    r.instances = rows.into_iter().flatten().collect();
    r.notes.push(format!("alphas {alphas:?}, p {p_values:?}, levels 1..={}", cfg.level));
    Ok(r)
}
