//! Both directions of the two-weight fractional maximal theorem.

use sparse_poincare_core::grid::{DyadicCube, Grid, GridFunction};
use sparse_poincare_core::maximal::fractional_maximal;
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{two_weight_constant, Weight};

use super::{estimates, exact_tol, new_report, weight_or_one, RHO_MIN};
use crate::config::ExperimentConfig;
use crate::constants::{best_params, two_weight_maximal};
use crate::error::{HarnessError, Result};
use crate::family::{instance_rng, random_grid_function};
use crate::pool;

pub const DEFAULT_COUNT: usize = 20;

/// Depth up to which every dyadic cube gives an extremal function.
pub const EXTREMAL_DEPTH: u32 = 2;

/// `‖M^d_α f‖_{L^q(w)}` and `‖f‖_{L^p(v)}`.
pub fn sides(f: &GridFunction, alpha: f64, w: &Weight, v: &Weight, p: f64, q: f64) -> Result<(f64, f64)> {
    let m = fractional_maximal(f, alpha, &DyadicCube::ROOT)?.field;
    let lhs = m.lp_norm_pow(q, Some(w.function()))?.powf(1.0 / q);
    let rhs = f.lp_norm_pow(p, Some(v.function()))?.powf(1.0 / p);
    Ok((lhs, rhs))
}

/// `σχ_Q`.
fn extremal(sigma: &Weight, q: &DyadicCube) -> Result<GridFunction> {
    let g = *sigma.grid();
    let mut samples = vec![0.0; g.num_cells()];
    g.for_each_cell_in(q, |c| samples[c] = sigma.value(c))?;
    Ok(GridFunction::from_samples(g, samples)?)
}

fn cubes_to_depth(dim: usize, depth: u32) -> Vec<DyadicCube> {
    let mut out = vec![DyadicCube::ROOT];
    let mut i = 0;
    while i < out.len() {
        let c = out[i];
        if c.depth() < depth {
            out.extend(c.children(dim));
        }
        i += 1;
    }
    out
}

pub fn run(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let n = cfg.n;
    let grid: Grid = cfg.grid_at(cfg.level)?;
    let (p, q) = (cfg.p, cfg.q());
    let alpha = cfg.alpha.unwrap_or(0.0);
    let w = weight_or_one(cfg.w_spec()?.as_ref(), grid, None)?;
    let v = weight_or_one(cfg.v_spec()?.as_ref(), grid, None)?;
    let sigma = v.dual(p)?;
    let k = two_weight_constant(&w, &sigma, p, q, alpha, &DyadicCube::ROOT)?;
    let two_n = (1u64 << n) as f64;
    let rho = cfg.a.map(|a| a / two_n).or(cfg.rho);
    let (s, c) = best_params(&estimates(&sigma, &cfg.deltas())?, rho, RHO_MIN, |s| {
        two_weight_maximal(p, two_n * s.rho, k.k, s.eta)
    })
    .ok_or_else(|| HarnessError::config(format!("no admissible level-set parameters for rho = {rho:?}")))?;
    let a = two_n * s.rho;

    let mut r = new_report(cfg);
    r.instances.push(
        super::observed("hypothesis: K", k.k)
            .with_witness(format!("cube {}", grid.cube_of(&k.cube)))
            .metric("c_sigma", s.c)
            .metric("delta_sigma", s.delta)
            .metric("a", a)
            .metric("eta", s.eta),
    );

    let random = pool::try_map(cfg.count(DEFAULT_COUNT), |i| -> Result<Instance> {
        let mut rng = instance_rng(cfg.seed, i as u64);
        let (f, kind) = random_grid_function(&mut rng, grid, true)?;
        let (lhs, rhs) = sides(&f, alpha, &w, &v, p, q)?;
        Ok(Instance::bound(format!("b->a random {i}"), lhs, rhs, Some(c), exact_tol(cfg, lhs.max(c * rhs))).with_witness(kind))
    })?;
    let mut cubes = cubes_to_depth(n, EXTREMAL_DEPTH.min(grid.level()));
    if !cubes.contains(&k.cube) {
        cubes.push(k.cube);
    }
    let extremal = pool::try_map(cubes.len(), |j| -> Result<Instance> {
        let q0 = cubes[j];
        let f = extremal(&sigma, &q0)?;
        let (lhs, rhs) = sides(&f, alpha, &w, &v, p, q)?;
        Ok(Instance::bound(format!("b->a extremal {q0}"), lhs, rhs, Some(c), exact_tol(cfg, lhs.max(c * rhs)))
            .with_witness(format!("cube {}", grid.cube_of(&q0))))
    })?;
    r.instances.extend(random);
    r.instances.extend(extremal);

    let measured = r.instances[1..].iter().map(|i| i.measured_constant).fold(0.0, f64::max);
    let cp = measured.powf(p);
    r.instances.push(
        Instance::bound("a->b K <= C^p", k.k, 1.0, Some(cp), exact_tol(cfg, k.k))
            .metric("measured_c", measured)
            .with_witness(format!("cube {}", grid.cube_of(&k.cube))),
    );
    r.notes.push(format!("alpha {alpha}, p {p}, q {q}, a {a}, proof constant {c}"));
    Ok(r)
}
