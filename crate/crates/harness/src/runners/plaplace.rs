//! Single-weight Poincaré inequality for p-supersolution weights, with the
//! reverse Hölder, half-Harnack and supersolution hypotheses.

use std::path::Path;

use sparse_poincare_core::grid::{Cube, DyadicCube, Grid, MAX_DIM};
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{half_harnack_check, reverse_holder_check, supersolution_check, Bump, Weight};

use super::{new_report, observed, stability, test_functions};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::pool;

pub const DEFAULT_COUNT: usize = 5;

/// Exponent of the reverse Hölder check.
pub const REVERSE_HOLDER_BETA: f64 = 2.0;

/// Default cube half-sides, as fractions of the root side.
pub const DEFAULT_HALF_SIDES: [f64; 2] = [1.0 / 16.0, 1.0 / 32.0];

/// `β` for the half-Harnack check: the configured one, else 2 when it is
/// admissible and half the upper limit `n(p−1)/(n−p)` otherwise.
pub fn harnack_beta(cfg: &ExperimentConfig) -> f64 {
    let (n, p) = (cfg.n as f64, cfg.p);
    cfg.beta.unwrap_or(if p >= n || 2.0 * (n - p) < n * (p - 1.0) { 2.0 } else { 0.5 * n * (p - 1.0) / (n - p) })
}

/// `∫_{Q₀}|u − u_{Q₀}|^p w` and `l(Q₀)^p ∫_{Q₀}|∇u|^p w`.
pub fn sides(u: &sparse_poincare_core::grid::GridFunction, du: &sparse_poincare_core::grid::GridFunction, w: &Weight, p: f64) -> Result<(f64, f64)> {
    let side = u.grid().root().side();
    let mean = u.average(&DyadicCube::ROOT)?;
    let lhs = u.map(|x| x - mean)?.lp_norm_pow(p, Some(w.function()))?;
    let rhs = side.powf(p) * du.lp_norm_pow(p, Some(w.function()))?;
    Ok((lhs, rhs))
}

pub fn run(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<VerificationReport> {
    let id = cfg.theorem;
    let p = cfg.p;
    let spec = cfg.w_spec()?.ok_or_else(|| HarnessError::config(format!("{id}: a supersolution weight is required")))?;
    if spec.needs_domain() {
        return Err(HarnessError::config(format!("{id}: w = {spec} needs a domain; use an analytic family")));
    }
    let domain = cfg.domain_at(cfg.level, base)?.ok_or_else(|| HarnessError::config(format!("{id}: a domain is required")))?;
    let grid = *domain.grid();
    let dim = grid.dim();
    let root = *grid.root();
    let cubes: Vec<Cube> = if cfg.cubes.is_empty() {
        DEFAULT_HALF_SIDES.iter().map(|f| Cube::new(root.center(), f * root.side())).collect::<Result<_, _>>()?
    } else {
        cfg.cubes.iter().map(|c| c.cube()).collect::<Result<_>>()?
    };
    for q in &cubes {
        domain.check_open_cube(&q.dilate(4.0), "fourfold dilation")?;
    }
    let w = spec.sample(grid, Some(&domain))?;
    let mut r = new_report(cfg);

    let beta = harnack_beta(cfg);
    let hh = half_harnack_check(&w, &domain, beta, p, &cubes)?;
    r.instances.push(
        observed("hypothesis: half-Harnack", hh.constant)
            .metric("beta", beta)
            .with_witness(hh.witness.map(|c| c.to_string()).unwrap_or_default()),
    );

    let probe = vec![0.0; dim];
    if spec.gradient(&probe)?.is_none() {
        return Err(HarnessError::config(format!("{id}: w = {spec} has no analytic gradient")));
    }
    let gradient = |x: &[f64]| spec.gradient(x).ok().flatten().unwrap_or([0.0; MAX_DIM]);
    let bumps = cubes.iter().map(|q| Bump::new(q.center(), 2.0 * q.half_side())).collect::<Result<Vec<_>, _>>()?;
    let sup = supersolution_check(&gradient, p, &domain, &bumps)?;
    let scale = bumps.len() as f64 * grid.cell_volume();
    let mut inst = observed("hypothesis: supersolution pairing", sup.constant)
        .metric("bumps", bumps.len() as f64)
        .with_witness(sup.witness.map(|c| c.to_string()).unwrap_or_default());
    inst.pass = sup.constant >= -cfg.tolerances.exact * scale.max(1.0);
    r.instances.push(inst);

    let local_level = cfg.local_level.unwrap_or(cfg.level);
    let unit = Cube::unit(dim);
    let funcs = test_functions(cfg, &unit, DEFAULT_COUNT, 0);
    let mut measured = vec![Vec::new(); funcs.len()];
    for (k, q0) in cubes.iter().enumerate() {
        let local = Grid::new(*q0, local_level)?;
        let wl = spec.sample(local, None)?;
        let rh = reverse_holder_check(&wl, &DyadicCube::ROOT, REVERSE_HOLDER_BETA)?;
        r.instances.push(observed(&format!("hypothesis: reverse Holder cube {k} {q0}"), rh.constant).metric("beta", REVERSE_HOLDER_BETA));
        let rows = pool::try_map(funcs.len(), |j| -> Result<Instance> {
            let (u, du) = funcs[j].sample_on_cube(local, q0)?;
            let (lhs, rhs) = sides(&u, &du, &wl, p)?;
            Ok(Instance::bound(format!("cube {k} {q0} u={}", funcs[j]), lhs, rhs, None, 0.0).metric("side", q0.side()))
        })?;
        for (j, i) in rows.iter().enumerate() {
            measured[j].push(i.measured_constant);
        }
        r.instances.extend(rows);
    }
    if cubes.len() > 1 {
        for (j, t) in funcs.iter().enumerate() {
            r.instances.push(stability(&format!("uniformity u={t}"), &measured[j], cfg.tolerances.uniformity));
        }
        let per_cube: Vec<f64> =
            (0..cubes.len()).map(|k| measured.iter().map(|m| m[k]).fold(0.0, f64::max)).collect();
        r.instances.push(stability("uniformity max over functions", &per_cube, cfg.tolerances.uniformity));
    }
    r.notes.push(format!("w = {spec}, local level {local_level}, test functions in cube coordinates"));
    Ok(r)
}
