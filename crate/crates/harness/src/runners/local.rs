//! Local two-weight Poincaré inequality, and its distance-weight case.

use sparse_poincare_core::grid::{max_level, Cube, Grid};
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{aikawa_check, DistTarget, DistanceSet, Weight, WeightSpec};

use super::{default_poincare, exact_tol, new_report, observed, poincare_sides, stability, test_functions, weight_or_one, LocalBound};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::family::TestFunction;
use crate::pool;

pub const DEFAULT_COUNT: usize = 10;

/// Checks every function on one grid against the assembled constant and
/// returns the instances with their measured constants.
fn check_all(
    cfg: &ExperimentConfig,
    prefix: &str,
    grid: Grid,
    w: &Weight,
    v: &Weight,
    funcs: &[TestFunction],
) -> Result<(Vec<Instance>, Vec<f64>)> {
    let (p, q) = (cfg.p, cfg.q());
    let sigma = v.dual(p)?;
    let bound = LocalBound::new(w, &sigma, p, q, default_poincare(cfg, grid.dim()), &cfg.deltas(), cfg.rho)?;
    let c = bound.total;
    let rows = pool::try_map(funcs.len(), |j| -> Result<Instance> {
        let (u, du) = funcs[j].sample(grid)?;
        let (lhs, rhs) = poincare_sides(&u, &du, w, v, p, q)?;
        Ok(bound.annotate(Instance::bound(
            format!("{prefix} u={}", funcs[j]),
            lhs,
            rhs,
            Some(c),
            exact_tol(cfg, lhs.max(c * rhs)),
        )))
    })?;
    let measured = rows.iter().map(|i| i.measured_constant).collect();
    Ok((rows, measured))
}

pub fn run(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let levels = cfg.levels_or(|l| vec![l, l + 1]);
    if let Some(&l) = levels.iter().find(|&&l| l > max_level(cfg.n)) {
        return Err(HarnessError::config(format!("{}: refinement level {l} is too deep", cfg.theorem)));
    }
    let root = cfg.root_cube()?;
    let funcs = test_functions(cfg, &root, DEFAULT_COUNT, 0);
    let (w_spec, v_spec) = (cfg.w_spec()?, cfg.v_spec()?);
    let mut r = new_report(cfg);
    let mut per_level = Vec::new();
    for &level in &levels {
        let grid = cfg.grid_at(level)?;
        let w = weight_or_one(w_spec.as_ref(), grid, None)?;
        let v = weight_or_one(v_spec.as_ref(), grid, None)?;
        let (rows, measured) = check_all(cfg, &format!("L={level}"), grid, &w, &v, &funcs)?;
        r.instances.extend(rows);
        per_level.push(measured);
    }
    if levels.len() > 1 {
        for (j, t) in funcs.iter().enumerate() {
            let values: Vec<f64> = per_level.iter().map(|m| m[j]).collect();
            r.instances.push(stability(&format!("refinement u={t}"), &values, cfg.tolerances.refinement));
        }
    }
    r.notes.push(format!("levels {levels:?}, p {}, q {}", cfg.p, cfg.q()));
    Ok(r)
}

/// `−n + (q/p)(n − p)`.
pub fn distance_exponent(n: usize, p: f64, q: f64) -> f64 {
    let n = n as f64;
    -n + q / p * (n - p)
}

/// The set `E` and exponent: from a configured distance weight, or the
/// root center with the theorem's exponent.
fn distance_target(cfg: &ExperimentConfig, root: &Cube) -> Result<(DistTarget, f64)> {
    match cfg.w_spec()? {
        Some(WeightSpec::Dist { target: DistTarget::Boundary, .. }) | Some(WeightSpec::Const(_)) => {
            Err(HarnessError::config(format!("{}: w must be a distance weight to points or a hyperplane", cfg.theorem)))
        }
        Some(WeightSpec::Dist { target, gamma }) => Ok((target, gamma)),
        Some(_) => Err(HarnessError::config(format!("{}: w must be a distance weight", cfg.theorem))),
        None => Ok((DistTarget::Points(vec![root.center().to_vec()]), distance_exponent(cfg.n, cfg.p, cfg.q()))),
    }
}

fn on_set(target: &DistTarget, root: &Cube) -> Vec<f64> {
    match target {
        DistTarget::Points(p) => p[0].clone(),
        DistTarget::Hyperplane { axis, offset } => {
            let mut x = root.center().to_vec();
            x[*axis] = *offset;
            x
        }
        DistTarget::Boundary => unreachable!("rejected by distance_target"),
    }
}

/// Three cubes around a point of `E`: centered on it, with it at a corner,
/// and at distance `1.5h` from it, for root half-side `h`.
pub fn default_cubes(x: &[f64], h: f64) -> Result<Vec<Cube>> {
    let corner: Vec<f64> = x.iter().map(|v| v + h / 2.0).collect();
    let mut far = x.to_vec();
    far[0] += 2.0 * h;
    Ok(vec![Cube::new(x, h)?, Cube::new(&corner, h / 2.0)?, Cube::new(&far, h / 2.0)?])
}

/// Quadrature level of the Aikawa integral per dimension.
fn aikawa_level(n: usize) -> u32 {
    match n {
        1 => 10,
        2 => 7,
        _ => 4,
    }
}

pub fn run_distance(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let n = cfg.n;
    let root = cfg.root_cube()?;
    let (target, gamma) = distance_target(cfg, &root)?;
    let expected = distance_exponent(n, cfg.p, cfg.q());
    let spec = WeightSpec::Dist { target: target.clone(), gamma };
    let x_e = on_set(&target, &root);
    let mut r = new_report(cfg);

    let set = match &target {
        DistTarget::Points(p) => DistanceSet::Points(p.clone()),
        DistTarget::Hyperplane { axis, offset } => DistanceSet::Hyperplane { axis: *axis, offset: *offset },
        DistTarget::Boundary => unreachable!("rejected by distance_target"),
    };
    let radii: Vec<f64> = [0.125, 0.25, 0.5, 1.0].iter().map(|t| t * root.side()).collect();
    let level = cfg.local_level.unwrap_or_else(|| aikawa_level(n));
    let aik = aikawa_check(&set, gamma, &radii, std::slice::from_ref(&x_e), level)?;
    r.instances.push(
        observed("hypothesis: Aikawa C1", aik.constant)
            .metric("gamma", gamma)
            .metric("quadrature_level", level as f64)
            .with_witness(aik.witness.map(|c| c.to_string()).unwrap_or_default()),
    );

    let cubes = if cfg.cubes.is_empty() {
        default_cubes(&x_e, root.half_side())?
    } else {
        cfg.cubes.iter().map(|c| c.cube()).collect::<Result<_>>()?
    };
    for (k, q0) in cubes.iter().enumerate() {
        let grid = Grid::new(*q0, cfg.level)?;
        let w = spec.sample(grid, None)?;
        let v = Weight::lebesgue(grid);
        let funcs = test_functions(cfg, q0, DEFAULT_COUNT, 1000 * k as u64);
        let (rows, _) = check_all(cfg, &format!("cube {k} {q0}"), grid, &w, &v, &funcs)?;
        r.instances.extend(rows);
    }
    r.notes.push(format!("w = {spec}"));
    if (gamma - expected).abs() > 1e-12 {
        r.notes.push(format!("configured exponent {gamma} differs from -n + (q/p)(n-p) = {expected}"));
    }
    Ok(r)
}
