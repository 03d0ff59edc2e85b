//! Global inequalities on Whitney-decomposed domains.

use std::path::Path;

use sparse_poincare_core::domain::{
    build_chains, chain_estimate_check, local_to_global, whitney_decompose, ChainDecomposition, CoveragePolicy,
    DomainRaster, Membership, WhitneyDecomposition, DEFAULT_C_ADJ,
};
use sparse_poincare_core::grid::{Cube, Grid, GridFunction, MAX_DIM};
use sparse_poincare_core::report::{Instance, VerificationReport};
use sparse_poincare_core::weights::{doubling_constant, DistTarget, Weight, WeightSpec};

use super::{default_poincare, new_report, observed, stability, test_functions, LocalBound};
use crate::config::{ExperimentConfig, TheoremId};
use crate::error::{HarnessError, Result};
use crate::family::TestFunction;
use crate::pool;

pub const DEFAULT_COUNT: usize = 5;

/// Default level of the grid put on each dilated Whitney cube.
pub const DEFAULT_LOCAL_LEVEL: u32 = 3;

/// Half-sides of the doubling trial cubes, in units of the Whitney
/// cube's half-side.
pub const DOUBLING_FACTORS: [f64; 3] = [1.0, 2.0, 4.0];

/// Failing cubes listed in a witness before truncation.
const WITNESS_CAP: usize = 16;

pub struct Setup {
    pub domain: DomainRaster,
    pub whitney: WhitneyDecomposition,
    pub chains: ChainDecomposition,
}

pub fn setup(cfg: &ExperimentConfig, level: u32, base: Option<&Path>) -> Result<Setup> {
    let domain = cfg
        .domain_at(level, base)?
        .ok_or_else(|| HarnessError::config(format!("{}: a domain is required", cfg.theorem)))?;
    let whitney = whitney_decompose(&domain, CoveragePolicy::BoundaryLayer)?;
    let chains = build_chains(&whitney, DEFAULT_C_ADJ)?;
    Ok(Setup { domain, whitney, chains })
}

/// `β = n − (q/p)(n − p)`.
pub fn boundary_beta(n: usize, p: f64, q: f64) -> f64 {
    let n = n as f64;
    n - q / p * (n - p)
}

/// `F(c) = ∫_Ω |u − c|^q w`, cell by cell.
fn deviation(cells: &[(f64, f64)], c: f64, q: f64) -> f64 {
    cells.iter().map(|&(u, w)| (u - c).abs().powf(q) * w).sum()
}

/// Minimizer of `F` by bisection on the sign of `F′`, which is monotone
/// because `F` is convex for `q ≥ 1`.
pub fn minimizing_constant(cells: &[(f64, f64)], q: f64) -> f64 {
    let slope = |c: f64| -> f64 {
        cells
            .iter()
            .map(|&(u, w)| {
                let d = c - u;
                if q == 1.0 {
                    d.signum() * w
                } else {
                    d.signum() * d.abs().powf(q - 1.0) * w
                }
            })
            .sum()
    };
    let mut lo = cells.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let mut hi = cells.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return lo;
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if deviation(cells, lo, q) <= deviation(cells, hi, q) {
        lo
    } else {
        hi
    }
}

/// `u_{w;Ω}`.
pub fn weighted_mean(cells: &[(f64, f64)]) -> f64 {
    let (s, m) = cells.iter().fold((0.0, 0.0), |(s, m), &(u, w)| (s + u * w, m + w));
    s / m
}

/// Values of `w` at the cell centers of `local`, read from the cell of
/// `w`'s grid that contains each center, clamped into its root.
pub fn resample(w: &Weight, local: Grid) -> Result<Weight> {
    let g = *w.grid();
    let r = g.root();
    let dim = g.dim();
    let eps = g.cell_side() * 1e-9;
    Ok(Weight::build(local, |x| {
        let mut y = [0.0; MAX_DIM];
        for i in 0..dim {
            y[i] = x[i].clamp(r.lower(i) + eps, r.upper(i) - eps);
        }
        w.value(g.locate(&y[..dim]).expect("clamped into the root"))
    })?)
}

fn witness_list(title: &str, bad: &[usize]) -> String {
    let shown: Vec<String> = bad.iter().take(WITNESS_CAP).map(|c| c.to_string()).collect();
    let more = if bad.len() > WITNESS_CAP { format!(" and {} more", bad.len() - WITNESS_CAP) } else { String::new() };
    format!("{title} failed on whitney cubes {}{more}", shown.join(","))
}

/// Per-`Q*` hypotheses: A∞ for `w` and `σ`, `K`, and the local constant.
fn hypotheses(cfg: &ExperimentConfig, s: &Setup, w: &Weight, sigma: &Weight) -> Result<(Vec<Instance>, f64)> {
    let (p, q) = (cfg.p, cfg.q());
    let local_level = cfg.local_level.unwrap_or(DEFAULT_LOCAL_LEVEL);
    let deltas = cfg.deltas();
    let c44 = default_poincare(cfg, s.domain.dim());
    let bounds = pool::try_map(s.whitney.len(), |i| -> Result<Option<LocalBound>> {
        let local = Grid::new(s.whitney.dilated(i), local_level)?;
        let wl = resample(w, local)?;
        let sl = resample(sigma, local)?;
        Ok(LocalBound::new(&wl, &sl, p, q, c44, &deltas, cfg.rho).ok())
    })?;
    let pick = |f: &dyn Fn(&LocalBound) -> f64, title: &str| -> Instance {
        let mut worst = (f64::NEG_INFINITY, 0usize);
        let mut bad = Vec::new();
        for (i, b) in bounds.iter().enumerate() {
            match b.as_ref().map(f) {
                Some(v) if v.is_finite() => {
                    if v > worst.0 {
                        worst = (v, i);
                    }
                }
                _ => bad.push(i),
            }
        }
        let mut inst = observed(&format!("hypothesis: {title} per Q*"), worst.0).metric("cubes", bounds.len() as f64);
        if bad.is_empty() {
            inst = inst.with_witness(format!("max at whitney cube {} {}", worst.1, s.whitney.dilated(worst.1)));
        } else {
            inst = inst.metric("failed_cubes", bad.len() as f64).with_witness(witness_list(title, &bad)).fail();
        }
        inst
    };
    let out = vec![
        pick(&|b| b.w.c, "A_inf(w) constant"),
        pick(&|b| b.sigma.c, "A_inf(sigma) constant"),
        pick(&|b| b.k, "K"),
        pick(&|b| b.total, "local constant"),
    ];
    let local_max = out[3].lhs;
    Ok((out, local_max))
}

fn doubling(s: &Setup, w: &Weight) -> Result<Instance> {
    let mut trials = Vec::new();
    for i in 0..s.whitney.len() {
        let c = s.whitney.cube(i);
        for f in DOUBLING_FACTORS {
            trials.push(Cube::new(c.center(), c.half_side() * f)?);
        }
    }
    let d = doubling_constant(w, &s.domain, &trials)?;
    Ok(observed("hypothesis: doubling D", d.constant)
        .metric("trials", d.trials as f64)
        .metric("flagged", d.flagged.len() as f64)
        .with_witness(d.witness.map(|c| c.to_string()).unwrap_or_default()))
}

fn boman(s: &Setup) -> Instance {
    let ch = &s.chains;
    observed("hypothesis: Boman N", ch.boman_constant() as f64)
        .metric("whitney_cubes", s.whitney.len() as f64)
        .metric("layer_cubes", s.whitney.layer_count() as f64)
        .metric("overlap", s.whitney.overlap() as f64)
        .metric("max_chain_len", ch.max_chain_len() as f64)
        .metric("max_lambda", ch.max_lambda())
        .metric("c_adj", ch.c_adj())
}

/// `(u, w)` and `(|∇u|, v)` pairs on the domain cells.
fn domain_cells(domain: &DomainRaster, f: &GridFunction, w: &Weight) -> Vec<(f64, f64)> {
    domain.mask().iter().map(|c| (f.value(c), w.value(c))).collect()
}

fn weights(cfg: &ExperimentConfig, s: &Setup) -> Result<(WeightSpec, WeightSpec)> {
    let one = WeightSpec::Const(1.0);
    let w = match (cfg.theorem, cfg.w_spec()?) {
        (_, Some(w)) => w,
        (TheoremId::DistBdy, None) => {
            WeightSpec::Dist { target: DistTarget::Boundary, gamma: -boundary_beta(s.domain.dim(), cfg.p, cfg.q()) }
        }
        _ => one.clone(),
    };
    Ok((w, cfg.v_spec()?.unwrap_or(one)))
}

pub fn run(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<VerificationReport> {
    let s = setup(cfg, cfg.level, base)?;
    let grid = *s.domain.grid();
    let (w_spec, v_spec) = weights(cfg, &s)?;
    let w = w_spec.sample(grid, Some(&s.domain))?;
    let v = v_spec.sample(grid, Some(&s.domain))?;
    let sigma = v.dual(cfg.p)?;
    let (p, q) = (cfg.p, cfg.q());
    let vol = grid.cell_volume();
    let funcs = test_functions(cfg, grid.root(), DEFAULT_COUNT, 0);

    let mut r = new_report(cfg);
    r.instances.push(boman(&s));
    r.instances.push(doubling(&s, &w)?);
    let (hyp, local_max) = hypotheses(cfg, &s, &w, &sigma)?;
    r.instances.extend(hyp);

    let rows = pool::try_map(funcs.len(), |j| -> Result<Vec<Instance>> {
        let (u, du) = funcs[j].sample(grid)?;
        let cells = domain_cells(&s.domain, &u, &w);
        let c = minimizing_constant(&cells, q);
        let lhs = (deviation(&cells, c, q) * vol).powf(1.0 / q);
        let grad: f64 = domain_cells(&s.domain, &du, &v).iter().map(|&(g, v)| g.powf(p) * v).sum();
        let rhs = (grad * vol).powf(1.0 / p);
        let mut out = vec![Instance::bound(format!("global u={}", funcs[j]), lhs, rhs, None, 0.0)
            .metric("c", c)
            .metric("local_constant_max", local_max)];
        if q == 2.0 {
            let exact = weighted_mean(&cells);
            let diff = (c - exact).abs();
            out.push(
                Instance::bound(format!("closed form c u={}", funcs[j]), diff, 1.0, Some(0.0), 1e-9 * exact.abs().max(1.0))
                    .metric("c_scan", c)
                    .metric("c_mean", exact),
            );
        }
        Ok(out)
    })?;
    r.instances.extend(rows.into_iter().flatten());
    r.notes.push(format!("w = {w_spec}, v = {v_spec}, level {}", cfg.level));
    if cfg.theorem == TheoremId::DistBdy {
        r.notes.push(format!("beta = {}", boundary_beta(s.domain.dim(), p, q)));
    }
    Ok(r)
}

fn default_l2g_functions(cfg: &ExperimentConfig) -> Vec<TestFunction> {
    let given: Vec<TestFunction> = cfg.family.functions.iter().filter(|t| t.dim() == cfg.n).cloned().collect();
    if !given.is_empty() {
        return given;
    }
    let mut a = vec![0.0; cfg.n];
    a[0] = 1.0;
    vec![TestFunction::Affine { a, b: 0.0 }]
}

pub fn run_local_to_global(cfg: &ExperimentConfig, base: Option<&Path>) -> Result<VerificationReport> {
    let levels = cfg.levels_or(|l| vec![l]);
    let funcs = default_l2g_functions(cfg);
    let mut r = new_report(cfg);
    let mut measured = vec![Vec::new(); funcs.len()];
    let mut bomans = Vec::new();
    let mut overlaps = Vec::new();
    for &level in &levels {
        let s = setup(cfg, level, base)?;
        let grid = *s.domain.grid();
        let w = super::weight_or_one(cfg.w_spec()?.as_ref(), grid, Some(&s.domain))?;
        bomans.push(s.chains.boman_constant() as f64);
        overlaps.push(s.whitney.overlap() as f64);
        for (j, t) in funcs.iter().enumerate() {
            let (u, _) = t.sample(grid)?;
            let l2g = local_to_global(&u, w.function(), cfg.p, &s.domain, &s.chains, Membership::Overlap)?;
            let inst = l2g.instance(&format!("L={level} u={t}")).metric("overlap", s.whitney.overlap() as f64);
            measured[j].push(inst.measured_constant);
            r.instances.push(inst);
            let chain = chain_estimate_check(&u, w.function(), &s.domain, &s.chains, Membership::Overlap)?;
            r.instances.push(chain.instance(&format!("chain estimate L={level} u={t}")));
        }
    }
    if levels.len() > 1 {
        for (j, t) in funcs.iter().enumerate() {
            r.instances.push(stability(&format!("levels u={t}"), &measured[j], cfg.tolerances.stability));
        }
        r.instances.push(stability("Boman N across levels", &bomans, 0.0));
    }
    r.notes.push(format!("levels {levels:?}, Q* overlap {overlaps:?}"));
    Ok(r)
}
