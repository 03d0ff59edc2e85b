//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines are printed under `cargo test`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use sparse_poincare::config::ExperimentConfig;
use sparse_poincare::family::{instance_rng, random_grid_function, random_weight, TestFunction};
use sparse_poincare::report::Report;
use sparse_poincare::runners::{self, poincare_sides};
use sparse_poincare_core::domain::{build_chains, whitney_decompose, CoveragePolicy, DomainSpec, DEFAULT_C_ADJ};
use sparse_poincare_core::grid::{weighted_measure, CellMask, DyadicCube, Grid};
use sparse_poincare_core::maximal::weighted_maximal;
use sparse_poincare_core::weights::{aikawa_check, DistanceSet, Weight};

const SLACK: f64 = 1e-12;
const RUNTIME_SPARSE: Duration = Duration::from_secs(30);
const RUNTIME_PLAPLACE: Duration = Duration::from_secs(120);
const LOCAL_REL: f64 = 0.01;
const L2G_BAND: f64 = 0.15;
const AIKAWA_REL: f64 = 0.01;
const UNIFORMITY_BAND: f64 = 0.20;
const COUNT: usize = 200;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> (ExperimentConfig, PathBuf) {
    let path = configs().join(name);
    (ExperimentConfig::load(&path).expect("config"), path)
}

fn run(name: &str) -> Result<(Report, Duration), String> {
    let (cfg, path) = load(name);
    let t = Instant::now();
    let r = runners::run(&cfg, path.parent()).map_err(|e| e.to_string())?;
    Ok((r, t.elapsed()))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass(r: &Report) -> Result<(), String> {
    let bad: Vec<String> = r.failure_lines().into_iter().take(3).collect();
    ensure(bad.is_empty(), || format!("{} failing instances, e.g. {}", r.failures().count(), bad.join("; ")))
}

fn measured(r: &Report, label: &str) -> Result<f64, String> {
    r.instances.iter().find(|i| i.label == label).map(|i| i.measured_constant).ok_or_else(|| format!("no instance `{label}`"))
}

fn sparse_domination() -> Outcome {
    let (r, t) = run("sparse1.json")?;
    all_pass(&r)?;
    ensure(r.instances.len() == COUNT, || format!("{} instances", r.instances.len()))?;
    ensure(r.config.dims.iter().all(|d| [1, 2].contains(d)) && r.config.level <= 6, || "grid range".into())?;
    ensure(r.instances.iter().all(|i| i.get("c_w") == Some(1.0) && i.get("delta_w") == Some(1.0)), || "C_w, delta_w != 1".into())?;
    let worst = r.instances.iter().filter_map(|i| i.get("min_slack")).fold(f64::INFINITY, f64::min);
    ensure(worst >= -SLACK, || format!("min slack {worst:e}"))?;
    ensure(t < RUNTIME_SPARSE, || format!("runtime {t:?}"))?;
    Ok(format!("{} instances, min slack {worst:.3e}, {:.2}s", r.instances.len(), t.as_secs_f64()))
}

fn sparsity_constants() -> Outcome {
    let (r, _) = run("sparse1.json")?;
    let mut worst_e = f64::INFINITY;
    let mut worst_s3 = 0.0f64;
    for i in &r.instances {
        let (e, m) = (i.get("eta").ok_or("eta")?, i.get("min_e_ratio").ok_or("min_e_ratio")?);
        let (s3, bound) = (i.get("children_mass_ratio").ok_or("s3")?, i.get("children_mass_bound").ok_or("s3 bound")?);
        ensure(m >= e, || format!("{}: w(E_S)/w(S) = {m} < eta = {e}", i.label))?;
        ensure(s3 <= bound, || format!("{}: children mass {s3} > {bound}", i.label))?;
        worst_e = worst_e.min(m - e);
        worst_s3 = worst_s3.max(s3 / bound);
    }
    Ok(format!("min w(E_S)/w(S) - eta = {worst_e:.3e}, max children mass / bound = {worst_s3:.4}"))
}

fn maximal_bounds() -> Outcome {
    let mut weak_worst = 0.0f64;
    let mut strong_worst = 0.0f64;
    for i in 0..COUNT {
        let mut rng = instance_rng(2024, i as u64);
        let n = 1 + i % 2;
        let g = Grid::unit(n, rng.random_range(1..=6)).map_err(|e| e.to_string())?;
        let (f, _) = random_grid_function(&mut rng, g, false).map_err(|e| e.to_string())?;
        let (w, _) = random_weight(&mut rng, g).map_err(|e| e.to_string())?;
        let m = weighted_maximal(&f, &w, &DyadicCube::ROOT).map_err(|e| e.to_string())?;
        let top = m.field.max();
        if top <= 0.0 {
            continue;
        }
        let t = top * rng.random_range(0.01..1.0);
        let set = CellMask::from_fn(g, |c| m.value(c) > t);
        let lhs = weighted_measure(w.function(), &set).map_err(|e| e.to_string())?;
        let fw = f.lp_norm_pow(1.0, Some(w.function())).map_err(|e| e.to_string())?;
        ensure(lhs <= fw / t * (1.0 + SLACK), || format!("weak type: {lhs} > {}", fw / t))?;
        weak_worst = weak_worst.max(lhs * t / fw);
        for p in [1.5, 2.0, 3.0] {
            let l = m.field.lp_norm_pow(p, Some(w.function())).map_err(|e| e.to_string())?;
            let rr = f.lp_norm_pow(p, Some(w.function())).map_err(|e| e.to_string())?;
            let c = p * 2f64.powf(p) / (p - 1.0);
            ensure(l <= c * rr * (1.0 + SLACK), || format!("strong type p={p}: {l} > {}", c * rr))?;
            strong_worst = strong_worst.max(l / (c * rr));
        }
    }
    Ok(format!("{COUNT} cases, max weak ratio {weak_worst:.4}, max strong ratio / constant {strong_worst:.4}"))
}

fn maximal_domination() -> Outcome {
    let (r, _) = run("sparse2.json")?;
    all_pass(&r)?;
    let alphas: Vec<f64> = r.instances.iter().filter_map(|i| i.get("alpha")).collect();
    ensure(alphas.contains(&0.0) && alphas.contains(&1.0), || "alpha coverage".into())?;
    for i in &r.instances {
        let n = if i.witness.as_deref().unwrap_or("").starts_with("n=1") { 1 } else { 2 };
        ensure(i.get("a") == Some((2u64 << n) as f64), || format!("{}: a != 2^(n+1)", i.label))?;
    }
    let mass = r.instances.iter().filter_map(|i| i.get("level_mass_ratio")).fold(0.0, f64::max);
    ensure(mass <= 1.0 + SLACK, || format!("level mass ratio {mass}"))?;
    let functions = r.instances.len() / r.config.p_values.len().max(1);
    ensure(functions == COUNT, || format!("{functions} functions"))?;
    Ok(format!("{} instances ({functions} functions), max level mass ratio {mass:.4}", r.instances.len()))
}

fn two_weight_maximal() -> Outcome {
    let (r, _) = run("twm.json")?;
    all_pass(&r)?;
    let k = measured(&r, "hypothesis: K")?;
    ensure((k - 1.0).abs() <= SLACK, || format!("K = {k}"))?;
    let ab = r.instances.iter().find(|i| i.label.starts_with("a->b")).ok_or("no a->b instance")?;
    let ba = r.instances.iter().filter(|i| i.label.starts_with("b->a")).count();
    Ok(format!("K = {k}, {ba} b->a instances, a->b: K {} <= {}", ab.lhs, ab.theoretical_constant.unwrap_or(f64::NAN)))
}

fn fefferman_stein() -> Outcome {
    let (r, _) = run("fs.json")?;
    all_pass(&r)?;
    let hand = measured(&r, "hand case f=(0,4) p=2")?;
    ensure(hand == 1.0, || format!("hand ratio {hand}"))?;
    let random = r.instances.iter().filter(|i| i.label.starts_with("instance")).count();
    ensure(random == 100 * 3, || format!("{random} random instances"))?;
    Ok(format!("{random} instances pass, hand ratio {hand}"))
}

fn local_poincare() -> Outcome {
    let g = Grid::unit(1, 10).map_err(|e| e.to_string())?;
    let t: TestFunction = "affine:a=(1)".parse().map_err(|e: sparse_poincare::HarnessError| e.to_string())?;
    let (u, du) = t.sample(g).map_err(|e| e.to_string())?;
    let w = Weight::lebesgue(g);
    let (l, rr) = poincare_sides(&u, &du, &w, &w, 2.0, 2.0).map_err(|e| e.to_string())?;
    let target = 12f64.powf(-0.5);
    let rel = (l / rr - target).abs() / target;
    ensure(rel < LOCAL_REL, || format!("ratio {} vs {target}", l / rr))?;
    let (r, _) = run("local_p.json")?;
    all_pass(&r)?;
    Ok(format!("ratio {:.8} vs 12^-1/2 = {target:.8}, rel {rel:.2e}", l / rr))
}

fn whitney_boman() -> Outcome {
    let d: DomainSpec = "box((0,0),(1,1))".parse().map_err(|e| format!("{e}"))?;
    let mut overlaps = Vec::new();
    let mut bomans = Vec::new();
    for level in [5, 6, 7] {
        let raster = d.rasterize(Grid::unit(2, level).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let w = whitney_decompose(&raster, CoveragePolicy::BoundaryLayer).map_err(|e| e.to_string())?;
        let gap = (w.total_volume() - raster.measure()).abs();
        ensure(gap <= 1e-12, || format!("L={level}: volume gap {gap:e}"))?;
        let mut seen = vec![false; raster.grid().num_cells()];
        for o in w.cell_owner().iter().enumerate() {
            if let (c, Some(_)) = o {
                seen[c] = true;
            }
        }
        ensure(seen.iter().all(|&s| s), || format!("L={level}: uncovered cell"))?;
        let (lo, hi) = w.comparability().ok_or("no interior cubes")?;
        ensure(lo >= 1.0 - SLACK && hi <= 4.0 + SLACK, || format!("L={level}: d/(sqrt(n) l) in [{lo}, {hi}]"))?;
        overlaps.push(w.overlap());
        bomans.push(build_chains(&w, DEFAULT_C_ADJ).map_err(|e| e.to_string())?.boman_constant());
    }
    ensure(overlaps.windows(2).all(|p| p[0] == p[1]), || format!("overlap {overlaps:?}"))?;
    ensure(bomans.windows(2).all(|p| p[0] == p[1]), || format!("Boman N {bomans:?}"))?;
    Ok(format!("overlap {overlaps:?}, Boman N {bomans:?}"))
}

fn local_to_global() -> Outcome {
    let (r, _) = run("l2g.json")?;
    all_pass(&r)?;
    let c: Vec<f64> = [5, 6, 7]
        .iter()
        .map(|l| measured(&r, &format!("L={l} u=affine:a=(1,0):b=0")))
        .collect::<Result<_, _>>()?;
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    ensure(spread <= L2G_BAND, || format!("spread {spread:.4} over {c:?}"))?;
    Ok(format!("C = {c:.2?}, spread {spread:.4}"))
}

fn distance_weights() -> Outcome {
    let set = DistanceSet::Points(vec![vec![0.0]]);
    let a = aikawa_check(&set, -0.5, &[1.0], &[vec![0.0]], 10).map_err(|e| e.to_string())?;
    let rel = (a.constant - 2.0).abs() / 2.0;
    ensure(rel < AIKAWA_REL, || format!("C1 = {}", a.constant))?;
    let (r, _) = run("dist_e.json")?;
    all_pass(&r)?;
    let cubes: std::collections::BTreeSet<&str> =
        r.instances.iter().filter_map(|i| i.label.strip_prefix("cube ")).filter_map(|s| s.split(' ').next()).collect();
    ensure(cubes.len() >= 3, || format!("{} cubes", cubes.len()))?;
    Ok(format!("C1 = {:.6} (rel {rel:.2e}), {} cubes pass", a.constant, cubes.len()))
}

fn p_laplace() -> Outcome {
    let (r, t) = run("plaplace.json")?;
    all_pass(&r)?;
    ensure(r.config.level == 8, || format!("level {}", r.config.level))?;
    let hh = measured(&r, "hypothesis: half-Harnack")?;
    let rh: Vec<f64> = r.instances.iter().filter(|i| i.label.starts_with("hypothesis: reverse Holder")).map(|i| i.measured_constant).collect();
    ensure(hh.is_finite() && rh.len() == 2 && rh.iter().all(|v| v.is_finite()), || "hypothesis ratios".into())?;
    let mut sides: Vec<f64> = r.instances.iter().filter_map(|i| i.get("side")).collect();
    sides.sort_by(f64::total_cmp);
    sides.dedup();
    ensure(sides == [0.125, 0.25], || format!("sides {sides:?}"))?;
    let u = r
        .instances
        .iter()
        .find(|i| i.label == "stability: uniformity max over functions")
        .ok_or("no uniformity instance")?;
    let spread = u.lhs / u.rhs;
    ensure(spread <= UNIFORMITY_BAND, || format!("uniformity spread {spread}"))?;
    ensure(t < RUNTIME_PLAPLACE, || format!("runtime {t:?}"))?;
    Ok(format!("half-Harnack {hh:.4}, reverse Holder {rh:.4?}, spread {spread:.4}, {:.2}s", t.as_secs_f64()))
}

fn determinism() -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(configs())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    for n in &names {
        let a = run(n)?.0.to_json().map_err(|e| e.to_string())?;
        let b = run(n)?.0.to_json().map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{n} differs"))?;
    }
    Ok(format!("{} suites byte-identical", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("sparse domination I", sparse_domination),
        ("sparsity constants", sparsity_constants),
        ("weak (1,1) and strong (p,p)", maximal_bounds),
        ("sparse domination II", maximal_domination),
        ("two-weight maximal", two_weight_maximal),
        ("Fefferman-Stein", fefferman_stein),
        ("local Poincare sanity", local_poincare),
        ("Whitney/Boman", whitney_boman),
        ("local-to-global", local_to_global),
        ("distance weights", distance_weights),
        ("p-Laplace application", p_laplace),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
