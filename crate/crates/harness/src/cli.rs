//! Command line: `verify`, `sparse`, `whitney`, `weights` and `report`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sparse_poincare_core::domain::{build_chains, whitney_decompose, CoveragePolicy, DomainSpec, DEFAULT_C_ADJ};
use sparse_poincare_core::grid::{Cube, DyadicCube, Grid};
use sparse_poincare_core::sparse::{build_sparse_levelset, build_sparse_oscillation, carve_disjoint_sets};
use sparse_poincare_core::weights::{estimate_ainfty, Weight, WeightSpec};

use crate::config::{ExperimentConfig, DEFAULT_DELTAS};
use crate::error::{HarnessError, Result};
use crate::format::{self, SparseFamilyFile, WhitneyFile};
use crate::report::{Report, Status};

#[derive(Debug, Parser)]
#[command(name = "sparse-poincare", version, about = "Numerical verification of sparse domination and weighted Poincaré inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    #[default]
    Oscillation,
    Levelset,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Report destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        level: Option<u32>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Build a sparse family of a grid function and dump it.
    Sparse {
        #[arg(long)]
        function: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        #[arg(long, value_enum, default_value_t)]
        variant: Variant,
        /// Fractional order of the level-set variant.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Carving weight; `w ≡ 1` when absent.
        #[arg(long)]
        weight: Option<PathBuf>,
        #[arg(long)]
        dump: PathBuf,
    },
    /// Whitney decomposition and chains of a domain.
    Whitney {
        /// Domain spec, e.g. `box((0,0),(1,1))`.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        level: u32,
        /// Root cube as `center;half_side`, e.g. `0.5,0.5;0.5`; the unit
        /// cube when absent.
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Sample a weight spec and estimate its A∞ constants.
    Weights {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// Domain spec, needed by boundary distance weights.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Re-emit a stored report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

/// Exit code for a finished run: 0 on pass, 1 otherwise.
pub fn status_code(s: Status) -> i32 {
    match s {
        Status::Pass => 0,
        Status::Fail | Status::Inconclusive => 1,
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| HarnessError::io("stdout", e)),
    }
}

fn render(r: &Report, f: OutputFormat) -> Result<String> {
    match f {
        OutputFormat::Json => r.to_json(),
        OutputFormat::Csv => r.to_csv(),
    }
}

fn summarize(r: &Report) {
    let failed = r.failures().count();
    eprintln!("{}: {:?}, {} instances, {failed} failed", r.theorem, r.status, r.instances.len());
    for line in r.failure_lines() {
        eprintln!("{line}");
    }
}

/// Loads `path`, applies the overrides and runs it.
pub fn verify(path: &Path, seed: Option<u64>, level: Option<u32>) -> Result<Report> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(l) = level {
        cfg.level = l;
    }
    crate::runners::run(&cfg, path.parent())
}

fn parse_root(s: Option<&str>, dim: usize) -> Result<Cube> {
    let Some(s) = s else { return Ok(Cube::unit(dim)) };
    let bad = || HarnessError::config(format!("bad root `{s}`; expected `x,..;half_side`"));
    let (c, h) = s.split_once(';').ok_or_else(bad)?;
    let center = c.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
    let half = h.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(Cube::new(&center, half)?)
}

fn sparse(function: &Path, rho: f64, variant: Variant, alpha: f64, weight: Option<&Path>, dump: &Path) -> Result<()> {
    let f = format::load_function(function)?;
    let grid = *f.grid();
    let w = match weight {
        Some(p) => Weight::new(format::load_function(p)?)?,
        None => Weight::lebesgue(grid),
    };
    let e = estimate_ainfty(&w, &DyadicCube::ROOT, 1.0)?;
    let family = match variant {
        Variant::Oscillation => carve_disjoint_sets(build_sparse_oscillation(&f, &DyadicCube::ROOT, rho)?, &w, e.c, e.delta)?,
        Variant::Levelset => {
            let a = rho * (1u64 << grid.dim()) as f64;
            build_sparse_levelset(&f, alpha, &DyadicCube::ROOT, a, &w, e.c, e.delta)?
        }
    };
    let file = SparseFamilyFile::of(&family);
    format::write_json(dump, &file)?;
    let back: SparseFamilyFile = format::read_json(dump)?;
    if back.family()? != family {
        return Err(HarnessError::Format(format!("{} does not round-trip", dump.display())));
    }
    println!("{} cubes, eta {:?}, written to {}", family.len(), family.eta(), dump.display());
    Ok(())
}

fn whitney(domain: &str, level: u32, root: Option<&str>, dump: Option<&Path>) -> Result<()> {
    let spec: DomainSpec = domain.parse().map_err(|e| HarnessError::config(format!("domain: {e}")))?;
    let grid = Grid::new(parse_root(root, spec.dim())?, level)?;
    let d = spec.rasterize(grid)?;
    let w = whitney_decompose(&d, CoveragePolicy::BoundaryLayer)?;
    let ch = build_chains(&w, DEFAULT_C_ADJ)?;
    println!(
        "{} cubes ({} boundary layer), volume {} of {}, Q* overlap {}, Boman N {}, max chain {}",
        w.len(),
        w.layer_count(),
        w.total_volume(),
        w.domain_measure(),
        w.overlap(),
        ch.boman_constant(),
        ch.max_chain_len()
    );
    if let Some((lo, hi)) = w.comparability() {
        println!("d/l over interior cubes in [{lo}, {hi}]");
    }
    if let Some(p) = dump {
        format::write_json(p, &WhitneyFile::of(&w, &ch))?;
    }
    Ok(())
}

fn weights(spec: &str, dim: usize, level: u32, domain: Option<&str>, dump: Option<&Path>) -> Result<()> {
    let s: WeightSpec = spec.parse().map_err(|e| HarnessError::config(format!("weight: {e}")))?;
    let grid = Grid::unit(dim, level)?;
    let raster = match domain {
        Some(d) => {
            let d: DomainSpec = d.parse().map_err(|e| HarnessError::config(format!("domain: {e}")))?;
            Some(d.rasterize(grid)?)
        }
        None => None,
    };
    let w = s.sample(grid, raster.as_ref())?;
    for delta in DEFAULT_DELTAS {
        let e = estimate_ainfty(&w, &DyadicCube::ROOT, delta)?;
        println!("delta {delta}: C = {} at {} ({} cells)", e.c, grid.cube_of(&e.witness_cube), e.witness_size);
    }
    if let Some(p) = dump {
        format::save_function(p, w.function())?;
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Verify { config, out, seed, level, format } => verify(&config, seed, level).and_then(|r| {
            write_output(out.as_deref(), &render(&r, format)?)?;
            summarize(&r);
            Ok(status_code(r.status))
        }),
        Command::Sparse { function, rho, variant, alpha, weight, dump } => {
            sparse(&function, rho, variant, alpha, weight.as_deref(), &dump).map(|_| 0)
        }
        Command::Whitney { domain, level, root, dump } => whitney(&domain, level, root.as_deref(), dump.as_deref()).map(|_| 0),
        Command::Weights { spec, dim, level, domain, dump } => {
            weights(&spec, dim, level, domain.as_deref(), dump.as_deref()).map(|_| 0)
        }
        Command::Report { input, format } => format::read_json::<Report>(&input).and_then(|r| {
            write_output(None, &render(&r, format)?)?;
            Ok(status_code(r.status))
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` and runs them; clap usage errors exit with 2.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
