//! Test functions with analytic gradients and seeded random inputs.
//!
//! ```text
//! affine:a=(a1,..)[:b=B]          a·x + b
//! sine:k=(k1,..)[:phase=(p1,..)]  ∏ sin(π k_i x_i + p_i)
//! ramp:x0=(x1,..)                 |x − x0|
//! bump:c=(c1,..):r=R              ∏ ψ((x_i − c_i)/R), ψ(t) = exp(−1/(1−t²))
//! ```

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sparse_poincare_core::grid::{Cube, Grid, GridFunction, Point, MAX_DIM};
use sparse_poincare_core::weights::{DistTarget, Weight, WeightSpec};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    Affine { a: Vec<f64>, b: f64 },
    Sine { k: Vec<f64>, phase: Vec<f64> },
    Ramp { x0: Vec<f64> },
    Bump { center: Vec<f64>, radius: f64 },
}

fn psi(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn dpsi(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        -2.0 * t / (s * s) * psi(t)
    }
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Affine { a, .. } => a.len(),
            TestFunction::Sine { k, .. } => k.len(),
            TestFunction::Ramp { x0 } => x0.len(),
            TestFunction::Bump { center, .. } => center.len(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Affine { a, b } => b + a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>(),
            TestFunction::Sine { k, phase } => {
                k.iter().zip(phase).zip(x).map(|((k, p), x)| (std::f64::consts::PI * k * x + p).sin()).product()
            }
            TestFunction::Ramp { x0 } => x0.iter().zip(x).map(|(c, x)| (x - c) * (x - c)).sum::<f64>().sqrt(),
            TestFunction::Bump { center, radius } => center.iter().zip(x).map(|(c, x)| psi((x - c) / radius)).product(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Point {
        let dim = self.dim();
        let mut g = [0.0; MAX_DIM];
        match self {
            TestFunction::Affine { a, .. } => g[..dim].copy_from_slice(a),
            TestFunction::Sine { k, phase } => {
                let pi = std::f64::consts::PI;
                for i in 0..dim {
                    let mut prod = pi * k[i] * (pi * k[i] * x[i] + phase[i]).cos();
                    for j in (0..dim).filter(|&j| j != i) {
                        prod *= (pi * k[j] * x[j] + phase[j]).sin();
                    }
                    g[i] = prod;
                }
            }
            TestFunction::Ramp { x0 } => {
                let r = self.value(x);
                if r > 0.0 {
                    for i in 0..dim {
                        g[i] = (x[i] - x0[i]) / r;
                    }
                }
            }
            TestFunction::Bump { center, radius } => {
                for i in 0..dim {
                    let mut prod = dpsi((x[i] - center[i]) / radius) / radius;
                    for j in (0..dim).filter(|&j| j != i) {
                        prod *= psi((x[j] - center[j]) / radius);
                    }
                    g[i] = prod;
                }
            }
        }
        g
    }

    /// The function composed with the affine map taking `[0,1)ⁿ` onto `q`:
    /// value and gradient at `x ∈ q`.
    pub fn on_cube(&self, q: &Cube, x: &[f64]) -> (f64, Point) {
        let dim = q.dim();
        let side = q.side();
        let mut y = [0.0; MAX_DIM];
        for i in 0..dim {
            y[i] = (x[i] - q.lower(i)) / side;
        }
        let mut g = self.gradient(&y[..dim]);
        for gi in g.iter_mut().take(dim) {
            *gi /= side;
        }
        (self.value(&y[..dim]), g)
    }

    /// Samples of `u` and `|∇u|` at the cell centers of `grid`.
    pub fn sample(&self, grid: Grid) -> Result<(GridFunction, GridFunction)> {
        self.sample_with(grid, |x| (self.value(x), self.gradient(x)))
    }

    /// As [`TestFunction::sample`], in the coordinates of [`TestFunction::on_cube`].
    pub fn sample_on_cube(&self, grid: Grid, q: &Cube) -> Result<(GridFunction, GridFunction)> {
        self.sample_with(grid, |x| self.on_cube(q, x))
    }

    fn sample_with(&self, grid: Grid, eval: impl Fn(&[f64]) -> (f64, Point)) -> Result<(GridFunction, GridFunction)> {
        let dim = grid.dim();
        if self.dim() != dim {
            return Err(HarnessError::config(format!("test function `{self}` has dimension {}, grid has {dim}", self.dim())));
        }
        let mut u = Vec::with_capacity(grid.num_cells());
        let mut du = Vec::with_capacity(grid.num_cells());
        for c in 0..grid.num_cells() {
            let x = grid.cell_center(c);
            let (v, g) = eval(&x[..dim]);
            u.push(v);
            du.push(g[..dim].iter().map(|t| t * t).sum::<f64>().sqrt());
        }
        Ok((GridFunction::from_samples(grid, u)?, GridFunction::from_samples(grid, du)?))
    }
}

fn coords(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Affine { a, b } => write!(f, "affine:a=({}):b={b}", coords(a)),
            TestFunction::Sine { k, phase } => write!(f, "sine:k=({}):phase=({})", coords(k), coords(phase)),
            TestFunction::Ramp { x0 } => write!(f, "ramp:x0=({})", coords(x0)),
            TestFunction::Bump { center, radius } => write!(f, "bump:c=({}):r={radius}", coords(center)),
        }
    }
}

fn parse_err(s: &str, why: &str) -> HarnessError {
    HarnessError::config(format!("test function `{s}`: {why}"))
}

fn number(s: &str, whole: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(whole, &format!("bad number `{s}`"))),
    }
}

fn tuple(s: &str, whole: &str) -> Result<Vec<f64>> {
    let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(|| parse_err(whole, "expected (..)"))?;
    inner.split(',').map(|t| number(t, whole)).collect()
}

impl FromStr for TestFunction {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut fields: Vec<(&str, &str)> = Vec::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| parse_err(s, "expected key=value"))?;
            if fields.iter().any(|(seen, _)| *seen == k.trim()) {
                return Err(parse_err(s, &format!("duplicate `{k}`")));
            }
            fields.push((k.trim(), v.trim()));
        }
        let get = |k: &str| fields.iter().find(|(f, _)| *f == k).map(|(_, v)| *v);
        let allow = |keys: &[&str]| -> Result<()> {
            match fields.iter().find(|(k, _)| !keys.contains(k)) {
                Some((k, _)) => Err(parse_err(s, &format!("unexpected `{k}`"))),
                None => Ok(()),
            }
        };
        let need = |k: &str| get(k).ok_or_else(|| parse_err(s, &format!("missing `{k}`")));
        let out = match kind {
            "affine" => {
                allow(&["a", "b"])?;
                let b = get("b").map(|v| number(v, s)).transpose()?.unwrap_or(0.0);
                TestFunction::Affine { a: tuple(need("a")?, s)?, b }
            }
            "sine" => {
                allow(&["k", "phase"])?;
                let k = tuple(need("k")?, s)?;
                let phase = get("phase").map(|v| tuple(v, s)).transpose()?.unwrap_or_else(|| vec![0.0; k.len()]);
                if phase.len() != k.len() {
                    return Err(parse_err(s, "k and phase differ in length"));
                }
                TestFunction::Sine { k, phase }
            }
            "ramp" => {
                allow(&["x0"])?;
                TestFunction::Ramp { x0: tuple(need("x0")?, s)? }
            }
            "bump" => {
                allow(&["c", "r"])?;
                let radius = number(need("r")?, s)?;
                if radius <= 0.0 {
                    return Err(parse_err(s, "radius must be positive"));
                }
                TestFunction::Bump { center: tuple(need("c")?, s)?, radius }
            }
            _ => return Err(parse_err(s, "unknown kind")),
        };
        if !(1..=MAX_DIM).contains(&out.dim()) {
            return Err(parse_err(s, "dimension must be 1, 2 or 3"));
        }
        Ok(out)
    }
}

impl TryFrom<String> for TestFunction {
    type Error = HarnessError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(t: TestFunction) -> String {
        t.to_string()
    }
}

/// Generator for instance `index` of a suite: independent of how instances
/// are scheduled across threads.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn point_in(rng: &mut impl Rng, root: &Cube) -> Vec<f64> {
    (0..root.dim()).map(|i| root.lower(i) + root.side() * rng.random_range(0.05..0.95)).collect()
}

/// A random member of the analytic families on `root`.
pub fn random_test_function(rng: &mut impl Rng, root: &Cube) -> TestFunction {
    let dim = root.dim();
    match rng.random_range(0..4) {
        0 => TestFunction::Affine { a: (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(), b: rng.random_range(-1.0..1.0) },
        1 => TestFunction::Sine {
            k: (0..dim).map(|_| f64::from(rng.random_range(1..4u8)) / root.side()).collect(),
            phase: (0..dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect(),
        },
        2 => TestFunction::Ramp { x0: point_in(rng, root) },
        _ => TestFunction::Bump { center: point_in(rng, root), radius: root.side() * rng.random_range(0.2..0.6) },
    }
}

/// Random piecewise-constant data: i.i.d. cells, coarse blocks, sparse
/// spikes or a sampled analytic function. `nonnegative` takes absolute
/// values.
pub fn random_grid_function(rng: &mut impl Rng, grid: Grid, nonnegative: bool) -> Result<(GridFunction, &'static str)> {
    let n = grid.num_cells();
    let (mut v, label): (Vec<f64>, &str) = match rng.random_range(0..4) {
        0 => ((0..n).map(|_| rng.random_range(-1.0..1.0)).collect(), "cells"),
        1 => {
            let coarse = rng.random_range(0..=grid.level());
            let blocks = grid.with_level(coarse)?;
            let vals: Vec<f64> = (0..blocks.num_cells()).map(|_| rng.random_range(-4.0..4.0)).collect();
            let v = (0..n).map(|c| vals[blocks.locate(&grid.cell_center(c)[..grid.dim()]).expect("inside")]).collect();
            (v, "blocks")
        }
        2 => {
            let mut v = vec![0.0; n];
            for _ in 0..rng.random_range(1..=4usize) {
                v[rng.random_range(0..n)] += rng.random_range(1.0..100.0);
            }
            (v, "spikes")
        }
        _ => {
            let t = random_test_function(rng, grid.root());
            (t.sample(grid)?.0.into_samples(), "analytic")
        }
    };
    if nonnegative {
        v.iter_mut().for_each(|x| *x = x.abs());
    }
    Ok((GridFunction::from_samples(grid, v)?, label))
}

/// A random weight from the A∞ families: constants, distance powers to a
/// point, parabolas positive on the root, or log-normal cell values.
pub fn random_weight(rng: &mut impl Rng, grid: Grid) -> Result<(Weight, String)> {
    let root = *grid.root();
    let dim = grid.dim();
    let spec = match rng.random_range(0..4) {
        0 => WeightSpec::Const(rng.random_range(0.5..2.0)),
        1 => WeightSpec::Dist {
            target: DistTarget::Points(vec![point_in(rng, &root)]),
            gamma: rng.random_range(-0.45 * dim as f64..0.9),
        },
        2 => {
            let x0 = point_in(rng, &root);
            WeightSpec::Parabola { p: 2.0, c: root.diameter() * root.diameter() * rng.random_range(1.1..3.0), x0: Some(x0) }
        }
        _ => {
            let s = rng.random_range(0.1..1.5);
            let v: Vec<f64> = (0..grid.num_cells()).map(|_| (s * rng.random_range(-1.0..1.0f64)).exp()).collect();
            return Ok((Weight::new(GridFunction::from_samples(grid, v)?)?, format!("lognormal:s={s}")));
        }
    };
    Ok((spec.sample(grid, None)?, spec.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric_gradient(t: &TestFunction, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (t.value(&a) - t.value(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_differences() {
        let cases = ["affine:a=(1,-2):b=3", "sine:k=(1,2):phase=(0.3,1)", "ramp:x0=(0.2,0.7)", "bump:c=(0.5,0.4):r=0.6"];
        for s in cases {
            let t: TestFunction = s.parse().unwrap();
            let x = [0.41, 0.33];
            let g = t.gradient(&x);
            for (a, b) in g.iter().zip(numeric_gradient(&t, &x)) {
                assert!((a - b).abs() < 1e-6, "{s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        for s in ["affine:a=(1):b=0", "sine:k=(1,2):phase=(0,0.5)", "ramp:x0=(0.5,0.5,0.5)", "bump:c=(0.5):r=0.25"] {
            let t: TestFunction = s.parse().unwrap();
            assert_eq!(t.to_string().parse::<TestFunction>().unwrap(), t);
        }
        assert!("affine:a=(1):a=(2)".parse::<TestFunction>().is_err());
        assert!("bump:c=(0.5):r=-1".parse::<TestFunction>().is_err());
        assert!("wave:k=(1)".parse::<TestFunction>().is_err());
    }

    #[test]
    fn cube_coordinates_scale_the_gradient() {
        let t: TestFunction = "affine:a=(1)".parse().unwrap();
        let q = Cube::from_corner(&[2.0], 0.5).unwrap();
        let (v, g) = t.on_cube(&q, &[2.25]);
        assert_eq!(v, 0.5);
        assert_eq!(g[0], 2.0);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = instance_rng(7, 3).random();
        let _ = instance_rng(7, 2).random::<f64>();
        let b: f64 = instance_rng(7, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, instance_rng(7, 4).random::<f64>());
    }
}
