use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{DistanceSet, DistanceWeight, Weight};
use crate::domain::DomainRaster;
use crate::error::{Error, Result};
use crate::grid::{Grid, Point, MAX_DIM};
use crate::num::{self, parse_f64};

/// Target of a `dist:` weight.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DistTarget {
    Points(Vec<Vec<f64>>),
    Hyperplane { axis: usize, offset: f64 },
    Boundary,
}

/// Weight families addressable by spec strings:
///
/// ```text
/// const:C
/// dist:point(x,..):gamma=G
/// dist:points(x,..;y,..):gamma=G
/// dist:hyperplane(axis=I,offset=T):gamma=G
/// dist:boundary:gamma=G
/// parabola:p=P:c=C[:x0=(x,..)]          C − |x − x0|²
/// fundamental:p=P:c=C:m=M[:x0=(x,..)]   min(C|x − x0|^{(p−n)/(p−1)}, M)
/// ```
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WeightSpec {
    Const(f64),
    Dist { target: DistTarget, gamma: f64 },
    Parabola { p: f64, c: f64, x0: Option<Vec<f64>> },
    Fundamental { p: f64, c: f64, m: f64, x0: Option<Vec<f64>> },
}

fn origin(x0: &Option<Vec<f64>>, dim: usize) -> Result<Point> {
    let mut o = [0.0; MAX_DIM];
    if let Some(v) = x0 {
        if v.len() != dim {
            return Err(Error::Parameter(format!("x0 has {} coordinates, expected {dim}", v.len())));
        }
        o[..dim].copy_from_slice(v);
    }
    Ok(o)
}

impl WeightSpec {
    pub fn needs_domain(&self) -> bool {
        matches!(self, WeightSpec::Dist { target: DistTarget::Boundary, .. })
    }

    /// The p for which the family is a p-supersolution, if it declares one.
    pub fn p(&self) -> Option<f64> {
        match self {
            WeightSpec::Parabola { p, .. } | WeightSpec::Fundamental { p, .. } => Some(*p),
            _ => None,
        }
    }

    fn distance<'a>(&self, domain: Option<&'a DomainRaster>) -> Result<Option<DistanceWeight<'a>>> {
        let WeightSpec::Dist { target, gamma } = self else { return Ok(None) };
        let set = match target {
            DistTarget::Points(p) => DistanceSet::Points(p.clone()),
            DistTarget::Hyperplane { axis, offset } => DistanceSet::Hyperplane { axis: *axis, offset: *offset },
            DistTarget::Boundary => {
                DistanceSet::Boundary(domain.ok_or_else(|| Error::Parameter("boundary distance needs a domain".into()))?)
            }
        };
        Ok(Some(super::distance_weight(set, *gamma)))
    }

    fn fundamental_exponent(p: f64, dim: usize) -> Result<f64> {
        if !(p > 1.0 && p < dim as f64) {
            return Err(Error::Parameter(format!("fundamental solution needs 1 < p < n, got p = {p}, n = {dim}")));
        }
        Ok((p - dim as f64) / (p - 1.0))
    }

    pub fn value(&self, x: &[f64], domain: Option<&DomainRaster>) -> Result<f64> {
        let dim = x.len();
        match self {
            WeightSpec::Const(c) => Ok(*c),
            WeightSpec::Dist { .. } => self.distance(domain)?.expect("distance spec").eval(x),
            WeightSpec::Parabola { c, x0, .. } => {
                let o = origin(x0, dim)?;
                Ok(c - (0..dim).map(|i| (x[i] - o[i]) * (x[i] - o[i])).sum::<f64>())
            }
            WeightSpec::Fundamental { p, c, m, x0 } => {
                let e = Self::fundamental_exponent(*p, dim)?;
                let o = origin(x0, dim)?;
                let r = num::sqrt((0..dim).map(|i| (x[i] - o[i]) * (x[i] - o[i])).sum());
                Ok(if r == 0.0 { *m } else { (c * num::powf(r, e)).min(*m) })
            }
        }
    }

    /// Analytic gradient; `None` for distance weights.
    pub fn gradient(&self, x: &[f64]) -> Result<Option<Point>> {
        let dim = x.len();
        let mut g = [0.0; MAX_DIM];
        match self {
            WeightSpec::Const(_) => {}
            WeightSpec::Dist { .. } => return Ok(None),
            WeightSpec::Parabola { x0, .. } => {
                let o = origin(x0, dim)?;
                for i in 0..dim {
                    g[i] = -2.0 * (x[i] - o[i]);
                }
            }
            WeightSpec::Fundamental { p, c, m, x0 } => {
                let e = Self::fundamental_exponent(*p, dim)?;
                let o = origin(x0, dim)?;
                let r = num::sqrt((0..dim).map(|i| (x[i] - o[i]) * (x[i] - o[i])).sum());
                if r > 0.0 && c * num::powf(r, e) < *m {
                    let s = c * e * num::powf(r, e - 2.0);
                    for i in 0..dim {
                        g[i] = s * (x[i] - o[i]);
                    }
                }
            }
        }
        Ok(Some(g))
    }

    pub fn sample(&self, grid: Grid, domain: Option<&DomainRaster>) -> Result<Weight> {
        if let Some(dw) = self.distance(domain)? {
            return dw.sample(grid);
        }
        let dim = grid.dim();
        let samples = (0..grid.num_cells())
            .map(|c| self.value(&grid.cell_center(c)[..dim], domain))
            .collect::<Result<Vec<_>>>()?;
        Weight::new(crate::grid::GridFunction::from_samples(grid, samples)?)
    }
}

struct Coords<'a>(&'a [f64]);

impl fmt::Display for Coords<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Const(c) => write!(f, "const:{c}"),
            WeightSpec::Dist { target, gamma } => {
                f.write_str("dist:")?;
                match target {
                    DistTarget::Points(pts) if pts.len() == 1 => write!(f, "point({})", Coords(&pts[0]))?,
                    DistTarget::Points(pts) => {
                        f.write_str("points(")?;
                        for (i, p) in pts.iter().enumerate() {
                            if i > 0 {
                                f.write_str(";")?;
                            }
                            write!(f, "{}", Coords(p))?;
                        }
                        f.write_str(")")?;
                    }
                    DistTarget::Hyperplane { axis, offset } => write!(f, "hyperplane(axis={axis},offset={offset})")?,
                    DistTarget::Boundary => f.write_str("boundary")?,
                }
                write!(f, ":gamma={gamma}")
            }
            WeightSpec::Parabola { p, c, x0 } => {
                write!(f, "parabola:p={p}:c={c}")?;
                if let Some(o) = x0 {
                    write!(f, ":x0=({})", Coords(o))?;
                }
                Ok(())
            }
            WeightSpec::Fundamental { p, c, m, x0 } => {
                write!(f, "fundamental:p={p}:c={c}:m={m}")?;
                if let Some(o) = x0 {
                    write!(f, ":x0=({})", Coords(o))?;
                }
                Ok(())
            }
        }
    }
}

fn parse_coords(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| parse_f64(t.trim())).collect()
}

fn inner<'a>(s: &'a str, head: &str) -> Option<&'a str> {
    s.strip_prefix(head)?.strip_prefix('(')?.strip_suffix(')')
}

fn bad(s: &str) -> Error {
    Error::Parse(format!("unrecognised weight spec `{s}`"))
}

/// `key=value` fields after the kind, in any order, each at most once.
fn fields<'a>(parts: &[&'a str], allowed: &[&str], whole: &str) -> Result<Vec<(String, &'a str)>> {
    let mut out: Vec<(String, &str)> = Vec::new();
    for part in parts {
        let (k, v) = part.split_once('=').ok_or_else(|| bad(whole))?;
        let k = k.trim();
        if !allowed.contains(&k) || out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Parse(format!("unexpected field `{k}` in `{whole}`")));
        }
        out.push((k.into(), v.trim()));
    }
    Ok(out)
}

fn field<'a>(fs: &[(String, &'a str)], key: &str) -> Option<&'a str> {
    fs.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

fn required(fs: &[(String, &str)], key: &str, whole: &str) -> Result<f64> {
    parse_f64(field(fs, key).ok_or_else(|| Error::Parse(format!("missing `{key}` in `{whole}`")))?)
}

fn optional_point(fs: &[(String, &str)], whole: &str) -> Result<Option<Vec<f64>>> {
    field(fs, "x0")
        .map(|v| v.strip_prefix('(').and_then(|v| v.strip_suffix(')')).ok_or_else(|| bad(whole)).and_then(parse_coords))
        .transpose()
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts[0] {
            "const" if parts.len() == 2 => Ok(WeightSpec::Const(parse_f64(parts[1])?)),
            "dist" if parts.len() == 3 => {
                let t = parts[1];
                let target = if t == "boundary" {
                    DistTarget::Boundary
                } else if let Some(c) = inner(t, "points") {
                    DistTarget::Points(c.split(';').map(parse_coords).collect::<Result<_>>()?)
                } else if let Some(c) = inner(t, "point") {
                    DistTarget::Points(alloc::vec![parse_coords(c)?])
                } else if let Some(c) = inner(t, "hyperplane") {
                    let kv: Vec<&str> = c.split(',').collect();
                    let fs = fields(&kv, &["axis", "offset"], s)?;
                    let axis = field(&fs, "axis").ok_or_else(|| bad(s))?;
                    let axis = axis.parse::<usize>().map_err(|_| bad(s))?;
                    DistTarget::Hyperplane { axis, offset: required(&fs, "offset", s)? }
                } else {
                    return Err(bad(s));
                };
                let fs = fields(&parts[2..], &["gamma"], s)?;
                Ok(WeightSpec::Dist { target, gamma: required(&fs, "gamma", s)? })
            }
            "parabola" => {
                let fs = fields(&parts[1..], &["p", "c", "x0"], s)?;
                let spec = WeightSpec::Parabola {
                    p: required(&fs, "p", s)?,
                    c: required(&fs, "c", s)?,
                    x0: optional_point(&fs, s)?,
                };
                Ok(spec)
            }
            "fundamental" => {
                let fs = fields(&parts[1..], &["p", "c", "m", "x0"], s)?;
                Ok(WeightSpec::Fundamental {
                    p: required(&fs, "p", s)?,
                    c: required(&fs, "c", s)?,
                    m: required(&fs, "m", s)?,
                    x0: optional_point(&fs, s)?,
                })
            }
            _ => Err(bad(s)),
        }
    }
}
