//! On-disk formats.
//!
//! Every file is one JSON object with a `format` tag and a `version`.
//! Grid functions carry their samples as base64 of little-endian `f64`s in
//! row-major cell order, so a write/read cycle is bit-exact.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use sparse_poincare_core::domain::{ChainDecomposition, WhitneyDecomposition};
use sparse_poincare_core::grid::{Cube, DyadicCube, Grid, GridFunction};
use sparse_poincare_core::maximal::{MaximalField, MaximalKind};
use sparse_poincare_core::sparse::{SparseCube, SparseFamily, SparseKind};

use crate::error::{HarnessError, Result};

pub const GRID_FUNCTION: &str = "sparse-poincare/grid-function";
pub const MAXIMAL_FIELD: &str = "sparse-poincare/maximal-field";
pub const SPARSE_FAMILY: &str = "sparse-poincare/sparse-family";
pub const WHITNEY: &str = "sparse-poincare/whitney";
pub const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Format(msg.into())
}

fn check_tag(found: &str, version: u32, want: &str) -> Result<()> {
    if found != want {
        return Err(bad(format!("expected a `{want}` file, found `{found}`")));
    }
    if version != VERSION {
        return Err(bad(format!("unsupported {want} version {version}")));
    }
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Root cube and level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridHeader {
    pub n: usize,
    pub level: u32,
    pub center: Vec<f64>,
    pub half_side: f64,
}

impl GridHeader {
    pub fn of(grid: &Grid) -> Self {
        let root = grid.root();
        Self { n: grid.dim(), level: grid.level(), center: root.center()[..grid.dim()].to_vec(), half_side: root.half_side() }
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.center.len() != self.n {
            return Err(bad(format!("center has {} coordinates for n = {}", self.center.len(), self.n)));
        }
        Ok(Grid::new(Cube::new(&self.center, self.half_side)?, self.level)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionFile {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub grid: GridHeader,
    /// Base64 of the little-endian samples.
    pub samples: String,
}

pub fn encode_samples(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    STANDARD.encode(bytes)
}

pub fn decode_samples(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD.decode(text).map_err(|e| bad(format!("base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(bad(format!("payload of {} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

impl GridFunctionFile {
    pub fn of(f: &GridFunction) -> Self {
        Self {
            format: GRID_FUNCTION.into(),
            version: VERSION,
            grid: GridHeader::of(f.grid()),
            samples: encode_samples(f.samples()),
        }
    }

    pub fn function(&self) -> Result<GridFunction> {
        check_tag(&self.format, self.version, GRID_FUNCTION)?;
        let grid = self.grid.grid()?;
        let samples = decode_samples(&self.samples)?;
        if samples.len() != grid.num_cells() {
            return Err(bad(format!("{} samples for {} cells", samples.len(), grid.num_cells())));
        }
        Ok(GridFunction::from_samples(grid, samples)?)
    }
}

pub fn save_function(path: &Path, f: &GridFunction) -> Result<()> {
    write_json(path, &GridFunctionFile::of(f))
}

pub fn load_function(path: &Path) -> Result<GridFunction> {
    read_json::<GridFunctionFile>(path)?.function()
}

/// Inputs of a maximal field, as digests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(flatten)]
    pub kind: MaximalKind,
    pub input: String,
    pub weight: Option<String>,
    pub domain: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalFieldFile {
    pub format: String,
    pub version: u32,
    pub provenance: Provenance,
    pub field: GridFunctionFile,
}

fn hex(d: u64) -> String {
    format!("{d:016x}")
}

fn unhex(s: &str) -> Result<u64> {
    u64::from_str_radix(s, 16).map_err(|_| bad(format!("bad digest `{s}`")))
}

impl MaximalFieldFile {
    pub fn of(m: &MaximalField) -> Self {
        Self {
            format: MAXIMAL_FIELD.into(),
            version: VERSION,
            provenance: Provenance {
                kind: m.kind,
                input: hex(m.input),
                weight: m.weight.map(hex),
                domain: m.domain.map(hex),
            },
            field: GridFunctionFile::of(&m.field),
        }
    }

    pub fn field(&self) -> Result<MaximalField> {
        check_tag(&self.format, self.version, MAXIMAL_FIELD)?;
        let p = &self.provenance;
        Ok(MaximalField {
            kind: p.kind,
            field: self.field.function()?,
            input: unhex(&p.input)?,
            weight: p.weight.as_deref().map(unhex).transpose()?,
            domain: p.domain.as_deref().map(unhex).transpose()?,
        })
    }
}

/// One cube of a family: dyadic path, stored value and the carved set as
/// alternating absent/present run lengths over the cells of the cube in
/// row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseRecord {
    pub path: String,
    pub parent: Option<usize>,
    pub value: f64,
    pub level: Option<i64>,
    pub ratio: Option<f64>,
    pub e_runs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseFamilyFile {
    pub format: String,
    pub version: u32,
    pub grid: GridHeader,
    pub kind: SparseKind,
    pub eta: Option<f64>,
    pub cubes: Vec<SparseRecord>,
}

fn path_string(q: &DyadicCube) -> String {
    q.path().iter().map(|d| char::from(b'0' + d)).collect()
}

fn parse_path(s: &str, dim: usize) -> Result<DyadicCube> {
    let digits = s
        .bytes()
        .map(|b| if b.is_ascii_digit() { Ok(b - b'0') } else { Err(bad(format!("bad path `{s}`"))) })
        .collect::<Result<Vec<u8>>>()?;
    Ok(DyadicCube::from_path(&digits, dim)?)
}

/// Runs of `E_S` over the cells of `S`.
fn carved_runs(family: &SparseFamily, i: usize) -> Vec<usize> {
    let g = family.grid();
    let mut out = Vec::new();
    let mut state = false;
    let mut len = 0;
    g.for_each_cell_in(&family.cubes()[i].cube, |c| {
        if (family.owner(c) == i) == state {
            len += 1;
        } else {
            out.push(len);
            state = !state;
            len = 1;
        }
    })
    .expect("family cube within grid");
    out.push(len);
    out
}

impl SparseFamilyFile {
    pub fn of(family: &SparseFamily) -> Self {
        let ratios = family.carved_ratios();
        let cubes = family
            .cubes()
            .iter()
            .enumerate()
            .map(|(i, c)| SparseRecord {
                path: path_string(&c.cube),
                parent: c.parent,
                value: c.value,
                level: c.level,
                ratio: ratios.map(|r| r[i]),
                e_runs: carved_runs(family, i),
            })
            .collect();
        Self {
            format: SPARSE_FAMILY.into(),
            version: VERSION,
            grid: GridHeader::of(family.grid()),
            kind: family.kind(),
            eta: family.eta(),
            cubes,
        }
    }

    /// Rebuilds the family and checks every recorded carved set against the
    /// one implied by the tree.
    pub fn family(&self) -> Result<SparseFamily> {
        check_tag(&self.format, self.version, SPARSE_FAMILY)?;
        let grid = self.grid.grid()?;
        let cubes = self
            .cubes
            .iter()
            .map(|r| {
                Ok(SparseCube { cube: parse_path(&r.path, grid.dim())?, parent: r.parent, value: r.value, level: r.level })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut family = SparseFamily::from_parts(grid, self.kind, cubes)?;
        for (i, r) in self.cubes.iter().enumerate() {
            if carved_runs(&family, i) != r.e_runs {
                return Err(bad(format!("carved set of cube {i} (`{}`) does not match the tree", r.path)));
            }
        }
        if let Some(eta) = self.eta {
            let ratios = self
                .cubes
                .iter()
                .map(|r| r.ratio.ok_or_else(|| bad(format!("cube `{}` has no carved ratio", r.path))))
                .collect::<Result<Vec<_>>>()?;
            family = family.with_carving(eta, ratios)?;
        }
        Ok(family)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyRecord {
    pub path: String,
    pub center: Vec<f64>,
    pub half_side: f64,
    pub distance: f64,
    pub layer: bool,
    pub parent: Option<usize>,
    pub chain_len: usize,
    pub shadow_len: usize,
    pub boman: u64,
}

/// Whitney cubes with their chains, for external plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitneyFile {
    pub format: String,
    pub version: u32,
    pub grid: GridHeader,
    pub central: usize,
    pub boman_constant: u64,
    pub overlap: usize,
    pub c_adj: f64,
    pub cubes: Vec<WhitneyRecord>,
}

impl WhitneyFile {
    pub fn of(w: &WhitneyDecomposition, chains: &ChainDecomposition) -> Self {
        let dim = w.grid().dim();
        let cubes = w
            .cubes()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let q = w.cube(i);
                WhitneyRecord {
                    path: path_string(&c.cube),
                    center: q.center()[..dim].to_vec(),
                    half_side: q.half_side(),
                    distance: c.distance,
                    layer: c.layer,
                    parent: chains.parent(i),
                    chain_len: chains.chain(i).len(),
                    shadow_len: chains.shadow(i).len(),
                    boman: chains.boman_per_cube()[i],
                }
            })
            .collect();
        Self {
            format: WHITNEY.into(),
            version: VERSION,
            grid: GridHeader::of(w.grid()),
            central: chains.central(),
            boman_constant: chains.boman_constant(),
            overlap: w.overlap(),
            c_adj: chains.c_adj(),
            cubes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparse_poincare_core::sparse::build_sparse_oscillation;

    #[test]
    fn samples_round_trip_bitwise() {
        let v = [0.1, -0.0, 1e-300, f64::MAX, 3.0];
        let back = decode_samples(&encode_samples(&v)).unwrap();
        assert_eq!(v.map(f64::to_bits).to_vec(), back.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert!(decode_samples("AAA=").is_err());
    }

    #[test]
    fn family_rejects_tampered_runs() {
        let g = Grid::unit(1, 3).unwrap();
        let f = GridFunction::from_samples(g, vec![0.0, 0.0, 0.0, 9.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let fam = build_sparse_oscillation(&f, &DyadicCube::ROOT, 2.0).unwrap();
        let mut file = SparseFamilyFile::of(&fam);
        assert_eq!(file.family().unwrap(), fam);
        let last = file.cubes.len() - 1;
        file.cubes[last].e_runs = vec![1];
        assert!(file.family().is_err());
    }

    #[test]
    fn header_checks_dimension() {
        let h = GridHeader { n: 2, level: 1, center: vec![0.5], half_side: 0.5 };
        assert!(h.grid().is_err());
    }
}
