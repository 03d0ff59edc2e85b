//! PGM rasters as planar domains.
//!
//! Plain (`P2`) and binary (`P5`, 8-bit) graymaps of size `2^L × 2^L`;
//! nonzero pixels are inside. Columns run along axis 0 and rows along
//! axis 1, top row last, so the image reads like a plot of the domain.

use std::path::Path;

use sparse_poincare_core::domain::DomainRaster;
use sparse_poincare_core::grid::{CellMask, Cube, Grid};

use crate::error::{HarnessError, Result};

fn bad(msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Format(format!("pgm: {msg}"))
}

/// Header tokens, skipping `#` comments; returns the offset after the
/// single whitespace byte that ends the header.
fn header(bytes: &[u8]) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < 4 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad("truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

pub fn parse(bytes: &[u8], root: Cube) -> Result<DomainRaster> {
    if root.dim() != 2 {
        return Err(bad("rasters describe planar domains"));
    }
    let (tokens, body) = header(bytes)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad header value `{s}`")));
    let (w, h, max) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if w != h || !w.is_power_of_two() {
        return Err(bad(format!("raster is {w}×{h}; expected a square power of two")));
    }
    let pixels: Vec<usize> = match tokens[0].as_str() {
        "P2" => std::str::from_utf8(bytes.get(body..).unwrap_or_default())
            .map_err(|_| bad("non-ASCII plain raster"))?
            .split_ascii_whitespace()
            .map(num)
            .collect::<Result<_>>()?,
        "P5" if max < 256 => bytes.get(body..).unwrap_or_default().iter().map(|&b| b as usize).collect(),
        other => return Err(bad(format!("unsupported magic `{other}` with maxval {max}"))),
    };
    if pixels.len() < w * h {
        return Err(bad(format!("{} pixels for a {w}×{h} raster", pixels.len())));
    }
    let level = w.trailing_zeros();
    let grid = Grid::new(root, level)?;
    let mask = CellMask::from_fn(grid, |cell| {
        let k = grid.coords_of(cell);
        let row = w - 1 - k[1];
        pixels[row * w + k[0]] != 0
    });
    Ok(DomainRaster::new(mask)?)
}

pub fn load(path: &Path, root: Cube) -> Result<DomainRaster> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse(&bytes, root)
}
