use core::fmt;

use alloc::format;
use alloc::vec::Vec;

use super::cube::MAX_DIM;
use crate::error::{Error, Result};

/// A dyadic subcube of some root cube, addressed by depth and integer
/// coordinates at that depth.
///
/// Child `j` of a cube takes the upper half along axis `i` iff bit `i` of
/// `j` is set. The geometry is resolved through a [`super::Grid`]; the
/// address alone is root-agnostic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicCube {
    depth: u32,
    coords: [u32; MAX_DIM],
}

impl DyadicCube {
    pub const ROOT: Self = Self { depth: 0, coords: [0; MAX_DIM] };

    pub fn new(depth: u32, coords: &[u32]) -> Result<Self> {
        if coords.len() > MAX_DIM {
            return Err(Error::Dimension(coords.len()));
        }
        if depth >= 32 || coords.iter().any(|&c| u64::from(c) >= 1u64 << depth) {
            return Err(Error::InvalidCube(format!("coordinates {coords:?} outside depth {depth}")));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { depth, coords: c })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn coords(&self) -> &[u32; MAX_DIM] {
        &self.coords
    }

    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    pub fn child(&self, index: usize) -> Self {
        let mut c = self.coords;
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = 2 * *ci + ((index >> i) & 1) as u32;
        }
        Self { depth: self.depth + 1, coords: c }
    }

    pub fn children(&self, dim: usize) -> impl Iterator<Item = DyadicCube> + '_ {
        (0..1usize << dim).map(move |j| self.child(j))
    }

    /// `πQ`.
    pub fn parent(&self) -> Option<Self> {
        if self.depth == 0 {
            return None;
        }
        let mut c = self.coords;
        for ci in c.iter_mut() {
            *ci >>= 1;
        }
        Some(Self { depth: self.depth - 1, coords: c })
    }

    /// The ancestor at `depth` (a cube is its own ancestor at its depth).
    pub fn ancestor(&self, depth: u32) -> Self {
        assert!(depth <= self.depth, "ancestor depth {depth} below {}", self.depth);
        let shift = self.depth - depth;
        let mut c = self.coords;
        for ci in c.iter_mut() {
            *ci >>= shift;
        }
        Self { depth, coords: c }
    }

    /// Index of this cube among its parent's children.
    pub fn child_index(&self) -> usize {
        self.coords.iter().enumerate().map(|(i, &c)| ((c & 1) as usize) << i).sum()
    }

    /// Child indices from the root down to this cube.
    pub fn path(&self) -> Vec<u8> {
        (1..=self.depth).map(|d| self.ancestor(d).child_index() as u8).collect()
    }

    pub fn from_path(path: &[u8], dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        let mut q = Self::ROOT;
        for &j in path {
            if usize::from(j) >= 1 << dim {
                return Err(Error::InvalidCube(format!("child index {j} in dimension {dim}")));
            }
            q = q.child(usize::from(j));
        }
        Ok(q)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.depth >= self.depth && other.ancestor(self.depth) == *self
    }

    /// Dyadic cubes of one root intersect iff they are nested.
    pub fn intersects(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depth == 0 {
            return f.write_str("root");
        }
        for j in self.path() {
            write!(f, "{j}")?;
        }
        Ok(())
    }
}
