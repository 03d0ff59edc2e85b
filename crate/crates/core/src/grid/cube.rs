use core::fmt;

use alloc::format;

use crate::error::{Error, Result};
use crate::num;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point of ℝⁿ padded to [`MAX_DIM`] coordinates; unused trailing
/// coordinates are zero.
pub type Point = [f64; MAX_DIM];

/// Axis-parallel half-open cube `∏ [c_i − r, c_i + r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cube {
    dim: usize,
    center: Point,
    half_side: f64,
}

impl Cube {
    pub fn new(center: &[f64], half_side: f64) -> Result<Self> {
        let dim = center.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        if !(half_side.is_finite() && half_side > 0.0) {
            return Err(Error::InvalidCube(format!("half side {half_side} must be positive")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCube(format!("non-finite center {center:?}")));
        }
        let mut c = [0.0; MAX_DIM];
        c[..dim].copy_from_slice(center);
        Ok(Self { dim, center: c, half_side })
    }

    /// Cube from its lower corner and side length.
    pub fn from_corner(lower: &[f64], side: f64) -> Result<Self> {
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::Dimension(lower.len()));
        }
        let mut c = [0.0; MAX_DIM];
        for (ci, x) in c.iter_mut().zip(lower) {
            *ci = x + side / 2.0;
        }
        Self::new(&c[..lower.len()], side / 2.0)
    }

    /// `[0,1)ⁿ`.
    pub fn unit(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        let mut c = [0.0; MAX_DIM];
        c[..dim].fill(0.5);
        Self { dim, center: c, half_side: 0.5 }
    }

    /// `[-h, h)ⁿ`.
    pub fn centered(dim: usize, half_side: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(dim));
        }
        Self::new(&[0.0; MAX_DIM][..dim], half_side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center[..self.dim]
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    /// Edge length `l(Q)`.
    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn volume(&self) -> f64 {
        num::powi(self.side(), self.dim as i32)
    }

    pub fn diameter(&self) -> f64 {
        self.side() * num::sqrt(self.dim as f64)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_side
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.half_side
    }

    /// `NQ`: same center, half side scaled by `factor`.
    pub fn dilate(&self, factor: f64) -> Self {
        Self { half_side: self.half_side * factor, ..*self }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|i| self.lower(i) <= x[i] && x[i] < self.upper(i))
    }

    /// Membership in the open cube.
    pub fn contains_open(&self, x: &[f64]) -> bool {
        (0..self.dim).all(|i| self.lower(i) < x[i] && x[i] < self.upper(i))
    }

    pub fn contains_cube(&self, other: &Cube) -> bool {
        (0..self.dim).all(|i| self.lower(i) <= other.lower(i) && other.upper(i) <= self.upper(i))
    }

    /// Volume of the intersection with the box `∏ [lo_i, hi_i)`.
    pub fn overlap_volume(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut v = 1.0;
        for i in 0..self.dim {
            let a = self.lower(i).max(lo[i]);
            let b = self.upper(i).min(hi[i]);
            if b <= a {
                return 0.0;
            }
            v *= b - a;
        }
        v
    }

    pub fn overlap_cube(&self, other: &Cube) -> f64 {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..self.dim {
            lo[i] = other.lower(i);
            hi[i] = other.upper(i);
        }
        self.overlap_volume(&lo, &hi)
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            if i > 0 {
                f.write_str("×")?;
            }
            write!(f, "[{}, {})", self.lower(i), self.upper(i))?;
        }
        Ok(())
    }
}
