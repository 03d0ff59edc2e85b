//! Weights, the dyadic A∞ estimator, the two-weight constant and the
//! condition checks consumed by the global theorems.

mod ainfty;
mod conditions;
mod distance;
mod spec;
mod two_weight;

pub use ainfty::{estimate_ainfty, AInftyEstimate};
pub use conditions::{
    aikawa_check, doubling_constant, half_harnack_check, reverse_holder_check, supersolution_check, Bump,
    ConditionKind, ConditionReport,
};
pub use distance::{distance_weight, DistanceSet, DistanceWeight};
pub use spec::{DistTarget, WeightSpec};
pub use two_weight::{two_weight_constant, two_weight_constant_over, TwoWeightReport};

use alloc::format;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::num;

/// A grid function with strictly positive samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(GridFunction);

impl Weight {
    pub fn new(f: GridFunction) -> Result<Self> {
        if let Some((cell, &value)) = f.samples().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NonPositiveWeight { cell, value });
        }
        Ok(Self(f))
    }

    pub fn build(grid: Grid, sampler: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        Self::new(GridFunction::build(grid, sampler)?)
    }

    /// `w ≡ 1`.
    pub fn lebesgue(grid: Grid) -> Self {
        Self(GridFunction::constant(grid, 1.0).expect("finite"))
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }

    pub fn into_function(self) -> GridFunction {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }

    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.0.value(cell)
    }

    /// `σ = v^{−1/(p−1)}`.
    pub fn dual(&self, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Parameter(format!("p = {p} must exceed 1")));
        }
        let e = -1.0 / (p - 1.0);
        Self::new(self.0.map(|v| num::powf(v, e))?)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.map(|v| c * v)?)
    }
}

impl AsRef<GridFunction> for Weight {
    fn as_ref(&self) -> &GridFunction {
        &self.0
    }
}
