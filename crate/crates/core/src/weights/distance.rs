use alloc::format;
use alloc::vec::Vec;

use super::Weight;
use crate::domain::{BoundaryDistance, DomainRaster};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::num;

/// Closed sets whose distance powers serve as weights.
#[derive(Clone, Debug)]
pub enum DistanceSet<'a> {
    Points(Vec<Vec<f64>>),
    /// `{x : x_axis = offset}`.
    Hyperplane { axis: usize, offset: f64 },
    Boundary(&'a DomainRaster),
}

impl DistanceSet<'_> {
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            DistanceSet::Points(pts) => pts
                .iter()
                .map(|p| num::sqrt(p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum()))
                .fold(f64::INFINITY, f64::min),
            DistanceSet::Hyperplane { axis, offset } => num::abs(x[*axis] - offset),
            DistanceSet::Boundary(d) => BoundaryDistance::point(d, x),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            DistanceSet::Points(pts) => {
                if pts.is_empty() {
                    return Err(Error::Empty("point set"));
                }
                if pts.iter().any(|p| p.len() != dim) {
                    return Err(Error::Parameter(format!("points must have {dim} coordinates")));
                }
            }
            DistanceSet::Hyperplane { axis, .. } => {
                if *axis >= dim {
                    return Err(Error::Parameter(format!("axis {axis} in dimension {dim}")));
                }
            }
            DistanceSet::Boundary(d) => {
                if d.dim() != dim {
                    return Err(Error::Parameter(format!("domain of dimension {} used in dimension {dim}", d.dim())));
                }
            }
        }
        Ok(())
    }
}

/// `x ↦ d(x, E)^γ`.
#[derive(Clone, Debug)]
pub struct DistanceWeight<'a> {
    pub set: DistanceSet<'a>,
    pub gamma: f64,
}

pub fn distance_weight(set: DistanceSet<'_>, gamma: f64) -> DistanceWeight<'_> {
    DistanceWeight { set, gamma }
}

impl DistanceWeight<'_> {
    fn power(&self, d: f64, at: &dyn Fn() -> alloc::string::String) -> Result<f64> {
        if self.gamma == 0.0 {
            return Ok(1.0);
        }
        if d == 0.0 && self.gamma < 0.0 {
            return Err(Error::SingularSample(at()));
        }
        Ok(num::powf(d, self.gamma))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.set.validate(x.len())?;
        self.power(self.set.distance(x), &|| format!("{x:?}"))
    }

    /// Samples at cell centers; boundary distances come from the exact
    /// transform when the grid is the domain's own.
    pub fn sample(&self, grid: Grid) -> Result<Weight> {
        let dim = grid.dim();
        self.set.validate(dim)?;
        let samples: Vec<f64> = match &self.set {
            DistanceSet::Boundary(d) if d.grid() == &grid => {
                let field = BoundaryDistance::new(d);
                (0..grid.num_cells())
                    .map(|c| self.power(field.cell_center(c), &|| format!("cell {c}")))
                    .collect::<Result<_>>()?
            }
            _ => (0..grid.num_cells())
                .map(|c| {
                    let x = grid.cell_center(c);
                    self.power(self.set.distance(&x[..dim]), &|| format!("cell {c}"))
                })
                .collect::<Result<_>>()?,
        };
        Weight::new(GridFunction::from_samples(grid, samples)?)
    }
}
