use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the dyadic toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    Dimension(usize),
    #[error("level {level} exceeds the limit {max} for dimension {dim}")]
    LevelTooDeep { dim: usize, level: u32, max: u32 },
    #[error("invalid cube: {0}")]
    InvalidCube(String),
    #[error("non-finite sample {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },
    #[error("cube at depth {depth} is finer than the grid level {level}")]
    Resolution { depth: u32, level: u32 },
    #[error("grid functions live on different grids")]
    Incompatible,
    #[error("weight vanishes on {0}")]
    DegenerateWeight(String),
    #[error("weight is not strictly positive at cell {cell} (value {value})")]
    NonPositiveWeight { cell: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("singular sample: {0}")]
    SingularSample(String),
    #[error("exponent {gamma} is not locally integrable in dimension {dim}")]
    NonIntegrable { gamma: f64, dim: usize },
    #[error("admissibility: {0}")]
    Admissibility(String),
    #[error("test function support leaves the domain: {0}")]
    Support(String),
    #[error("{} cells are not covered by admissible Whitney cubes", .uncovered.len())]
    Coverage { uncovered: Vec<usize> },
    #[error("adjacency graph has {} components", .components.len())]
    Disconnected { components: Vec<Vec<usize>> },
    #[error("sparsity violated at {cube}: ratio {ratio} below eta {eta}")]
    Sparsity { cube: String, ratio: f64, eta: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("empty {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
