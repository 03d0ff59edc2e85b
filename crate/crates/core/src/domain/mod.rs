//! Rasterized domains, Whitney decompositions, chains and the
//! local-to-global checks built on them.

mod boxes;
mod chains;
mod checks;
mod csg;
mod distance;
mod raster;
mod whitney;

pub use boxes::Aabb;
pub use chains::{build_chains, ChainDecomposition, DEFAULT_C_ADJ};
pub use checks::{box_cells, chain_estimate_check, local_to_global, ChainEstimateReport, LocalToGlobalReport, Membership};
pub use csg::{DomainSpec, SetOp};
pub use distance::BoundaryDistance;
pub use raster::DomainRaster;
pub use whitney::{whitney_decompose, CoveragePolicy, WhitneyCube, WhitneyDecomposition, DILATION};

