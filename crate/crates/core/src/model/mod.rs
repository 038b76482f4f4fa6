//! Lattice geometry, hopping kernels, single-site laws and configuration sampling.

mod config;
mod distribution;
mod kernel;
mod lattice;

pub use config::{sample_configuration, site_uniform, Configuration, Provenance};
pub use distribution::PotentialDistribution;
pub use kernel::HoppingKernel;
pub use lattice::{boundary, BoundarySide, LatticeRegion, RegionKind, SiteSet};

pub(crate) use lattice::Grid;
