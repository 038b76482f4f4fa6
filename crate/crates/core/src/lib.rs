//! Finite-volume laboratory for quantum site-percolation Hamiltonians on `Z^d`.
//!
//! The crate builds random restrictions `H = q + H0` of a finite hopping range
//! operator to boxes of the lattice, counts their eigenvalues by matrix inertia,
//! and drives Monte Carlo estimates of the integrated density of states (IDS),
//! its jumps, cluster densities and the quantitative continuity bounds
//! (log-Hölder at algebraic energies, Wegner-type Lipschitz bounds).
//!
//! Module map:
//!
//! - [`model`]: lattice regions, hopping kernels, single-site laws, sampling.
//! - [`percolation`]: cluster labeling, boundary-connected regions, lattice animals.
//! - [`operator`]: sparse symmetric finite-volume matrices.
//! - [`spectra`]: inertia counting, dense spectra, exact integer kernels,
//!   characteristic polynomials, algebraic constants, cluster spectra, mirror states.
//! - [`experiments`]: parallel Monte Carlo drivers.

pub mod error;
pub mod experiments;
pub mod model;
pub mod operator;
pub mod percolation;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{Configuration, HoppingKernel, LatticeRegion, PotentialDistribution, SiteSet};
pub use operator::{assemble, SymmetricOperatorMatrix};
