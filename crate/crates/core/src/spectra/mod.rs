//! Spectral kernels for finite-volume Hamiltonians.

mod algebraic;
mod catalog;
mod charpoly;
mod counting;
mod dense;
mod exact;
mod frontal;
mod ldl;
mod mirror;
mod poly;

pub use algebraic::{algebraic_constant, AlgebraicNumber, LOG4D3_SUP};
pub(crate) use catalog::cluster_matrix;
pub use catalog::{
    cluster_spectrum_catalog, CatalogEntry, FiniteSpectrumCatalog, ASSIGNMENT_GUARD,
};
pub use charpoly::{charpoly_exact, luck_bound, luck_bound_with, LuckReport, CHARPOLY_GUARD};
pub use counting::{
    connected_blocks, count_below, CounterOptions, SpectralCounter, SplitCount, EIGEN_TOL,
};
pub use dense::{eigs_dense, sorted_eigenvalues, SpectrumSample};
pub use exact::{determinant_exact, kernel_dim_exact, rank_bareiss, EXACT_GUARD};
pub use mirror::{mirror_embed, MirrorEmbedding};
