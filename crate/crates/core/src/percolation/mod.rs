//! Cluster structure of the active set and enumeration of finite connected
//! site sets.

mod animals;
mod clusters;
mod union_find;

pub use animals::{enumerate_connected_subgraphs, SubgraphCatalog, ANIMAL_GUARD};
pub use clusters::{
    connected_region, finite_cluster_fraction, label_clusters, ClusterFraction, ClusterInfo,
    ClusterLabeling,
};
pub use union_find::UnionFind;
