use std::sync::Arc;

use super::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::model::{Configuration, HoppingKernel, LatticeRegion, SiteSet};

/// One H0-connected component of the active sites of core plus collar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterInfo {
    /// Smallest region-site index (lexicographic rank) in the cluster.
    pub id: usize,
    pub size: usize,
    pub core_size: usize,
    /// Contains an active site of the outer `R`-boundary of the core.
    pub touches_outer_boundary: bool,
}

const NO_CLUSTER: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct ClusterLabeling {
    region: Arc<LatticeRegion>,
    // cluster index per grid point, NO_CLUSTER when inactive or outside
    labels: Vec<u32>,
    clusters: Vec<ClusterInfo>,
}

/// Union-find labeling of the active sites of `config` under the kernel's
/// nearest-neighbour relation `c(v) != 0`.
pub fn label_clusters(config: &Configuration, kernel: &HoppingKernel) -> Result<ClusterLabeling> {
    let region = config.region().clone();
    if kernel.dim() != region.dim() {
        return Err(Error::invalid("kernel and region dimensions differ"));
    }
    let range = kernel.range();
    if region.collar() < range {
        return Err(Error::Precondition(format!(
            "collar {} is narrower than the hopping range {range}",
            region.collar()
        )));
    }
    let grid = region.grid();
    let values = config.grid_values();
    let active = |idx: usize| values[idx].is_finite();
    let hops: Vec<Vec<i32>> = kernel.forward_hops().map(|(v, _)| v.to_vec()).collect();

    let mut uf = UnionFind::new(grid.len());
    let mut y = vec![0i32; region.dim()];
    grid.for_each(|idx, x| {
        if !active(idx) {
            return;
        }
        for v in &hops {
            for k in 0..x.len() {
                y[k] = x[k] + v[k];
            }
            if let Some(j) = grid.index(&y) {
                if active(j) {
                    uf.union(idx, j);
                }
            }
        }
    });

    let mut labels = vec![NO_CLUSTER; grid.len()];
    let mut root_label = vec![NO_CLUSTER; grid.len()];
    let mut clusters: Vec<ClusterInfo> = Vec::new();
    let mut rank = 0usize;
    for idx in 0..grid.len() {
        let Some(layer) = region.layer_at(idx) else {
            continue;
        };
        let site_rank = rank;
        rank += 1;
        if !active(idx) {
            continue;
        }
        let root = uf.find(idx);
        if root_label[root] == NO_CLUSTER {
            root_label[root] = clusters.len() as u32;
            clusters.push(ClusterInfo {
                id: site_rank,
                size: 0,
                core_size: 0,
                touches_outer_boundary: false,
            });
        }
        let c = root_label[root];
        labels[idx] = c;
        let info = &mut clusters[c as usize];
        info.size += 1;
        if layer == 0 {
            info.core_size += 1;
        } else if layer <= range {
            info.touches_outer_boundary = true;
        }
    }
    Ok(ClusterLabeling {
        region,
        labels,
        clusters,
    })
}

impl ClusterLabeling {
    pub fn region(&self) -> &Arc<LatticeRegion> {
        &self.region
    }

    /// Clusters ordered by id.
    pub fn clusters(&self) -> &[ClusterInfo] {
        &self.clusters
    }

    pub fn cluster_of(&self, site: &[i32]) -> Option<&ClusterInfo> {
        let idx = self.region.grid().index(site)?;
        match self.labels[idx] {
            NO_CLUSTER => None,
            c => Some(&self.clusters[c as usize]),
        }
    }

    pub(crate) fn label_at(&self, grid_index: usize) -> Option<usize> {
        match self.labels[grid_index] {
            NO_CLUSTER => None,
            c => Some(c as usize),
        }
    }

    pub fn active_site_count(&self) -> usize {
        self.clusters.iter().map(|c| c.size).sum()
    }

    /// Active core sites joined through active sites to the outer
    /// `R`-boundary of the core.
    pub fn connected_core_sites(&self) -> SiteSet {
        let grid = self.region.grid();
        let mut coords = Vec::new();
        grid.for_each(|idx, x| {
            if self.region.layer_at(idx) == Some(0) {
                if let Some(c) = self.label_at(idx) {
                    if self.clusters[c].touches_outer_boundary {
                        coords.extend_from_slice(x);
                    }
                }
            }
        });
        SiteSet::from_sorted_flat(self.region.dim(), coords)
    }

    /// Fraction of core sites lying in boundary-touching clusters.
    pub fn boundary_cluster_fraction(&self) -> f64 {
        let touching: usize = self
            .clusters
            .iter()
            .filter(|c| c.touches_outer_boundary)
            .map(|c| c.core_size)
            .sum();
        touching as f64 / self.region.core_count().max(1) as f64
    }
}

/// The boundary-connected part of the core of `config`.
pub fn connected_region(config: &Configuration, kernel: &HoppingKernel) -> Result<SiteSet> {
    Ok(label_clusters(config, kernel)?.connected_core_sites())
}

/// Exact ratio `count / total` of core sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterFraction {
    pub count: usize,
    pub total: usize,
}

impl ClusterFraction {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count as f64 / self.total as f64
        }
    }
}

/// Fraction of core sites in finite (not boundary-touching) clusters of size
/// at least `n`, normalised by the full core size.
pub fn finite_cluster_fraction(labeling: &ClusterLabeling, n: usize) -> Result<ClusterFraction> {
    if n == 0 {
        return Err(Error::invalid("cluster size threshold must be positive"));
    }
    let count = labeling
        .clusters
        .iter()
        .filter(|c| !c.touches_outer_boundary && c.size >= n)
        .map(|c| c.core_size)
        .sum();
    Ok(ClusterFraction {
        count,
        total: labeling.region.core_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn with_active(region: LatticeRegion, active: &[&[i32]]) -> Configuration {
        let set: HashSet<Vec<i32>> = active.iter().map(|s| s.to_vec()).collect();
        Configuration::from_fn(Arc::new(region), |x| {
            if set.contains(x) {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    #[test]
    fn full_lattice_is_one_touching_cluster() {
        let region = Arc::new(LatticeRegion::cube(2, 3, 2).unwrap());
        let config = Configuration::from_fn(region.clone(), |_| 0.0);
        let lab = label_clusters(&config, &HoppingKernel::adjacency(2)).unwrap();
        assert_eq!(lab.clusters().len(), 1);
        assert_eq!(lab.clusters()[0].size, region.site_count());
        assert!(lab.clusters()[0].touches_outer_boundary);
        assert_eq!(lab.connected_core_sites(), region.core_sites());
        for n in 1..5 {
            assert_eq!(finite_cluster_fraction(&lab, n).unwrap().count, 0);
        }
    }

    #[test]
    fn lone_interior_site() {
        let config = with_active(LatticeRegion::cube(2, 3, 2).unwrap(), &[&[0, 0]]);
        let lab = label_clusters(&config, &HoppingKernel::adjacency(2)).unwrap();
        assert_eq!(lab.clusters().len(), 1);
        let c = lab.cluster_of(&[0, 0]).unwrap();
        assert_eq!(c.size, 1);
        assert!(!c.touches_outer_boundary);
        assert!(lab.connected_core_sites().is_empty());
    }

    #[test]
    fn gap_disconnects_a_chain() {
        let config = with_active(LatticeRegion::cube(1, 5, 2).unwrap(), &[&[0], &[1], &[3]]);
        let lab = label_clusters(&config, &HoppingKernel::adjacency(1)).unwrap();
        assert_eq!(lab.clusters().len(), 2);
        assert_eq!(lab.cluster_of(&[0]), lab.cluster_of(&[1]));
        assert_ne!(lab.cluster_of(&[0]), lab.cluster_of(&[3]));
        assert_eq!(lab.cluster_of(&[3]).unwrap().size, 1);
        assert!(lab.cluster_of(&[2]).is_none());
    }

    #[test]
    fn cluster_ids_are_smallest_site_ranks() {
        let config = with_active(LatticeRegion::cube(1, 3, 1).unwrap(), &[&[-4], &[-3], &[2]]);
        let lab = label_clusters(&config, &HoppingKernel::adjacency(1)).unwrap();
        let ids: Vec<usize> = lab.clusters().iter().map(|c| c.id).collect();
        // region sites are -4..=4, so ranks are coordinate + 4
        assert_eq!(ids, vec![0, 6]);
    }

    #[test]
    fn isolated_site_fraction() {
        let config = with_active(LatticeRegion::cube(1, 4, 2).unwrap(), &[&[0]]);
        let lab = label_clusters(&config, &HoppingKernel::adjacency(1)).unwrap();
        let g1 = finite_cluster_fraction(&lab, 1).unwrap();
        assert_eq!((g1.count, g1.total), (1, 9));
        assert_eq!(finite_cluster_fraction(&lab, 2).unwrap().count, 0);
        assert!(finite_cluster_fraction(&lab, 0).is_err());
    }

    #[test]
    fn collar_must_cover_range() {
        let config = with_active(LatticeRegion::cube(1, 4, 0).unwrap(), &[&[0]]);
        assert!(matches!(
            label_clusters(&config, &HoppingKernel::adjacency(1)),
            Err(Error::Precondition(_))
        ));
    }

    /// Breadth-first oracle for the boundary-connected set of a box.
    fn bfs_connected(config: &Configuration, l: i32) -> HashSet<Vec<i32>> {
        let region = config.region();
        let mut seen: HashSet<Vec<i32>> = HashSet::new();
        let mut queue = VecDeque::new();
        for s in region.all_sites().iter() {
            if region.layer_of(s) == Some(1) && config.is_active(s) {
                seen.insert(s.to_vec());
                queue.push_back(s.to_vec());
            }
        }
        while let Some(x) = queue.pop_front() {
            for k in 0..x.len() {
                for step in [-1, 1] {
                    let mut y = x.clone();
                    y[k] += step;
                    if y.iter().all(|c| c.abs() <= l + 1)
                        && config.is_active(&y)
                        && region.layer_of(&y).is_some_and(|t| t <= 1)
                        && seen.insert(y.clone())
                    {
                        queue.push_back(y);
                    }
                }
            }
        }
        seen.into_iter().filter(|s| region.in_core(s)).collect()
    }

    #[test]
    fn spanning_column_is_the_connected_region() {
        let l = 4;
        let region = Arc::new(LatticeRegion::cube(2, l as u32, 2).unwrap());
        let config =
            Configuration::from_fn(
                region.clone(),
                |x| {
                    if x[0] == 1 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                },
            );
        let con = connected_region(&config, &HoppingKernel::adjacency(2)).unwrap();
        let oracle = bfs_connected(&config, l);
        assert_eq!(con, SiteSet::new(2, oracle).unwrap());
        assert_eq!(con.len(), 2 * l as usize + 1);
        assert!(con.iter().all(|s| s[0] == 1));
    }

    #[test]
    fn random_configurations_match_bfs() {
        use crate::model::{sample_configuration, PotentialDistribution};
        let dist = PotentialDistribution::bernoulli(0.55).unwrap();
        let region = Arc::new(LatticeRegion::cube(2, 7, 2).unwrap());
        for r in 0..20 {
            let config = sample_configuration(&dist, region.clone(), 99, r);
            let con = connected_region(&config, &HoppingKernel::adjacency(2)).unwrap();
            assert_eq!(con, SiteSet::new(2, bfs_connected(&config, 7)).unwrap());
            assert!(con.is_subset(&config.active_core_sites()));
        }
    }
}
