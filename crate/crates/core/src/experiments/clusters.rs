use serde::Serialize;

use super::ids::Volume;
use super::parallel::map_realizations;
use super::params::ExperimentParams;
use super::stats::{columns, mean_stderr, MeanStderr};
use crate::error::{Error, Result};
use crate::percolation::label_clusters;

/// `G(n)`: density of core sites in finite clusters of size at least `n`.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterDensityProfile {
    /// Entry `k` holds `G(k + 1)`.
    pub g: Vec<MeanStderr>,
    /// Density of core sites in boundary-touching clusters.
    pub g_inf: MeanStderr,
    pub realizations: usize,
    pub l: u32,
    pub p: f64,
}

pub fn cluster_density_profile(
    params: &ExperimentParams,
    n_max: usize,
) -> Result<ClusterDensityProfile> {
    params.validate()?;
    if n_max == 0 {
        return Err(Error::invalid("nmax must be at least 1"));
    }
    let vol = Volume::new(params, params.l())?;
    let core = vol.size() as f64;
    let rows = map_realizations(params.realizations, params.workers, |r| {
        let config = params.sample(&vol.region, r);
        let labeling = label_clusters(&config, &params.kernel)?;
        // core sites of finite clusters by cluster size, sizes above n_max pooled
        let mut by_size = vec![0usize; n_max + 1];
        for c in labeling
            .clusters()
            .iter()
            .filter(|c| !c.touches_outer_boundary)
        {
            by_size[c.size.min(n_max)] += c.core_size;
        }
        let mut g = vec![0.0; n_max];
        let mut acc = 0usize;
        for n in (1..=n_max).rev() {
            acc += by_size[n];
            g[n - 1] = acc as f64 / core;
        }
        Ok((g, labeling.boundary_cluster_fraction()))
    })?;
    let (g, inf): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();
    Ok(ClusterDensityProfile {
        g: columns(&g),
        g_inf: mean_stderr(&inf),
        realizations: params.realizations,
        l: params.l(),
        p: params.dist.p(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PotentialDistribution;
    use crate::percolation::finite_cluster_fraction;

    #[test]
    fn agrees_with_direct_fractions() {
        let mut p = ExperimentParams::new(2, 10, PotentialDistribution::bernoulli(0.45).unwrap());
        p.realizations = 3;
        let prof = cluster_density_profile(&p, 6).unwrap();
        let vol = Volume::new(&p, 10).unwrap();
        for n in 1..=6 {
            let direct: Vec<f64> = (0..3)
                .map(|r| {
                    let lab = label_clusters(&p.sample(&vol.region, r), &p.kernel).unwrap();
                    finite_cluster_fraction(&lab, n).unwrap().value()
                })
                .collect();
            assert!((prof.g[n - 1].mean - mean_stderr(&direct).mean).abs() < 1e-15);
        }
        assert!(prof.g.windows(2).all(|w| w[0].mean >= w[1].mean));
    }

    #[test]
    fn trivial_laws() {
        let mut p = ExperimentParams::new(2, 5, PotentialDistribution::bernoulli(1.0).unwrap());
        p.realizations = 2;
        let full = cluster_density_profile(&p, 3).unwrap();
        assert!(full.g.iter().all(|g| g.mean == 0.0));
        assert_eq!(full.g_inf.mean, 1.0);
        p.dist = PotentialDistribution::bernoulli(0.0).unwrap();
        let empty = cluster_density_profile(&p, 3).unwrap();
        assert!(empty.g.iter().all(|g| g.mean == 0.0));
        assert_eq!(empty.g_inf.mean, 0.0);
        assert!(cluster_density_profile(&p, 0).is_err());
    }
}
