use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use super::parallel::map_realizations;
use super::params::{ExperimentParams, Restriction, DEFAULTS};
use super::stats::{columns, mean_stderr, MeanStderr};
use crate::error::{Error, Result};
use crate::model::{LatticeRegion, SiteSet};
use crate::operator::{assemble, SymmetricOperatorMatrix};
use crate::percolation::label_clusters;
use crate::spectra::{eigs_dense, CounterOptions, SpectralCounter, SplitCount, EIGEN_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Normalized eigenvalue counts of the box operator.
    Counting,
    /// Diagonal of the spectral projector averaged over interior sites.
    ProjectorDiag,
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counting" => Ok(Estimator::Counting),
            "projector_diag" => Ok(Estimator::ProjectorDiag),
            _ => Err(Error::invalid(format!(
                "unknown estimator '{s}' (counting|projector_diag)"
            ))),
        }
    }
}

/// Monte Carlo estimate of the IDS on a grid, normalized by the full box.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalIDS {
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub realizations: usize,
    pub l: u32,
    pub restriction: Restriction,
    pub estimator: Estimator,
    /// `|Lambda_L|`, the normalization.
    pub box_size: usize,
    pub active_fraction: MeanStderr,
}

impl EmpiricalIDS {
    pub(crate) fn from_rows(
        params: &ExperimentParams,
        l: u32,
        restriction: Restriction,
        estimator: Estimator,
        box_size: usize,
        rows: &[Vec<f64>],
        active: &[f64],
    ) -> Self {
        let stats = columns(rows);
        EmpiricalIDS {
            grid: params.grid.clone(),
            mean: stats.iter().map(|s| s.mean).collect(),
            stderr: stats.iter().map(|s| s.stderr).collect(),
            realizations: rows.len(),
            l,
            restriction,
            estimator,
            box_size,
            active_fraction: mean_stderr(active),
        }
    }
}

/// A sampled box: the operator on the active core sites and, per row,
/// whether the site belongs to a boundary-touching cluster.
pub(crate) struct Realization {
    pub matrix: SymmetricOperatorMatrix,
    pub tags: Vec<bool>,
    pub active_fraction: f64,
}

impl Realization {
    pub fn restricted(&self, restriction: Restriction) -> SymmetricOperatorMatrix {
        match restriction {
            Restriction::Box => self.matrix.clone(),
            Restriction::Con => {
                let rows: Vec<usize> = (0..self.matrix.n()).filter(|&i| self.tags[i]).collect();
                self.matrix.submatrix(&rows)
            }
        }
    }

    pub fn counter(&self, energies: usize) -> Result<SpectralCounter> {
        SpectralCounter::with_tags(&self.matrix, &self.tags, counter_options(energies))
    }
}

pub(crate) fn counter_options(energies: usize) -> CounterOptions {
    CounterOptions {
        dense_cache_limit: if energies > DEFAULTS.scan_threshold {
            DEFAULTS.scan_cache_limit
        } else {
            DEFAULTS.dense_cache_limit
        },
        ..CounterOptions::default()
    }
}

pub(crate) fn pick(c: SplitCount, restriction: Restriction) -> usize {
    match restriction {
        Restriction::Box => c.all,
        Restriction::Con => c.tagged,
    }
}

/// The box `Lambda_L` of one experiment size.
pub(crate) struct Volume {
    pub region: Arc<LatticeRegion>,
    pub core: SiteSet,
    pub l: u32,
}

impl Volume {
    pub fn new(params: &ExperimentParams, l: u32) -> Result<Self> {
        let region = params.region(l)?;
        let core = region.core_sites();
        Ok(Volume { region, core, l })
    }

    pub fn size(&self) -> usize {
        self.core.len()
    }

    /// Samples realization `r`; cluster tags are computed only when `labels`.
    pub fn realize(&self, params: &ExperimentParams, r: u64, labels: bool) -> Result<Realization> {
        let config = params.sample(&self.region, r);
        let matrix = assemble(&config, &params.kernel, &self.core)?;
        let tags = if labels {
            let labeling = label_clusters(&config, &params.kernel)?;
            matrix
                .sites()
                .iter()
                .map(|s| {
                    labeling
                        .cluster_of(s)
                        .is_some_and(|c| c.touches_outer_boundary)
                })
                .collect()
        } else {
            vec![false; matrix.n()]
        };
        Ok(Realization {
            matrix,
            tags,
            active_fraction: config.active_fraction(),
        })
    }
}

/// Per realization: normalized strict counts on the grid for the box and
/// (when `labels`) the boundary-connected restriction, and the active fraction.
pub(crate) fn counting_rows(
    params: &ExperimentParams,
    vol: &Volume,
    labels: bool,
) -> Result<Vec<(Vec<f64>, Vec<f64>, f64)>> {
    let size = vol.size() as f64;
    map_realizations(params.realizations, params.workers, |r| {
        let real = vol.realize(params, r, labels)?;
        let counter = real.counter(params.grid.len())?;
        let mut boxed = Vec::with_capacity(params.grid.len());
        let mut con = Vec::with_capacity(params.grid.len());
        for &e in &params.grid {
            let c = counter.count_split(e, false)?;
            boxed.push(c.all as f64 / size);
            con.push(c.tagged as f64 / size);
        }
        Ok((boxed, con, real.active_fraction))
    })
}

fn projector_rows(params: &ExperimentParams, vol: &Volume) -> Result<Vec<(Vec<f64>, f64)>> {
    let inner = vol.l as i64 - params.kernel.range() as i64;
    if inner < 0 {
        return Err(Error::invalid(
            "box has no sites farther than the hopping range from its edge",
        ));
    }
    let interior_count = (2 * inner + 1).pow(params.dim as u32) as f64;
    let labels = params.restriction == Restriction::Con;
    map_realizations(params.realizations, params.workers, |r| {
        let real = vol.realize(params, r, labels)?;
        let m = real.restricted(params.restriction);
        let spec = eigs_dense(&m, true)?;
        let mut weight = vec![0.0; m.n()];
        if let Some(v) = &spec.eigenvectors {
            for (i, s) in m.sites().iter().enumerate() {
                if s.iter().all(|&c| (c as i64).abs() <= inner) {
                    for (k, w) in weight.iter_mut().enumerate() {
                        *w += v[(i, k)] * v[(i, k)];
                    }
                }
            }
        }
        let mut prefix = vec![0.0; m.n() + 1];
        for k in 0..m.n() {
            prefix[k + 1] = prefix[k] + weight[k];
        }
        let row = params
            .grid
            .iter()
            .map(|&e| {
                let below = spec.eigenvalues.partition_point(|&l| l < e - EIGEN_TOL);
                prefix[below] / interior_count
            })
            .collect();
        Ok((row, real.active_fraction))
    })
}

/// Estimates the IDS at every grid energy over `params.realizations` boxes.
///
/// Counting normalizes strict eigenvalue counts by `|Lambda_L|`; the
/// projector estimator averages `<d_k, P(]-inf, E[) d_k>` over the sites at
/// distance more than the hopping range from the box edge.
pub fn estimate_ids(params: &ExperimentParams, estimator: Estimator) -> Result<EmpiricalIDS> {
    params.validate()?;
    let vol = Volume::new(params, params.l())?;
    let (rows, active): (Vec<Vec<f64>>, Vec<f64>) = match estimator {
        Estimator::Counting => {
            let labels = params.restriction == Restriction::Con;
            counting_rows(params, &vol, labels)?
                .into_iter()
                .map(|(b, c, a)| (if labels { c } else { b }, a))
                .unzip()
        }
        Estimator::ProjectorDiag => projector_rows(params, &vol)?.into_iter().unzip(),
    };
    Ok(EmpiricalIDS::from_rows(
        params,
        params.l(),
        params.restriction,
        estimator,
        vol.size(),
        &rows,
        &active,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::linspace;
    use crate::model::PotentialDistribution;

    #[test]
    fn free_chain_matches_cosine_spectrum() {
        let mut p = ExperimentParams::new(1, 50, PotentialDistribution::bernoulli(1.0).unwrap());
        p.grid = linspace(-2.5, 2.5, 21);
        p.realizations = 1;
        let ids = estimate_ids(&p, Estimator::Counting).unwrap();
        let n = 101;
        for (e, m) in p.grid.iter().zip(&ids.mean) {
            let exact = (1..=n)
                .filter(|&k| {
                    2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos() < *e - 1e-9
                })
                .count();
            assert_eq!(*m, exact as f64 / n as f64);
        }
    }

    #[test]
    fn estimators_agree_up_to_the_boundary_layer() {
        let mut p = ExperimentParams::new(
            2,
            6,
            PotentialDistribution::uniform(-1.0, 1.0, 0.8).unwrap(),
        );
        p.grid = linspace(-4.0, 4.0, 17);
        p.realizations = 6;
        let a = estimate_ids(&p, Estimator::Counting).unwrap();
        let b = estimate_ids(&p, Estimator::ProjectorDiag).unwrap();
        let size = 13.0 * 13.0;
        let layer = 2.0 * 13.0 * 4.0 / size;
        for k in 0..p.grid.len() {
            let se = (a.stderr[k].powi(2) + b.stderr[k].powi(2)).sqrt();
            assert!((a.mean[k] - b.mean[k]).abs() <= layer + 4.0 * se);
        }
    }

    #[test]
    fn con_restriction_is_bounded_by_box() {
        let mut p = ExperimentParams::new(2, 8, PotentialDistribution::bernoulli(0.6).unwrap());
        p.grid = linspace(-3.0, 3.0, 7);
        p.realizations = 3;
        let boxed = estimate_ids(&p, Estimator::Counting).unwrap();
        p.restriction = Restriction::Con;
        let con = estimate_ids(&p, Estimator::Counting).unwrap();
        for k in 0..p.grid.len() {
            assert!(con.mean[k] <= boxed.mean[k]);
        }
        assert!(boxed.mean.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn empty_operator() {
        let mut p = ExperimentParams::new(2, 4, PotentialDistribution::bernoulli(0.0).unwrap());
        p.realizations = 2;
        let ids = estimate_ids(&p, Estimator::Counting).unwrap();
        assert!(ids.mean.iter().all(|&m| m == 0.0));
    }
}
