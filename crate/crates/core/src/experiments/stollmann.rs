use serde::Serialize;

use super::parallel::map_realizations;
use super::stats::{mean_stderr, MeanStderr};
use crate::error::{Error, Result};
use crate::model::{site_uniform, HoppingKernel, SiteSet};
use crate::spectra::{cluster_matrix, sorted_eigenvalues};

#[derive(Clone, Debug, Serialize)]
pub struct StollmannRow {
    pub lo: f64,
    pub hi: f64,
    /// Estimate of `P(E_n in [lo, hi])`.
    pub probability: MeanStderr,
    /// `|sites| * |I|`, the bound for uniform `[0, 1]` potentials.
    pub bound: f64,
}

/// Probability that the `index`-th eigenvalue (1-based, ascending) of the
/// cluster operator on `sites`, with independent `Uniform[0, 1]` potentials,
/// falls in each interval.
pub fn stollmann_probe(
    kernel: &HoppingKernel,
    sites: &SiteSet,
    index: usize,
    intervals: &[(f64, f64)],
    realizations: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<StollmannRow>> {
    if sites.is_empty() || !(1..=sites.len()).contains(&index) {
        return Err(Error::invalid("eigenvalue index must lie in 1..=|sites|"));
    }
    if realizations == 0 || intervals.iter().any(|&(lo, hi)| !(lo <= hi)) {
        return Err(Error::invalid(
            "need realizations >= 1 and intervals with lo <= hi",
        ));
    }
    let hits = map_realizations(realizations, workers, |r| {
        let q: Vec<f64> = sites.iter().map(|s| site_uniform(seed, r, s)).collect();
        let phi = sorted_eigenvalues(cluster_matrix(kernel, sites, &q).to_dense()?)[index - 1];
        Ok(intervals
            .iter()
            .map(|&(lo, hi)| f64::from(u8::from(lo <= phi && phi <= hi)))
            .collect::<Vec<f64>>())
    })?;
    Ok(intervals
        .iter()
        .enumerate()
        .map(|(k, &(lo, hi))| StollmannRow {
            lo,
            hi,
            probability: mean_stderr(&hits.iter().map(|h| h[k]).collect::<Vec<_>>()),
            bound: sites.len() as f64 * (hi - lo),
        })
        .collect())
}
