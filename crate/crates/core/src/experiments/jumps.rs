use serde::Serialize;

use super::ids::{pick, Volume};
use super::parallel::map_realizations;
use super::params::{EnergyPoint, ExperimentParams, Restriction, DEFAULTS};
use super::stats::{columns, mean_stderr, MeanStderr};
use crate::error::{Error, Result};
use crate::spectra::{kernel_dim_exact, FiniteSpectrumCatalog};

/// Nearest catalog energy to a probed energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatalogMatch {
    pub energy: f64,
    pub distance: f64,
}

/// Jump of the IDS at one energy: eigenvalues in `[E - w, E + w]` per box
/// site, for each window half-width `w`.
#[derive(Clone, Debug, Serialize)]
pub struct JumpEstimate {
    pub energy: f64,
    pub rational: Option<(i64, i64)>,
    pub windows: Vec<f64>,
    pub jump: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean of `dim ker(H - E) / |Lambda_L|`, when `E` is rational and the
    /// operator has integer entries.
    pub exact: Option<MeanStderr>,
    pub catalog_match: Option<CatalogMatch>,
    pub realizations: usize,
    pub l: u32,
    pub restriction: Restriction,
}

impl JumpEstimate {
    pub fn max_jump(&self) -> f64 {
        self.jump.iter().copied().fold(0.0, f64::max)
    }

    /// The exact value when available, otherwise the narrowest window.
    pub fn best(&self) -> f64 {
        match self.exact {
            Some(x) => x.mean,
            None => self.smallest_window().0,
        }
    }

    /// `(jump, stderr)` at the narrowest window.
    pub fn smallest_window(&self) -> (f64, f64) {
        let k = (0..self.windows.len())
            .min_by(|&a, &b| self.windows[a].total_cmp(&self.windows[b]))
            .expect("at least one window");
        (self.jump[k], self.stderr[k])
    }
}

pub fn ids_jump(
    params: &ExperimentParams,
    energy: EnergyPoint,
    windows: &[f64],
    catalog: Option<&FiniteSpectrumCatalog>,
) -> Result<JumpEstimate> {
    Ok(ids_jumps(params, &[energy], windows, catalog)?.remove(0))
}

/// Jump estimates at several energies sharing the same realizations.
pub fn ids_jumps(
    params: &ExperimentParams,
    energies: &[EnergyPoint],
    windows: &[f64],
    catalog: Option<&FiniteSpectrumCatalog>,
) -> Result<Vec<JumpEstimate>> {
    params.validate()?;
    if energies.is_empty() || windows.is_empty() {
        return Err(Error::invalid(
            "at least one energy and one window are required",
        ));
    }
    if windows.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::invalid("window half-widths must be positive"));
    }
    let margin = params.operator_norm_bound() + 1.0;
    if let Some(e) = energies.iter().find(|e| !(e.value.abs() <= margin)) {
        return Err(Error::invalid(format!(
            "energy {} lies outside [-{margin}, {margin}]",
            e.value
        )));
    }
    let vol = Volume::new(params, params.l())?;
    let size = vol.size() as f64;
    let restriction = params.restriction;
    let labels = restriction == Restriction::Con;
    let probes = energies.len() * windows.len() * 2;
    let per_realization = map_realizations(params.realizations, params.workers, |r| {
        let real = vol.realize(params, r, labels)?;
        let counter = real.counter(probes)?;
        let exact_matrix = if real.matrix.is_exact() {
            Some(real.restricted(restriction))
        } else {
            None
        };
        let mut jumps = Vec::with_capacity(energies.len());
        let mut exact = Vec::with_capacity(energies.len());
        for e in energies {
            let mut row = Vec::with_capacity(windows.len());
            for &w in windows {
                let hi = pick(counter.count_split(e.value + w, true)?, restriction);
                let lo = pick(counter.count_split(e.value - w, false)?, restriction);
                row.push(hi.saturating_sub(lo) as f64 / size);
            }
            jumps.push(row);
            let x = match (&exact_matrix, e.rational) {
                (Some(m), Some((num, den))) => match kernel_dim_exact(m, num, den) {
                    Ok(k) => Some(k as f64 / size),
                    Err(Error::Resource { .. }) => None,
                    Err(err) => return Err(err),
                },
                _ => None,
            };
            exact.push(x);
        }
        Ok((jumps, exact))
    })?;
    let mut out = Vec::with_capacity(energies.len());
    for (i, e) in energies.iter().enumerate() {
        let rows: Vec<Vec<f64>> = per_realization.iter().map(|(j, _)| j[i].clone()).collect();
        let stats = columns(&rows);
        let exact: Option<Vec<f64>> = per_realization.iter().map(|(_, x)| x[i]).collect();
        let catalog_match = catalog
            .and_then(|c| c.nearest(e.value))
            .and_then(|(entry, d)| {
                (d <= DEFAULTS.catalog_match_tol).then_some(CatalogMatch {
                    energy: entry.energy,
                    distance: d,
                })
            });
        out.push(JumpEstimate {
            energy: e.value,
            rational: e.rational,
            windows: windows.to_vec(),
            jump: stats.iter().map(|s| s.mean).collect(),
            stderr: stats.iter().map(|s| s.stderr).collect(),
            exact: exact.map(|x| mean_stderr(&x)),
            catalog_match,
            realizations: params.realizations,
            l: params.l(),
            restriction,
        });
    }
    Ok(out)
}

/// Jump estimates for a law without atoms on the reals, where the IDS is
/// continuous and every estimate should vanish as windows shrink.
pub fn continuity_probe(
    params: &ExperimentParams,
    energies: &[f64],
    windows: &[f64],
) -> Result<Vec<JumpEstimate>> {
    if params.dist.has_finite_atoms() {
        return Err(Error::hypothesis(
            "continuity probe needs a distribution without finite atoms",
        ));
    }
    let points: Vec<EnergyPoint> = energies.iter().map(|&e| EnergyPoint::float(e)).collect();
    ids_jumps(params, &points, windows, None)
}
