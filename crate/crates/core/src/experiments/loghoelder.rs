use serde::Serialize;

use super::ids::Volume;
use super::parallel::map_realizations;
use super::params::ExperimentParams;
use super::stats::mean_stderr;
use crate::error::{Error, Result};
use crate::spectra::{algebraic_constant, AlgebraicNumber};

#[derive(Clone, Debug, Serialize)]
pub struct LogHoelderRow {
    pub eps: f64,
    /// `C_E / log(1/eps)`.
    pub bound: f64,
    pub lhs_mean: f64,
    pub lhs_stderr: f64,
    pub lhs_max: f64,
    /// Realizations with `lhs > bound`.
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogHoelderReport {
    pub energy: f64,
    pub minpoly: Vec<i64>,
    pub denom: u64,
    /// Norm bound `||H0|| + n` used in the constant.
    pub norm: f64,
    pub c_e: f64,
    pub rows: Vec<LogHoelderRow>,
    pub realizations: usize,
    pub l: u32,
}

impl LogHoelderReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.violations == 0)
    }
}

/// Checks `N(E + eps) - N(E) <= C_E / log(1/eps)` per realization, with
/// right-continuous (inclusive) box counts normalized by `|Lambda_L|`.
pub fn log_hoelder_check(
    params: &ExperimentParams,
    energy: &AlgebraicNumber,
    eps: &[f64],
) -> Result<LogHoelderReport> {
    params.validate()?;
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::invalid("every eps must lie in (0, 1)"));
    }
    if !params.kernel.is_integer_valued() {
        return Err(Error::hypothesis(
            "log-Hölder check needs an integer kernel",
        ));
    }
    let n = params
        .dist
        .integer_atom_bound()
        .ok_or_else(|| Error::hypothesis("log-Hölder check needs finite values in {0, ..., n}"))?;
    let norm = params.kernel.norm_bound() + n as f64;
    let c_e = algebraic_constant(energy, norm)?;
    let e = energy.value();
    let vol = Volume::new(params, params.l())?;
    let size = vol.size() as f64;
    let rows = map_realizations(params.realizations, params.workers, |r| {
        let real = vol.realize(params, r, false)?;
        let counter = real.counter(eps.len() + 1)?;
        let base = counter.count(e, true)?;
        eps.iter()
            .map(|&t| Ok((counter.count(e + t, true)? - base) as f64 / size))
            .collect::<Result<Vec<f64>>>()
    })?;
    let rows = eps
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let lhs: Vec<f64> = rows.iter().map(|row| row[k]).collect();
            let bound = c_e / (1.0 / t).ln();
            let stats = mean_stderr(&lhs);
            LogHoelderRow {
                eps: t,
                bound,
                lhs_mean: stats.mean,
                lhs_stderr: stats.stderr,
                lhs_max: lhs.iter().copied().fold(0.0, f64::max),
                violations: lhs.iter().filter(|&&x| x > bound).count(),
            }
        })
        .collect();
    Ok(LogHoelderReport {
        energy: e,
        minpoly: energy.minpoly().to_vec(),
        denom: energy.denom(),
        norm,
        c_e,
        rows,
        realizations: params.realizations,
        l: params.l(),
    })
}
