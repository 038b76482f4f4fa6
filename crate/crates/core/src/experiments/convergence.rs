use serde::Serialize;

use super::ids::{counting_rows, EmpiricalIDS, Estimator, Volume};
use super::params::{ExperimentParams, Restriction};
use crate::error::{Error, Result};

/// Box and boundary-connected IDS estimates for increasing box sizes.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub sizes: Vec<u32>,
    pub box_ids: Vec<EmpiricalIDS>,
    pub con_ids: Vec<EmpiricalIDS>,
    /// `sup_E |N_{L_{k+1}} - N_{L_k}|` for the box restriction.
    pub cauchy_box: Vec<f64>,
    pub cauchy_con: Vec<f64>,
    /// `sup_E |N^box_L - N^con_L|` per size.
    pub box_con: Vec<f64>,
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs both restrictions on shared realizations for every size in
/// `params.sizes`, in the given order.
pub fn convergence_study(params: &ExperimentParams) -> Result<ConvergenceReport> {
    params.validate()?;
    if params.sizes.len() < 2 {
        return Err(Error::invalid(
            "a convergence study needs at least two box sizes",
        ));
    }
    let mut box_ids = Vec::new();
    let mut con_ids = Vec::new();
    for &l in &params.sizes {
        let vol = Volume::new(params, l)?;
        let rows = counting_rows(params, &vol, true)?;
        let active: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let boxed: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
        let con: Vec<Vec<f64>> = rows.into_iter().map(|r| r.1).collect();
        let make = |restriction, rows: &[Vec<f64>]| {
            EmpiricalIDS::from_rows(
                params,
                l,
                restriction,
                Estimator::Counting,
                vol.size(),
                rows,
                &active,
            )
        };
        box_ids.push(make(Restriction::Box, &boxed));
        con_ids.push(make(Restriction::Con, &con));
    }
    let cauchy = |ids: &[EmpiricalIDS]| -> Vec<f64> {
        ids.windows(2)
            .map(|w| sup_diff(&w[0].mean, &w[1].mean))
            .collect()
    };
    Ok(ConvergenceReport {
        sizes: params.sizes.clone(),
        cauchy_box: cauchy(&box_ids),
        cauchy_con: cauchy(&con_ids),
        box_con: box_ids
            .iter()
            .zip(&con_ids)
            .map(|(b, c)| sup_diff(&b.mean, &c.mean))
            .collect(),
        box_ids,
        con_ids,
    })
}
