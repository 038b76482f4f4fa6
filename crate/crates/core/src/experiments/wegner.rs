use serde::Serialize;

use super::ids::Volume;
use super::parallel::map_realizations;
use super::params::ExperimentParams;
use super::stats::{mean_stderr, MeanStderr};
use crate::error::{Error, Result};
use crate::model::{HoppingKernel, PotentialDistribution};

/// Ingredients and value of the Wegner constant for one interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WegnerConstant {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
    /// Distance from `I` to the complement of `]a, b[`.
    pub delta: f64,
    pub s_minus: f64,
    pub s_plus: f64,
    /// Density supremum on `]a + s_-, b + s_+[`.
    pub density_sup: f64,
    /// `mu(]a + s_-, b + s_+[)`.
    pub window_mass: f64,
    pub constant: f64,
}

/// `C = 2^(d+2) ((b - a + s_+ - s_- + 1) / delta)^2 ||f||_inf / mu(]a + s_-, b + s_+[)`
/// for `I = [lo, hi]`, with `s_-/+ = -/+ ||H0||`.
pub fn wegner_constant(
    dim: usize,
    kernel: &HoppingKernel,
    dist: &PotentialDistribution,
    (lo, hi): (f64, f64),
    a: f64,
    b: f64,
) -> Result<WegnerConstant> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(
            "need a finite interval lo < hi and finite a, b",
        ));
    }
    let delta = (lo - a).min(b - hi);
    if !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "interval [{lo}, {hi}] must lie at positive distance inside ]{a}, {b}["
        )));
    }
    let s_plus = kernel.norm_bound();
    let s_minus = -s_plus;
    let (wlo, whi) = (a + s_minus, b + s_plus);
    if let Some(x) = dist.atoms_in_open(wlo, whi).first() {
        return Err(Error::hypothesis(format!(
            "atom at {x} inside the absolutely continuous window ]{wlo}, {whi}["
        )));
    }
    let window_mass = dist.mass_in_open(wlo, whi);
    if !(window_mass > 0.0) {
        return Err(Error::hypothesis(format!(
            "the law gives no mass to ]{wlo}, {whi}["
        )));
    }
    let density_sup = dist.density_sup_on(wlo, whi);
    let ratio = (b - a + s_plus - s_minus + 1.0) / delta;
    let constant = 2f64.powi(dim as i32 + 2) * ratio * ratio * density_sup / window_mass;
    Ok(WegnerConstant {
        lo,
        hi,
        a,
        b,
        delta,
        s_minus,
        s_plus,
        density_sup,
        window_mass,
        constant,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WegnerReport {
    #[serde(flatten)]
    pub constant: WegnerConstant,
    /// Eigenvalues of the box operator in `[lo, hi]`.
    pub lhs: MeanStderr,
    /// `lhs / (|I| |Lambda_L|)`.
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub realizations: usize,
    pub l: u32,
}

impl WegnerReport {
    pub fn holds(&self) -> bool {
        self.ratio <= self.constant.constant
    }
}

/// Estimates the expected number of box eigenvalues in each interval and
/// compares it with the Wegner bound.
pub fn wegner_experiment(
    params: &ExperimentParams,
    intervals: &[(f64, f64)],
    a: f64,
    b: f64,
) -> Result<Vec<WegnerReport>> {
    params.validate()?;
    if intervals.is_empty() {
        return Err(Error::invalid("at least one interval is required"));
    }
    let constants = intervals
        .iter()
        .map(|&i| wegner_constant(params.dim, &params.kernel, &params.dist, i, a, b))
        .collect::<Result<Vec<_>>>()?;
    let vol = Volume::new(params, params.l())?;
    let rows = map_realizations(params.realizations, params.workers, |r| {
        let real = vol.realize(params, r, false)?;
        let counter = real.counter(2 * intervals.len())?;
        intervals
            .iter()
            .map(|&(lo, hi)| Ok((counter.count(hi, true)? - counter.count(lo, false)?) as f64))
            .collect::<Result<Vec<f64>>>()
    })?;
    let size = vol.size() as f64;
    Ok(constants
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let lhs = mean_stderr(&rows.iter().map(|row| row[k]).collect::<Vec<_>>());
            let norm = (c.hi - c.lo) * size;
            WegnerReport {
                constant: c,
                lhs,
                ratio: lhs.mean / norm,
                ratio_stderr: lhs.stderr / norm,
                realizations: params.realizations,
                l: params.l(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> PotentialDistribution {
        PotentialDistribution::uniform(-1.0, 1.0, 0.7).unwrap()
    }

    #[test]
    fn worked_constant() {
        let k = HoppingKernel::adjacency(2);
        let c = wegner_constant(2, &k, &law(), (-0.5, 0.5), -6.0, 6.0).unwrap();
        assert_eq!(c.delta, 5.5);
        assert_eq!((c.s_minus, c.s_plus), (-4.0, 4.0));
        let expected = 16.0 * (21.0f64 / 5.5).powi(2) * 0.35 / 0.7;
        assert!((c.constant - expected).abs() < 1e-12);
        assert!((c.constant - 116.6).abs() < 0.05);
    }

    #[test]
    fn hypothesis_and_input_errors() {
        let k = HoppingKernel::adjacency(2);
        let atom =
            PotentialDistribution::new(vec![(0.0, 0.5)], vec![(-1.0, 1.0, 0.5)], 0.0).unwrap();
        assert!(matches!(
            wegner_constant(2, &k, &atom, (-0.5, 0.5), -6.0, 6.0),
            Err(Error::Hypothesis(_))
        ));
        // the atom at 20 lies outside ]-10, 10[
        let far =
            PotentialDistribution::new(vec![(20.0, 0.5)], vec![(-1.0, 1.0, 0.5)], 0.0).unwrap();
        assert!(wegner_constant(2, &k, &far, (-0.5, 0.5), -6.0, 6.0).is_ok());
        assert!(wegner_constant(2, &k, &law(), (-0.5, 6.0), -6.0, 6.0).is_err());
        let closed = PotentialDistribution::bernoulli(0.0).unwrap();
        assert!(matches!(
            wegner_constant(2, &k, &closed, (-0.5, 0.5), -6.0, 6.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn small_run_satisfies_bound() {
        let mut p = ExperimentParams::new(2, 6, law());
        p.realizations = 5;
        let r = wegner_experiment(&p, &[(-0.5, 0.5), (-0.25, 0.25)], -6.0, 6.0).unwrap();
        assert!(r.iter().all(WegnerReport::holds));
        assert!(r[0].lhs.mean >= r[1].lhs.mean);
    }
}
