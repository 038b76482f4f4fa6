use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    sample_configuration, Configuration, HoppingKernel, LatticeRegion, PotentialDistribution,
};

/// Defaults shared by every experiment; recorded in run manifests.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Defaults {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_steps: usize,
    pub windows: [f64; 5],
    pub eps: [f64; 3],
    pub realizations: usize,
    pub seed: u64,
    /// Blocks up to this size are diagonalized once per realization.
    pub dense_cache_limit: usize,
    /// Cache limit used when many energies are evaluated per realization.
    pub scan_cache_limit: usize,
    pub scan_threshold: usize,
    pub catalog_max_size: usize,
    pub catalog_match_tol: f64,
    pub nmax: usize,
}

pub const DEFAULTS: Defaults = Defaults {
    grid_lo: -5.0,
    grid_hi: 5.0,
    grid_steps: 201,
    windows: [1e-1, 1e-2, 1e-3, 1e-4, 1e-6],
    eps: [1e-2, 1e-4, 1e-8],
    realizations: 20,
    seed: 1,
    dense_cache_limit: 48,
    scan_cache_limit: 512,
    scan_threshold: 64,
    catalog_max_size: 8,
    catalog_match_tol: 1e-6,
    nmax: 30,
};

/// `steps` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restriction {
    /// All active sites of the box.
    Box,
    /// Active box sites connected to the outer boundary.
    Con,
}

impl FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Restriction::Box),
            "con" => Ok(Restriction::Con),
            _ => Err(Error::invalid(format!(
                "unknown restriction '{s}' (box|con)"
            ))),
        }
    }
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Restriction::Box => "box",
            Restriction::Con => "con",
        })
    }
}

/// An energy, with its exact value when it was given as a rational.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyPoint {
    pub value: f64,
    pub rational: Option<(i64, i64)>,
}

impl EnergyPoint {
    pub fn float(value: f64) -> Self {
        EnergyPoint {
            value,
            rational: None,
        }
    }

    pub fn rational(r: i64, s: i64) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("energy denominator must be nonzero"));
        }
        Ok(EnergyPoint {
            value: r as f64 / s as f64,
            rational: Some((r, s)),
        })
    }
}

impl FromStr for EnergyPoint {
    type Err = Error;

    /// Accepts `r/s`, plain decimals (kept exact) and other float syntax.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("cannot parse energy '{s}'"));
        if let Some((r, d)) = s.split_once('/') {
            let r: i64 = r.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return EnergyPoint::rational(r, d);
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit() || c == '.') {
            let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
            if int.len() + frac.len() <= 17 {
                let num: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
                let sign = if s.starts_with('-') { -1 } else { 1 };
                let den = 10i64.pow(frac.len() as u32);
                return Ok(EnergyPoint {
                    value,
                    rational: Some((sign * num, den)),
                });
            }
        }
        Ok(EnergyPoint::float(value))
    }
}

/// Common description of a Monte Carlo experiment.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentParams {
    pub dim: usize,
    /// Box half-widths; single-size experiments use the first.
    pub sizes: Vec<u32>,
    pub kernel: HoppingKernel,
    pub dist: PotentialDistribution,
    pub restriction: Restriction,
    pub grid: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    /// Collar width; the kernel default when absent.
    pub collar: Option<u32>,
    /// Thread cap (0: one per core). Does not affect results.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentParams {
    /// Adjacency kernel, box restriction and the default grid, M and seed.
    pub fn new(dim: usize, l: u32, dist: PotentialDistribution) -> Self {
        ExperimentParams {
            dim,
            sizes: vec![l],
            kernel: HoppingKernel::adjacency(dim),
            dist,
            restriction: Restriction::Box,
            grid: linspace(DEFAULTS.grid_lo, DEFAULTS.grid_hi, DEFAULTS.grid_steps),
            realizations: DEFAULTS.realizations,
            seed: DEFAULTS.seed,
            collar: None,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.kernel.dim() != self.dim {
            return Err(Error::invalid(
                "kernel dimension must match a positive lattice dimension",
            ));
        }
        if self.sizes.is_empty() {
            return Err(Error::invalid("at least one box size is required"));
        }
        if self.realizations == 0 {
            return Err(Error::invalid("at least one realization is required"));
        }
        if self.grid.iter().any(|e| !e.is_finite()) || self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "energy grid must be finite and strictly increasing",
            ));
        }
        if let Some(c) = self.collar {
            if c < self.kernel.range() {
                return Err(Error::invalid("collar must be at least the hopping range"));
            }
        }
        Ok(())
    }

    pub fn l(&self) -> u32 {
        self.sizes[0]
    }

    pub(crate) fn region(&self, l: u32) -> Result<Arc<LatticeRegion>> {
        let collar = self.collar.unwrap_or_else(|| self.kernel.default_collar());
        Ok(Arc::new(LatticeRegion::cube(self.dim, l, collar)?))
    }

    pub(crate) fn sample(&self, region: &Arc<LatticeRegion>, r: u64) -> Configuration {
        sample_configuration(&self.dist, region.clone(), self.seed, r)
    }

    /// Bound on `||H||` over all realizations.
    pub fn operator_norm_bound(&self) -> f64 {
        self.kernel.norm_bound() + self.dist.finite_sup_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_parsing() {
        let e: EnergyPoint = "0".parse().unwrap();
        assert_eq!(e.rational, Some((0, 1)));
        let e: EnergyPoint = "-0.25".parse().unwrap();
        assert_eq!((e.value, e.rational), (-0.25, Some((-25, 100))));
        let e: EnergyPoint = "3/2".parse().unwrap();
        assert_eq!((e.value, e.rational), (1.5, Some((3, 2))));
        let e: EnergyPoint = "1e-3".parse().unwrap();
        assert_eq!((e.value, e.rational), (1e-3, None));
        assert!("x".parse::<EnergyPoint>().is_err());
        assert!("1/0".parse::<EnergyPoint>().is_err());
    }

    #[test]
    fn grid_and_validation() {
        assert_eq!(linspace(-1.0, 1.0, 5), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let mut p = ExperimentParams::new(2, 3, PotentialDistribution::bernoulli(0.5).unwrap());
        p.validate().unwrap();
        p.grid = vec![0.0, 0.0];
        assert!(p.validate().is_err());
        p.grid = vec![0.0];
        p.realizations = 0;
        assert!(p.validate().is_err());
        assert_eq!("con".parse::<Restriction>().unwrap(), Restriction::Con);
    }
}
