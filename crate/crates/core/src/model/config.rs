use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::distribution::PotentialDistribution;
use super::lattice::{LatticeRegion, SiteSet};

/// Seed and realisation index a configuration was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub realization: u64,
}

/// One realisation of the potential on a region: a value in `R ∪ {+inf}` per
/// core and collar site. A site is active iff its value is finite.
#[derive(Clone, Debug)]
pub struct Configuration {
    region: Arc<LatticeRegion>,
    // indexed by the region grid; NaN marks grid points outside the region
    values: Vec<f64>,
    provenance: Option<Provenance>,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform variate in `[0, 1)` keyed by `(seed, realization, site)`.
///
/// Counter-based: the value depends only on the key, never on the order in
/// which sites are visited.
pub fn site_uniform(seed: u64, realization: u64, site: &[i32]) -> f64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    h = mix64(
        h ^ realization
            .wrapping_mul(GOLDEN)
            .wrapping_add(0x632b_e59b_d9b4_e019),
    );
    for &c in site {
        h = mix64(h.wrapping_add(GOLDEN) ^ (c as i64 as u64));
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws every site of `region` independently from `dist`.
pub fn sample_configuration(
    dist: &PotentialDistribution,
    region: Arc<LatticeRegion>,
    seed: u64,
    realization: u64,
) -> Configuration {
    let grid = region.grid();
    let mut values = vec![f64::NAN; grid.len()];
    grid.for_each(|idx, x| {
        if region.layer_at(idx).is_some() {
            values[idx] = dist.quantile(site_uniform(seed, realization, x));
        }
    });
    Configuration {
        region,
        values,
        provenance: Some(Provenance { seed, realization }),
    }
}

impl Configuration {
    /// Deterministic configuration with values given by `value_of`.
    pub fn from_fn(region: Arc<LatticeRegion>, mut value_of: impl FnMut(&[i32]) -> f64) -> Self {
        let grid = region.grid();
        let mut values = vec![f64::NAN; grid.len()];
        grid.for_each(|idx, x| {
            if region.layer_at(idx).is_some() {
                values[idx] = value_of(x);
            }
        });
        Configuration {
            region,
            values,
            provenance: None,
        }
    }

    pub fn region(&self) -> &Arc<LatticeRegion> {
        &self.region
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    /// `None` outside the region.
    pub fn value(&self, site: &[i32]) -> Option<f64> {
        if site.len() != self.region.dim() {
            return None;
        }
        let idx = self.region.grid().index(site)?;
        let v = self.values[idx];
        (!v.is_nan()).then_some(v)
    }

    pub fn is_active(&self, site: &[i32]) -> bool {
        self.value(site).is_some_and(f64::is_finite)
    }

    pub(crate) fn grid_values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of core sites that are active.
    pub fn active_fraction(&self) -> f64 {
        let core = self.region.core_count();
        if core == 0 {
            return 0.0;
        }
        let active = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, v)| v.is_finite() && self.region.layer_at(*i) == Some(0))
            .count();
        active as f64 / core as f64
    }

    pub fn active_core_sites(&self) -> SiteSet {
        let grid = self.region.grid();
        let mut coords = Vec::new();
        grid.for_each(|idx, x| {
            if self.region.layer_at(idx) == Some(0) && self.values[idx].is_finite() {
                coords.extend_from_slice(x);
            }
        });
        SiteSet::from_sorted_flat(self.region.dim(), coords)
    }

    /// Bitwise equality of the sampled values (NaN padding included).
    pub fn same_values(&self, other: &Configuration) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
