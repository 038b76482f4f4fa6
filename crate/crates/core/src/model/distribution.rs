use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-site law: finite atoms, uniform density pieces, and a mass at
/// `+inf` (closed sites).
///
/// JSON form: `{"atoms":[[value,weight],...],"pieces":[[lo,hi,weight],...],"inactive":w}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PotentialDistribution {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<(f64, f64, f64)>,
    inactive: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pieces: Vec<(f64, f64, f64)>,
    #[serde(default)]
    inactive: f64,
}

impl TryFrom<RawDistribution> for PotentialDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        PotentialDistribution::new(raw.atoms, raw.pieces, raw.inactive)
    }
}

const WEIGHT_TOL: f64 = 1e-12;

impl PotentialDistribution {
    /// Zero-weight atoms and pieces are dropped.
    pub fn new(
        atoms: Vec<(f64, f64)>,
        pieces: Vec<(f64, f64, f64)>,
        inactive: f64,
    ) -> Result<Self> {
        for &(v, w) in &atoms {
            if !v.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!("bad atom ({v}, {w})")));
            }
        }
        for &(lo, hi, w) in &pieces {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) || !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!("bad piece ({lo}, {hi}, {w})")));
            }
        }
        if !inactive.is_finite() || inactive < 0.0 {
            return Err(Error::invalid(format!("bad inactive weight {inactive}")));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum::<f64>()
            + pieces.iter().map(|p| p.2).sum::<f64>()
            + inactive;
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let mut sorted: Vec<(f64, f64)> = pieces.iter().map(|p| (p.0, p.1)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = sorted.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(Error::invalid(format!(
                "pieces [{}, {}] and [{}, {}] overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(PotentialDistribution {
            atoms: atoms.into_iter().filter(|a| a.1 > 0.0).collect(),
            pieces: pieces.into_iter().filter(|p| p.2 > 0.0).collect(),
            inactive,
        })
    }

    /// `p * delta_0 + (1 - p) * delta_inf`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "percolation probability {p} outside [0, 1]"
            )));
        }
        Self::new(vec![(0.0, p)], vec![], 1.0 - p)
    }

    /// `p * Uniform[lo, hi] + (1 - p) * delta_inf`.
    pub fn uniform(lo: f64, hi: f64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "percolation probability {p} outside [0, 1]"
            )));
        }
        Self::new(vec![], vec![(lo, hi, p)], 1.0 - p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("distribution JSON: {e}")))
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[(f64, f64, f64)] {
        &self.pieces
    }

    pub fn inactive_weight(&self) -> f64 {
        self.inactive
    }

    /// Probability that a site is active.
    pub fn p(&self) -> f64 {
        1.0 - self.inactive
    }

    /// `max weight / (hi - lo)` over all pieces.
    pub fn density_sup(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(lo, hi, w)| w / (hi - lo))
            .fold(0.0, f64::max)
    }

    /// Supremum of the density restricted to the open interval `]lo, hi[`.
    pub fn density_sup_on(&self, lo: f64, hi: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|&&(a, b, _)| a < hi && b > lo)
            .map(|&(a, b, w)| w / (b - a))
            .fold(0.0, f64::max)
    }

    pub fn has_finite_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn is_atomless_on_reals(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atoms lying in the open interval `]lo, hi[`.
    pub fn atoms_in_open(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.atoms
            .iter()
            .filter(|&&(v, _)| v > lo && v < hi)
            .map(|a| a.0)
            .collect()
    }

    /// `mu(]lo, hi[)`.
    pub fn mass_in_open(&self, lo: f64, hi: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|&&(v, _)| v > lo && v < hi)
            .map(|a| a.1)
            .sum();
        let pieces: f64 = self
            .pieces
            .iter()
            .map(|&(a, b, w)| {
                let overlap = (b.min(hi) - a.max(lo)).max(0.0);
                w * overlap / (b - a)
            })
            .sum();
        atoms + pieces
    }

    /// Largest absolute finite value the law can produce.
    pub fn finite_sup_abs(&self) -> f64 {
        let a = self.atoms.iter().map(|a| a.0.abs()).fold(0.0, f64::max);
        let p = self
            .pieces
            .iter()
            .map(|p| p.0.abs().max(p.1.abs()))
            .fold(0.0, f64::max);
        a.max(p)
    }

    /// `Some(n)` when every finite value is an atom in `{0, ..., n}`.
    pub fn integer_atom_bound(&self) -> Option<u64> {
        if !self.pieces.is_empty() {
            return None;
        }
        let mut n = 0u64;
        for &(v, _) in &self.atoms {
            if v < 0.0 || v.fract() != 0.0 || v > 1e15 {
                return None;
            }
            n = n.max(v as u64);
        }
        Some(n)
    }

    /// Inverse CDF with segment order: atoms, pieces, then `+inf`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, w) in &self.atoms {
            acc += w;
            if u < acc {
                return v;
            }
        }
        for &(lo, hi, w) in &self.pieces {
            let start = acc;
            acc += w;
            if u < acc {
                let t = ((u - start) / w).clamp(0.0, 1.0);
                return lo + t * (hi - lo);
            }
        }
        if self.inactive > 0.0 {
            return f64::INFINITY;
        }
        // rounding left a sliver above the finite mass
        if let Some(&(_, hi, _)) = self.pieces.last() {
            hi
        } else if let Some(&(v, _)) = self.atoms.last() {
            v
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_basics() {
        let d = PotentialDistribution::bernoulli(0.3).unwrap();
        assert!((d.p() - 0.3).abs() < 1e-15);
        assert!(d.has_finite_atoms());
        assert_eq!(d.quantile(0.1), 0.0);
        assert_eq!(d.quantile(0.5), f64::INFINITY);
        assert_eq!(d.integer_atom_bound(), Some(0));
        // p = 0 drops the empty atom
        assert!(PotentialDistribution::bernoulli(0.0)
            .unwrap()
            .is_atomless_on_reals());
    }

    #[test]
    fn uniform_piece_quantities() {
        let d = PotentialDistribution::uniform(-1.0, 1.0, 0.7).unwrap();
        assert!((d.density_sup() - 0.35).abs() < 1e-15);
        assert!((d.mass_in_open(-10.0, 10.0) - 0.7).abs() < 1e-15);
        assert!((d.mass_in_open(0.0, 10.0) - 0.35).abs() < 1e-15);
        assert_eq!(d.density_sup_on(5.0, 6.0), 0.0);
        assert!((d.quantile(0.35) - 0.0).abs() < 1e-12);
        assert_eq!(d.quantile(0.9), f64::INFINITY);
        assert_eq!(d.integer_atom_bound(), None);
    }

    #[test]
    fn invalid_laws() {
        assert!(PotentialDistribution::new(vec![(0.0, 0.5)], vec![], 0.4).is_err());
        assert!(PotentialDistribution::new(vec![(0.0, -0.5)], vec![], 1.5).is_err());
        assert!(
            PotentialDistribution::new(vec![], vec![(0.0, 2.0, 0.5), (1.0, 3.0, 0.5)], 0.0)
                .is_err()
        );
        assert!(PotentialDistribution::new(vec![], vec![(1.0, 1.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"atoms":[[0,0.25],[2,0.25]],"pieces":[[3,4,0.25]],"inactive":0.25}"#;
        let d = PotentialDistribution::from_json_str(s).unwrap();
        assert_eq!(d.atoms().len(), 2);
        let back: PotentialDistribution =
            serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(PotentialDistribution::from_json_str(r#"{"atoms":[[0,0.5]]}"#).is_err());
    }
}
