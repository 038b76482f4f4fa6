use std::io::Write;

use super::counting::EIGEN_TOL;
use super::dense::sorted_eigenvalues;
use crate::error::{Error, Result};
use crate::model::{HoppingKernel, SiteSet};
use crate::operator::SymmetricOperatorMatrix;
use crate::percolation::SubgraphCatalog;

/// Upper limit on the number of (subgraph, potential assignment) pairs.
pub const ASSIGNMENT_GUARD: u64 = 10_000_000;

/// One distinct eigenvalue of a finite cluster Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub energy: f64,
    /// Multiplicity of the energy in the witness Hamiltonian.
    pub multiplicity: usize,
    /// Smallest cluster (first in catalog order) carrying the energy.
    pub witness: SiteSet,
    /// Potential on the witness sites, in site order.
    pub potential: Vec<f64>,
}

/// Union of spectra of all cluster Hamiltonians up to a size, deduplicated
/// within [`EIGEN_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpectrumCatalog {
    entries: Vec<CatalogEntry>,
    max_size: usize,
    atom_values: Vec<f64>,
}

/// Hamiltonian of the cluster `sites` with the given potential.
pub(crate) fn cluster_matrix(
    kernel: &HoppingKernel,
    sites: &SiteSet,
    potential: &[f64],
) -> SymmetricOperatorMatrix {
    let onsite = kernel.onsite();
    let mut off = Vec::new();
    let mut diff = vec![0i32; sites.dim()];
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            for (k, d) in diff.iter_mut().enumerate() {
                *d = sites.get(j)[k] - sites.get(i)[k];
            }
            let c = kernel.coefficient(&diff);
            if c != 0.0 {
                off.push((i, j, c));
            }
        }
    }
    let diag = potential.iter().map(|q| q + onsite).collect();
    SymmetricOperatorMatrix::from_entries(diag, &off).expect("finite cluster entries")
}

struct Candidate {
    energy: f64,
    witness: usize,
}

/// Spectra of every catalog subgraph under every assignment of `atom_values`
/// to its sites.
pub fn cluster_spectrum_catalog(
    catalog: &SubgraphCatalog,
    kernel: &HoppingKernel,
    atom_values: &[f64],
) -> Result<FiniteSpectrumCatalog> {
    if atom_values.is_empty() || atom_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "at least one finite potential value is required",
        ));
    }
    if kernel.dim() != catalog.dim() {
        return Err(Error::invalid("kernel and catalog dimensions differ"));
    }
    let mut atoms = atom_values.to_vec();
    atoms.sort_by(f64::total_cmp);
    atoms.dedup();
    let base = atoms.len() as u64;
    let mut total: u64 = 0;
    for s in 1..=catalog.max_size() {
        let per = base.checked_pow(s as u32).unwrap_or(u64::MAX);
        total = total.saturating_add(per.saturating_mul(catalog.of_size(s).len() as u64));
    }
    if total > ASSIGNMENT_GUARD {
        return Err(Error::Resource {
            what: "potential assignments",
            reached: total,
            limit: ASSIGNMENT_GUARD,
        });
    }

    let mut witnesses: Vec<(SiteSet, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut candidates = Vec::new();
    for sites in catalog.iter() {
        let s = sites.len();
        let mut digits = vec![0usize; s];
        loop {
            let potential: Vec<f64> = digits.iter().map(|&d| atoms[d]).collect();
            let ev = sorted_eigenvalues(cluster_matrix(kernel, sites, &potential).to_dense()?);
            let id = witnesses.len();
            for &e in &ev {
                candidates.push(Candidate {
                    energy: e,
                    witness: id,
                });
            }
            witnesses.push((sites.clone(), potential, ev));
            // next assignment, odometer order
            let mut k = 0;
            while k < s && digits[k] + 1 == atoms.len() {
                digits[k] = 0;
                k += 1;
            }
            if k == s {
                break;
            }
            digits[k] += 1;
        }
    }
    candidates.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.witness.cmp(&b.witness))
    });

    let mut entries = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let start = candidates[i].energy;
        let mut j = i;
        let mut best = i;
        while j < candidates.len() && candidates[j].energy - start <= EIGEN_TOL {
            if candidates[j].witness < candidates[best].witness {
                best = j;
            }
            j += 1;
        }
        let c = &candidates[best];
        let (sites, potential, ev) = &witnesses[c.witness];
        entries.push(CatalogEntry {
            energy: c.energy,
            multiplicity: ev
                .iter()
                .filter(|&&l| (l - c.energy).abs() <= EIGEN_TOL)
                .count(),
            witness: sites.clone(),
            potential: potential.clone(),
        });
        i = j;
    }
    Ok(FiniteSpectrumCatalog {
        entries,
        max_size: catalog.max_size(),
        atom_values: atoms,
    })
}

impl FiniteSpectrumCatalog {
    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn energies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn atom_values(&self) -> &[f64] {
        &self.atom_values
    }

    /// Closest catalog entry and its distance to `e`.
    pub fn nearest(&self, e: f64) -> Option<(&CatalogEntry, f64)> {
        let k = self.entries.partition_point(|x| x.energy < e);
        [k.checked_sub(1), Some(k)]
            .into_iter()
            .flatten()
            .filter_map(|i| self.entries.get(i))
            .map(|x| (x, (x.energy - e).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Smallest distance between consecutive distinct energies.
    pub fn min_gap(&self) -> Option<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .reduce(f64::min)
    }

    /// CSV with columns `energy,multiplicity,witness_size,witness_sites`;
    /// sites are `;`-separated with space-separated coordinates.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::internal(format!("writing catalog: {e}"));
        w.write_record(["energy", "multiplicity", "witness_size", "witness_sites"])
            .map_err(io)?;
        for e in &self.entries {
            let sites: Vec<String> = e
                .witness
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|c| c.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            w.write_record([
                format!("{:.15e}", e.energy),
                e.multiplicity.to_string(),
                e.witness.len().to_string(),
                sites.join(";"),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::internal(format!("writing catalog: {e}")))?;
        Ok(())
    }
}
