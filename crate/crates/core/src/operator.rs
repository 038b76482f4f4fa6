//! Finite-volume Hamiltonians `H^G = q + H0` restricted to a site set.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{Configuration, HoppingKernel, SiteSet};

/// Largest dimension accepted by dense conversions.
pub const DENSE_GUARD: usize = 8192;

/// Sparse symmetric matrix indexed by lattice sites. Off-diagonal entries are
/// stored once, in the strict upper triangle, row-compressed.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricOperatorMatrix {
    sites: SiteSet,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    exact: bool,
    box_size: usize,
}

/// Assembles `H^G` on the active sites of `sites`.
///
/// Diagonal entries are `q_k + c(0)`; the entry for a pair of active sites
/// `k, j` is `c(j - k)`. Closed sites are dropped.
pub fn assemble(
    config: &Configuration,
    kernel: &HoppingKernel,
    sites: &SiteSet,
) -> Result<SymmetricOperatorMatrix> {
    let region = config.region();
    if kernel.dim() != region.dim() || sites.dim() != region.dim() {
        return Err(Error::invalid(
            "dimension mismatch between sites, kernel and region",
        ));
    }
    let mut coords = Vec::new();
    let mut diag = Vec::new();
    let onsite = kernel.onsite();
    for s in sites.iter() {
        let q = config.value(s).ok_or_else(|| {
            Error::Precondition(format!("site {s:?} lies outside the sampled region"))
        })?;
        if q.is_finite() {
            coords.extend_from_slice(s);
            diag.push(q + onsite);
        }
    }
    let rows = SiteSet::from_sorted_flat(region.dim(), coords);
    let hops: Vec<(&[i32], f64)> = kernel.forward_hops().collect();
    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    let mut y = vec![0i32; region.dim()];
    let mut row_entries: Vec<(u32, f64)> = Vec::new();
    for (i, x) in rows.iter().enumerate() {
        row_entries.clear();
        for &(v, c) in &hops {
            for k in 0..x.len() {
                y[k] = x[k] + v[k];
            }
            if let Some(j) = rows.index_of(&y) {
                row_entries.push((j as u32, c));
            }
        }
        debug_assert!(row_entries.iter().all(|&(j, _)| j as usize > i));
        row_entries.sort_by_key(|e| e.0);
        for &(j, c) in &row_entries {
            cols.push(j);
            vals.push(c);
        }
        row_ptr.push(cols.len());
    }
    let exact = kernel.is_integer_valued() && diag.iter().all(|d| d.fract() == 0.0);
    Ok(SymmetricOperatorMatrix {
        sites: rows,
        diag,
        row_ptr,
        cols,
        vals,
        exact,
        box_size: region.core_count(),
    })
}

impl SymmetricOperatorMatrix {
    /// Builds a matrix from explicit entries. Rows are labelled by the
    /// one-dimensional sites `0..n` and the box size is `n`. Pairs may be given
    /// in either order; repeated pairs are summed.
    pub fn from_entries(diag: Vec<f64>, offdiag: &[(usize, usize, f64)]) -> Result<Self> {
        let n = diag.len();
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(offdiag.len());
        for &(i, j, v) in offdiag {
            if i >= n || j >= n || i == j {
                return Err(Error::invalid(format!(
                    "bad off-diagonal position ({i}, {j})"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid("matrix entries must be finite"));
            }
            upper.push((i.min(j), i.max(j), v));
        }
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        upper.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &(i, j, v) in &upper {
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((i, j));
            cols.push(j as u32);
            vals.push(v);
            row_ptr[i + 1] = cols.len();
        }
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i + 1].max(row_ptr[i]);
        }
        let exact = diag.iter().chain(&vals).all(|v| v.fract() == 0.0);
        let sites = SiteSet::from_sorted_flat(1, (0..n as i32).collect());
        Ok(SymmetricOperatorMatrix {
            sites,
            diag,
            row_ptr,
            cols,
            vals,
            exact,
            box_size: n,
        })
    }

    /// Symmetrizes the upper triangle of a dense matrix.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::invalid("matrix must be square"));
        }
        let n = a.nrows();
        let mut off = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if a[(i, j)] != 0.0 {
                    off.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_entries((0..n).map(|i| a[(i, i)]).collect(), &off)
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn box_size(&self) -> usize {
        self.box_size
    }

    pub fn with_box_size(mut self, box_size: usize) -> Self {
        self.box_size = box_size;
        self
    }

    /// Every entry is an integer.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Strict-upper entries `(j, value)` of row `i`, `j > i` ascending.
    pub fn upper_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&j, &v)| (j as usize, v))
    }

    /// All strict-upper entries `(i, j, value)`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |i| self.upper_row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn nnz_upper(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let (a, b) = (i.min(j), i.max(j));
        let r = self.row_ptr[a]..self.row_ptr[a + 1];
        match self.cols[r.clone()].binary_search(&(b as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// Maximal absolute row sum, an upper bound for the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut rows: Vec<f64> = self.diag.iter().map(|d| d.abs()).collect();
        for (i, j, v) in self.upper_entries() {
            rows[i] += v.abs();
            rows[j] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for (i, j, v) in self.upper_entries() {
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        if n > DENSE_GUARD {
            return Err(Error::Resource {
                what: "dense matrix dimension",
                reached: n as u64,
                limit: DENSE_GUARD as u64,
            });
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
        }
        for (i, j, v) in self.upper_entries() {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        Ok(a)
    }

    /// Principal submatrix on the given rows (ascending, distinct).
    pub fn submatrix(&self, rows: &[usize]) -> SymmetricOperatorMatrix {
        let dim = self.sites.dim();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        let mut diag = Vec::with_capacity(rows.len());
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &r in rows {
            coords.extend_from_slice(self.sites.get(r));
            diag.push(self.diag[r]);
            for (j, v) in self.upper_row(r) {
                if let Ok(nj) = rows.binary_search(&j) {
                    cols.push(nj as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let exact = self.exact || diag.iter().chain(&vals).all(|v| v.fract() == 0.0);
        SymmetricOperatorMatrix {
            sites: SiteSet::from_sorted_flat(dim, coords),
            diag,
            row_ptr,
            cols,
            vals,
            exact,
            box_size: self.box_size,
        }
    }

    /// Deletes the row and column of `site`.
    pub fn remove_site(&self, site: &[i32]) -> Result<SymmetricOperatorMatrix> {
        let k = self
            .sites
            .index_of(site)
            .ok_or_else(|| Error::invalid(format!("site {site:?} is not a row of the matrix")))?;
        let rows: Vec<usize> = (0..self.n()).filter(|&i| i != k).collect();
        Ok(self.submatrix(&rows))
    }

    /// Integer copy of the entries for exact routines.
    pub fn exact_entries(&self) -> Result<(Vec<i64>, Vec<(usize, usize, i64)>)> {
        let as_int = |v: f64| -> Result<i64> {
            if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
                Err(Error::invalid(format!("entry {v} is not an exact integer")))
            } else {
                Ok(v as i64)
            }
        };
        let diag = self
            .diag
            .iter()
            .map(|&d| as_int(d))
            .collect::<Result<_>>()?;
        let off = self
            .upper_entries()
            .map(|(i, j, v)| Ok((i, j, as_int(v)?)))
            .collect::<Result<_>>()?;
        Ok((diag, off))
    }

    /// Symmetric coordinate text: a header `n box_size`, then one `i j value`
    /// line per stored entry (`i <= j`).
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n(), self.box_size).unwrap();
        for i in 0..self.n() {
            writeln!(out, "{i} {i} {}", self.diag[i]).unwrap();
            for (j, v) in self.upper_row(i) {
                writeln!(out, "{i} {j} {v}").unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatticeRegion;
    use std::sync::Arc;

    fn zero_config(dim: usize, l: u32) -> Configuration {
        Configuration::from_fn(Arc::new(LatticeRegion::cube(dim, l, 2).unwrap()), |_| 0.0)
    }

    fn sites(dim: usize, s: &[&[i32]]) -> SiteSet {
        SiteSet::new(dim, s.iter().copied()).unwrap()
    }

    #[test]
    fn dimer() {
        let a = assemble(
            &zero_config(1, 2),
            &HoppingKernel::adjacency(1),
            &sites(1, &[&[0], &[1]]),
        )
        .unwrap();
        assert_eq!(
            a.to_dense().unwrap(),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        assert!(a.is_exact());
        assert_eq!(a.box_size(), 5);
    }

    #[test]
    fn square_block_is_a_four_cycle() {
        let s = sites(2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]);
        let a = assemble(&zero_config(2, 2), &HoppingKernel::adjacency(2), &s).unwrap();
        let d = a.to_dense().unwrap();
        for i in 0..4 {
            assert_eq!(d.row(i).sum(), 2.0);
            assert_eq!(d[(i, i)], 0.0);
        }
        assert_eq!(d[(0, 3)], 0.0);
        assert_eq!(d[(1, 2)], 0.0);
    }

    #[test]
    fn closed_site_is_omitted() {
        let region = Arc::new(LatticeRegion::cube(1, 3, 2).unwrap());
        let config =
            Configuration::from_fn(
                region.clone(),
                |x| {
                    if x[0] == 1 {
                        f64::INFINITY
                    } else {
                        0.5
                    }
                },
            );
        let a = assemble(&config, &HoppingKernel::adjacency(1), &region.core_sites()).unwrap();
        assert_eq!(a.n(), 6);
        assert!(!a.sites().contains(&[1]));
        assert!(!a.is_exact());
        assert_eq!(
            a.get(
                a.sites().index_of(&[0]).unwrap(),
                a.sites().index_of(&[2]).unwrap()
            ),
            0.0
        );
    }

    #[test]
    fn outside_site_is_rejected() {
        let err = assemble(
            &zero_config(1, 1),
            &HoppingKernel::adjacency(1),
            &sites(1, &[&[9]]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn restriction_consistency() {
        use crate::model::{sample_configuration, PotentialDistribution};
        let dist = PotentialDistribution::new(vec![(0.0, 0.3), (1.0, 0.3)], vec![], 0.4).unwrap();
        let region = Arc::new(LatticeRegion::cube(2, 4, 2).unwrap());
        let kernel = HoppingKernel::adjacency(2);
        let config = sample_configuration(&dist, region.clone(), 5, 0);
        let full = assemble(&config, &kernel, &region.core_sites()).unwrap();
        let site = full.sites().get(full.n() / 2).to_vec();
        let removed = full.remove_site(&site).unwrap();
        let rest = region
            .core_sites()
            .difference(&SiteSet::new(2, [&site]).unwrap());
        assert_eq!(removed, assemble(&config, &kernel, &rest).unwrap());
    }

    #[test]
    fn path_spectrum() {
        let n = 9;
        let a = assemble(
            &zero_config(1, 4),
            &HoppingKernel::adjacency(1),
            &zero_config(1, 4).region().core_sites(),
        )
        .unwrap();
        assert_eq!(a.n(), n);
        let mut ev: Vec<f64> = a
            .to_dense()
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        let mut expect: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (x, y) in ev.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a.norm_bound() <= HoppingKernel::adjacency(1).norm_bound());
    }

    #[test]
    fn entries_round_trip() {
        let a = SymmetricOperatorMatrix::from_entries(
            vec![1.0, 2.0, 3.0],
            &[(2, 0, -1.0), (0, 1, 4.0)],
        )
        .unwrap();
        assert_eq!(a.get(0, 2), -1.0);
        assert_eq!(a.get(2, 0), -1.0);
        assert_eq!(a.get(1, 2), 0.0);
        assert_eq!(
            SymmetricOperatorMatrix::from_dense(&a.to_dense().unwrap()).unwrap(),
            a
        );
        assert_eq!(a.apply(&[1.0, 0.0, 0.0]), vec![1.0, 4.0, -1.0]);
        assert_eq!(
            a.to_coordinate_text(),
            "3 3\n0 0 1\n0 1 4\n0 2 -1\n1 1 2\n2 2 3\n"
        );
        let (d, off) = a.exact_entries().unwrap();
        assert_eq!(d, vec![1, 2, 3]);
        assert_eq!(off, vec![(0, 1, 4), (0, 2, -1)]);
    }
}
