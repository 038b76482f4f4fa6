use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::SymmetricOperatorMatrix;

/// Full spectrum of a symmetric matrix, ascending with multiplicity.
#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: Option<DMatrix<f64>>,
    /// Largest `|Av - lv|` over returned pairs.
    pub residual: Option<f64>,
}

/// Ascending eigenvalues of a dense symmetric matrix.
pub fn sorted_eigenvalues(a: DMatrix<f64>) -> Vec<f64> {
    match a.nrows() {
        0 => Vec::new(),
        1 => vec![a[(0, 0)]],
        _ => {
            let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    }
}

pub fn eigs_dense(a: &SymmetricOperatorMatrix, vectors: bool) -> Result<SpectrumSample> {
    let m = a.to_dense()?;
    if !vectors {
        return Ok(SpectrumSample {
            eigenvalues: sorted_eigenvalues(m),
            eigenvectors: None,
            residual: None,
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectrumSample {
            eigenvalues: Vec::new(),
            eigenvectors: Some(DMatrix::zeros(0, 0)),
            residual: Some(0.0),
        });
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut residual: f64 = 0.0;
    for (c, &l) in eigenvalues.iter().enumerate() {
        let v = vecs.column(c);
        residual = residual.max((&m * v - v * l).norm());
    }
    let limit = 1e-10 * (1.0 + a.norm_bound());
    if residual > limit {
        return Err(Error::internal(format!(
            "dense eigensolver residual {residual:e} exceeds {limit:e}"
        )));
    }
    Ok(SpectrumSample {
        eigenvalues,
        eigenvectors: Some(vecs),
        residual: Some(residual),
    })
}
