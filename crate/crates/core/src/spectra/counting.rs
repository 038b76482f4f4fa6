use super::dense::sorted_eigenvalues;
use std::cell::OnceCell;

use super::frontal::Multifrontal;
use super::ldl::{sturm_count, LdlPattern};
use crate::error::{Error, Result};
use crate::operator::SymmetricOperatorMatrix;
use crate::percolation::UnionFind;

/// Eigenvalues closer than this to the counting threshold count as equal to it.
pub const EIGEN_TOL: f64 = 1e-9;

/// Tuning for [`SpectralCounter`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterOptions {
    /// Blocks up to this dimension are diagonalized once and their spectra
    /// kept; larger blocks are factorized per energy.
    pub dense_cache_limit: usize,
    /// Largest block diagonalized as soon as the unpivoted factorization is
    /// rejected (zero pivot or excessive growth). Larger blocks are
    /// refactorized with 1x1/2x2 threshold pivoting, and only then
    /// diagonalized, up to the dense guard. Spectra computed this way are kept.
    pub dense_fallback_limit: usize,
}

impl Default for CounterOptions {
    fn default() -> Self {
        CounterOptions {
            dense_cache_limit: 1,
            dense_fallback_limit: 2048,
        }
    }
}

/// Connected components of the matrix graph, each ascending, ordered by
/// smallest row.
pub fn connected_blocks(a: &SymmetricOperatorMatrix) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut uf = UnionFind::new(n);
    for (i, j, v) in a.upper_entries() {
        if v != 0.0 {
            uf.union(i, j);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

enum Factor {
    // a path in row order: counted by the Sturm recurrence
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
    General(LdlPattern),
}

struct SparseBlock {
    matrix: SymmetricOperatorMatrix,
    factor: Factor,
    tagged: bool,
    // pivoted factorization, built when the unpivoted one is first rejected
    frontal: OnceCell<Multifrontal>,
    // spectrum, once both factorizations have been rejected
    dense: OnceCell<Vec<f64>>,
}

impl SparseBlock {
    fn new(matrix: SymmetricOperatorMatrix, tagged: bool) -> Self {
        let n = matrix.n();
        let tridiagonal =
            matrix.nnz_upper() + 1 == n && matrix.upper_entries().all(|(i, j, _)| j == i + 1);
        let factor = if tridiagonal {
            let mut off = vec![0.0; n - 1];
            for (i, _, v) in matrix.upper_entries() {
                off[i] = v;
            }
            Factor::Tridiagonal {
                diag: matrix.diag().to_vec(),
                off,
            }
        } else {
            Factor::General(LdlPattern::new(&matrix))
        };
        SparseBlock {
            matrix,
            factor,
            tagged,
            frontal: OnceCell::new(),
            dense: OnceCell::new(),
        }
    }

    fn spectrum(&self) -> Result<&[f64]> {
        if self.dense.get().is_none() {
            let ev = sorted_eigenvalues(self.matrix.to_dense()?);
            let _ = self.dense.set(ev);
        }
        Ok(self.dense.get().expect("just set"))
    }
}

/// Eigenvalue counts of the whole matrix and of its tagged blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SplitCount {
    pub all: usize,
    pub tagged: usize,
}

/// Reusable eigenvalue counter for one matrix: the matrix is split into
/// connected blocks, small blocks are diagonalized once, and larger blocks
/// are counted by the inertia of a sparse LDL^T factorization of `A - E`.
pub struct SpectralCounter {
    // merged spectra of the diagonalized blocks
    cached_all: Vec<f64>,
    cached_tagged: Vec<f64>,
    sparse: Vec<SparseBlock>,
    options: CounterOptions,
}

fn dense_count(ev: &[f64], e: f64, inclusive: bool) -> usize {
    if inclusive {
        ev.partition_point(|&l| l <= e + EIGEN_TOL)
    } else {
        ev.partition_point(|&l| l < e - EIGEN_TOL)
    }
}

impl SpectralCounter {
    pub fn new(a: &SymmetricOperatorMatrix, options: CounterOptions) -> Result<Self> {
        Self::with_tags(a, &vec![false; a.n()], options)
    }

    /// Rows carry a tag; a block counts as tagged when its first row is.
    pub fn with_tags(
        a: &SymmetricOperatorMatrix,
        tags: &[bool],
        options: CounterOptions,
    ) -> Result<Self> {
        if tags.len() != a.n() {
            return Err(Error::invalid("one tag per matrix row is required"));
        }
        if a.diag().iter().any(|d| !d.is_finite()) || a.upper_entries().any(|e| !e.2.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        let mut cached_all = Vec::new();
        let mut cached_tagged = Vec::new();
        let mut sparse = Vec::new();
        for rows in connected_blocks(a) {
            let tagged = tags[rows[0]];
            let ev = if rows.len() == 1 {
                vec![a.diag()[rows[0]]]
            } else {
                let matrix = a.submatrix(&rows);
                if rows.len() > options.dense_cache_limit {
                    sparse.push(SparseBlock::new(matrix, tagged));
                    continue;
                }
                sorted_eigenvalues(matrix.to_dense()?)
            };
            if tagged {
                cached_tagged.extend_from_slice(&ev);
            }
            cached_all.extend(ev);
        }
        cached_all.sort_by(f64::total_cmp);
        cached_tagged.sort_by(f64::total_cmp);
        Ok(SpectralCounter {
            cached_all,
            cached_tagged,
            sparse,
            options,
        })
    }

    /// Number of blocks counted by factorization.
    pub fn factorized_blocks(&self) -> usize {
        self.sparse.len()
    }

    /// Number of eigenvalues `< e`, or `<= e` when `inclusive`.
    pub fn count(&self, e: f64, inclusive: bool) -> Result<usize> {
        Ok(self.count_split(e, inclusive)?.all)
    }

    pub fn count_split(&self, e: f64, inclusive: bool) -> Result<SplitCount> {
        if !e.is_finite() {
            return Err(Error::invalid("counting energy must be finite"));
        }
        let mut out = SplitCount {
            all: dense_count(&self.cached_all, e, inclusive),
            tagged: dense_count(&self.cached_tagged, e, inclusive),
        };
        for b in &self.sparse {
            let c = self.sparse_count(b, e, inclusive)?;
            out.all += c;
            if b.tagged {
                out.tagged += c;
            }
        }
        Ok(out)
    }

    fn sparse_count(&self, b: &SparseBlock, e: f64, inclusive: bool) -> Result<usize> {
        // same semantics as the cached spectra: count at E -/+ EIGEN_TOL
        let step = if inclusive { EIGEN_TOL } else { -EIGEN_TOL };
        let pattern = match &b.factor {
            Factor::Tridiagonal { diag, off } => return Ok(sturm_count(diag, off, e + step)),
            Factor::General(pattern) => pattern,
        };
        if let Some(ev) = b.dense.get() {
            return Ok(dense_count(ev, e, inclusive));
        }
        let shift = e + step;
        let accuracy = 0.5 * EIGEN_TOL;
        let count = |(neg, pos): (usize, usize)| if inclusive { b.matrix.n() - pos } else { neg };
        if let Some(inertia) = pattern.inertia(shift, accuracy) {
            return Ok(count(inertia));
        }
        if b.matrix.n() > self.options.dense_fallback_limit {
            let frontal = b.frontal.get_or_init(|| Multifrontal::new(&b.matrix));
            if let Some(inertia) = frontal.inertia(shift, accuracy) {
                return Ok(count(inertia));
            }
        }
        Ok(dense_count(b.spectrum()?, e, inclusive))
    }
}

/// Eigenvalues of `a` below `e` (strictly, or up to and including `e`).
pub fn count_below(a: &SymmetricOperatorMatrix, e: f64, inclusive: bool) -> Result<usize> {
    SpectralCounter::new(a, CounterOptions::default())?.count(e, inclusive)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer() -> SymmetricOperatorMatrix {
        SymmetricOperatorMatrix::from_entries(vec![0.0, 0.0], &[(0, 1, 1.0)]).unwrap()
    }

    fn four_cycle() -> SymmetricOperatorMatrix {
        SymmetricOperatorMatrix::from_entries(
            vec![0.0; 4],
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(count_below(&dimer(), 0.0, false).unwrap(), 1);
        assert_eq!(count_below(&dimer(), 1.0, false).unwrap(), 1);
        assert_eq!(count_below(&dimer(), 1.0, true).unwrap(), 2);
        assert_eq!(count_below(&four_cycle(), 0.0, false).unwrap(), 1);
        assert_eq!(count_below(&four_cycle(), 0.0, true).unwrap(), 3);
        assert_eq!(count_below(&four_cycle(), 2.0, false).unwrap(), 3);
    }

    #[test]
    fn blocks_and_tags() {
        // a dimer, an isolated site and a 3-path
        let a = SymmetricOperatorMatrix::from_entries(
            vec![0.0, 0.0, 5.0, 0.0, 0.0, 0.0],
            &[(0, 1, 1.0), (3, 4, 1.0), (4, 5, 1.0)],
        )
        .unwrap();
        assert_eq!(
            connected_blocks(&a),
            vec![vec![0, 1], vec![2], vec![3, 4, 5]]
        );
        let tags = [false, false, true, true, true, true];
        for cache in [0, 1, 10] {
            let opts = CounterOptions {
                dense_cache_limit: cache,
                ..Default::default()
            };
            let c = SpectralCounter::with_tags(&a, &tags, opts).unwrap();
            assert_eq!(
                c.count_split(0.0, false).unwrap(),
                SplitCount { all: 2, tagged: 1 }
            );
            assert_eq!(
                c.count_split(0.0, true).unwrap(),
                SplitCount { all: 3, tagged: 2 }
            );
            assert_eq!(
                c.count_split(6.0, false).unwrap(),
                SplitCount { all: 6, tagged: 4 }
            );
        }
    }

    #[test]
    fn path_block_at_its_eigenvalue() {
        let n = 41;
        let off: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        let a = SymmetricOperatorMatrix::from_entries(vec![0.0; n], &off).unwrap();
        let opts = CounterOptions {
            dense_cache_limit: 0,
            dense_fallback_limit: 0,
        };
        let c = SpectralCounter::new(&a, opts).unwrap();
        // odd path: 0 is a simple eigenvalue
        assert_eq!(c.count(0.0, false).unwrap(), 20);
        assert_eq!(c.count(0.0, true).unwrap(), 21);
    }

    #[test]
    fn bipartite_grid_at_singular_energies() {
        use crate::spectra::dense::sorted_eigenvalues;
        // 25 x 25 free grid: 0 and +-1 are eigenvalues, 0 with high multiplicity
        let w = 25;
        let mut off = Vec::new();
        for y in 0..w {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    off.push((i, i + 1, 1.0));
                }
                if y + 1 < w {
                    off.push((i, i + w, 1.0));
                }
            }
        }
        let a = SymmetricOperatorMatrix::from_entries(vec![0.0; w * w], &off).unwrap();
        let ev = sorted_eigenvalues(a.to_dense().unwrap());
        for fallback in [0, 4096] {
            let opts = CounterOptions {
                dense_cache_limit: 1,
                dense_fallback_limit: fallback,
            };
            let c = SpectralCounter::new(&a, opts).unwrap();
            for e in [0.0, 1.0, -1.0, 2.0, 0.3] {
                assert_eq!(
                    c.count(e, false).unwrap(),
                    dense_count(&ev, e, false),
                    "{e}"
                );
                assert_eq!(c.count(e, true).unwrap(), dense_count(&ev, e, true), "{e}");
            }
        }
    }

    #[test]
    fn rejects_non_finite_energy() {
        assert!(count_below(&dimer(), f64::NAN, false).is_err());
    }
}
