//! Unpivoted sparse LDL^T of `A - sI` for inertia counting. The symbolic
//! analysis (ordering, elimination tree, column counts) is done once per
//! matrix and reused for every shift.

use std::ops::Range;

use crate::operator::SymmetricOperatorMatrix;

const NONE: usize = usize::MAX;
const LEAF: usize = 64;

pub(crate) struct LdlPattern {
    n: usize,
    // permuted upper triangle, column-compressed, diagonal excluded
    ap: Vec<usize>,
    ai: Vec<u32>,
    ax: Vec<f64>,
    diag: Vec<f64>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    scale: f64,
}

impl LdlPattern {
    pub(crate) fn new(a: &SymmetricOperatorMatrix) -> Self {
        let n = a.n();
        let (perm, _) = nested_dissection(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut counts = vec![0usize; n + 1];
        for (i, j, _) in a.upper_entries() {
            counts[inv[i].max(inv[j]) + 1] += 1;
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let ap = counts.clone();
        let mut next = counts;
        let mut ai = vec![0u32; a.nnz_upper()];
        let mut ax = vec![0.0; a.nnz_upper()];
        for (i, j, v) in a.upper_entries() {
            let (lo, hi) = (inv[i].min(inv[j]), inv[i].max(inv[j]));
            ai[next[hi]] = lo as u32;
            ax[next[hi]] = v;
            next[hi] += 1;
        }
        let diag: Vec<f64> = perm.iter().map(|&old| a.diag()[old]).collect();

        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for p in ap[j]..ap[j + 1] {
                let mut i = ai[p] as usize;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        LdlPattern {
            n,
            ap,
            ai,
            ax,
            diag,
            etree,
            lp,
            scale: a.norm_bound().max(1.0),
        }
    }

    #[cfg(test)]
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    #[cfg(test)]
    pub(crate) fn fill(&self) -> usize {
        self.lp[self.n]
    }

    /// Negative and positive pivot counts of `A - shift I`.
    ///
    /// `None` when a pivot is within tolerance of zero or when the backward
    /// error scale `eps * max_k (|L||D||L^T|)_kk` exceeds `accuracy`.
    pub(crate) fn inertia(&self, shift: f64, accuracy: f64) -> Option<(usize, usize)> {
        let n = self.n;
        let tol = 1e-12 * self.scale.max(shift.abs());
        let nnz = self.lp[n];
        let mut li = vec![0u32; nnz];
        let mut lx = vec![0.0f64; nnz];
        let mut d = vec![0.0f64; n];
        let mut y = vec![0.0f64; n];
        let mut marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut next_in_col: Vec<usize> = self.lp[..n].to_vec();
        let (mut neg, mut pos) = (0, 0);
        let mut growth = 0.0f64;
        for k in 0..n {
            d[k] = self.diag[k] - shift;
            let mut m_kk = 0.0;
            let mut nnz_y = 0;
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p] as usize;
                y[b] = self.ax[p];
                if marked[b] {
                    continue;
                }
                // walk up the elimination tree to find the row pattern
                marked[b] = true;
                stack[0] = b;
                let mut depth = 1;
                let mut t = self.etree[b];
                while t != NONE && t < k {
                    if marked[t] {
                        break;
                    }
                    marked[t] = true;
                    stack[depth] = t;
                    depth += 1;
                    t = self.etree[t];
                }
                while depth > 0 {
                    depth -= 1;
                    y_idx[nnz_y] = stack[depth];
                    nnz_y += 1;
                }
            }
            for idx in (0..nnz_y).rev() {
                let c = y_idx[idx];
                let yc = y[c];
                let end = next_in_col[c];
                for q in self.lp[c]..end {
                    y[li[q] as usize] -= lx[q] * yc;
                }
                let l = yc / d[c];
                m_kk += l * l * d[c].abs();
                li[end] = k as u32;
                lx[end] = l;
                d[k] -= yc * l;
                next_in_col[c] += 1;
                y[c] = 0.0;
                marked[c] = false;
            }
            if d[k].abs() <= tol || !d[k].is_finite() {
                return None;
            }
            growth = growth.max(m_kk + d[k].abs());
            if d[k] < 0.0 {
                neg += 1;
            } else {
                pos += 1;
            }
        }
        if f64::EPSILON * growth > accuracy {
            return None;
        }
        Some((neg, pos))
    }
}

/// Number of eigenvalues below `shift` of the symmetric tridiagonal matrix
/// with diagonal `diag` and off-diagonal `off`, by the Sturm recurrence.
/// Zero pivots are replaced by a tiny negative value.
pub(crate) fn sturm_count(diag: &[f64], off: &[f64], shift: f64) -> usize {
    let bmax = off.iter().map(|b| b * b).fold(1.0f64, f64::max);
    let pivmin = f64::MIN_POSITIVE * bmax;
    let mut neg = 0;
    let mut d = 1.0;
    for (k, &a) in diag.iter().enumerate() {
        d = a
            - shift
            - if k == 0 {
                0.0
            } else {
                off[k - 1] * off[k - 1] / d
            };
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            neg += 1;
        }
    }
    neg
}

/// A node of the dissection tree: the positions it eliminates and its
/// children, which come earlier in the list.
#[derive(Clone, Debug)]
pub(crate) struct TreeNode {
    pub(crate) vars: Range<usize>,
    pub(crate) children: Vec<usize>,
}

/// Fill-reducing elimination order from site coordinates: recursive
/// bisection by slabs whose width is the largest coordinate jump of any
/// stored entry along the cut axis, separators ordered last. Returns the
/// order (position to row) and the dissection tree in postorder; the root
/// is last.
pub(crate) fn nested_dissection(a: &SymmetricOperatorMatrix) -> (Vec<usize>, Vec<TreeNode>) {
    let n = a.n();
    let dim = a.sites().dim();
    let mut reach = vec![0i32; dim];
    for (i, j, _) in a.upper_entries() {
        let (x, y) = (a.sites().get(i), a.sites().get(j));
        for k in 0..dim {
            reach[k] = reach[k].max((x[k] - y[k]).abs());
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut tree = Vec::new();
    let nodes: Vec<usize> = (0..n).collect();
    dissect(a, &reach, nodes, &mut out, &mut tree);
    (out, tree)
}

fn dissect(
    a: &SymmetricOperatorMatrix,
    reach: &[i32],
    nodes: Vec<usize>,
    out: &mut Vec<usize>,
    tree: &mut Vec<TreeNode>,
) -> Option<usize> {
    if nodes.is_empty() {
        return None;
    }
    let leaf = |nodes: Vec<usize>, out: &mut Vec<usize>, tree: &mut Vec<TreeNode>| {
        let start = out.len();
        out.extend(nodes);
        tree.push(TreeNode {
            vars: start..out.len(),
            children: Vec::new(),
        });
        Some(tree.len() - 1)
    };
    if nodes.len() <= LEAF {
        return leaf(nodes, out, tree);
    }
    let sites = a.sites();
    let dim = sites.dim();
    let mut lo = vec![i32::MAX; dim];
    let mut hi = vec![i32::MIN; dim];
    for &v in &nodes {
        for (k, &c) in sites.get(v).iter().enumerate() {
            lo[k] = lo[k].min(c);
            hi[k] = hi[k].max(c);
        }
    }
    let axis = (0..dim)
        .max_by_key(|&k| (hi[k] - lo[k], std::cmp::Reverse(k)))
        .expect("positive dimension");
    let w = reach[axis].max(1);
    if hi[axis] - lo[axis] <= w {
        return leaf(nodes, out, tree);
    }
    let mut coords: Vec<i32> = nodes.iter().map(|&v| sites.get(v)[axis]).collect();
    let mid = coords.len() / 2;
    let (_, &mut median, _) = coords.select_nth_unstable(mid);
    let m = median.clamp(lo[axis] + 1, hi[axis] - w + 1);
    let (mut left, mut sep, mut right) = (Vec::new(), Vec::new(), Vec::new());
    for v in nodes {
        let c = sites.get(v)[axis];
        if c < m {
            left.push(v);
        } else if c < m + w {
            sep.push(v);
        } else {
            right.push(v);
        }
    }
    let children: Vec<usize> = [
        dissect(a, reach, left, out, tree),
        dissect(a, reach, right, out, tree),
    ]
    .into_iter()
    .flatten()
    .collect();
    let start = out.len();
    out.extend(sep);
    tree.push(TreeNode {
        vars: start..out.len(),
        children,
    });
    Some(tree.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::dense::sorted_eigenvalues;

    fn grid_laplacian(w: i32, h: i32, diag: impl Fn(i32, i32) -> f64) -> SymmetricOperatorMatrix {
        use crate::model::{Configuration, HoppingKernel, LatticeRegion};
        use std::sync::Arc;
        let region = Arc::new(LatticeRegion::cube(2, w.max(h) as u32, 2).unwrap());
        let config = Configuration::from_fn(region.clone(), |x| {
            if x[0].abs() <= w && x[1].abs() <= h {
                diag(x[0], x[1])
            } else {
                f64::INFINITY
            }
        });
        crate::operator::assemble(&config, &HoppingKernel::adjacency(2), &region.core_sites())
            .unwrap()
    }

    #[test]
    fn ordering_is_a_permutation() {
        let a = grid_laplacian(12, 9, |_, _| 0.0);
        let (mut p, tree) = nested_dissection(&a);
        p.sort_unstable();
        assert_eq!(p, (0..a.n()).collect::<Vec<_>>());
        // postorder: subtrees are contiguous and end at their root's vars
        let mut start = vec![0; tree.len()];
        for (id, node) in tree.iter().enumerate() {
            start[id] = node
                .children
                .iter()
                .map(|&c| start[c])
                .min()
                .unwrap_or(node.vars.start);
            for &c in &node.children {
                assert!(c < id && tree[c].vars.end <= node.vars.start);
            }
        }
        let root = tree.last().unwrap();
        assert_eq!((start[tree.len() - 1], root.vars.end), (0, a.n()));
    }

    #[test]
    fn inertia_matches_dense() {
        let a = grid_laplacian(8, 8, |x, y| ((x * 7 + y * 13).rem_euclid(5)) as f64 * 0.3);
        let ev = sorted_eigenvalues(a.to_dense().unwrap());
        let pat = LdlPattern::new(&a);
        for s in [-3.1, -1.234, 0.05, 0.77, 2.5, 5.9] {
            let (neg, pos) = pat.inertia(s, 1e-9).expect("generic shift");
            assert_eq!(neg, ev.iter().filter(|&&l| l < s).count());
            assert_eq!(neg + pos, a.n());
        }
    }

    #[test]
    fn nested_dissection_limits_fill() {
        let a = grid_laplacian(30, 30, |_, _| 0.0);
        let pat = LdlPattern::new(&a);
        let n = pat.n();
        // banded elimination of a 61 x 61 grid fills about n * 61 entries
        assert!(pat.fill() < n * 61 / 2, "fill {} for n {}", pat.fill(), n);
    }

    #[test]
    fn exact_singularity_is_flagged() {
        // 0 is an eigenvalue of the 3-site path
        let a = SymmetricOperatorMatrix::from_entries(vec![0.0; 3], &[(0, 1, 1.0), (1, 2, 1.0)])
            .unwrap();
        assert_eq!(LdlPattern::new(&a).inertia(0.0, 1e-9), None);
        assert_eq!(LdlPattern::new(&a).inertia(0.5, 1e-9), Some((2, 1)));
    }

    #[test]
    fn sturm_counts_path_spectrum() {
        // path of n sites: 2 cos(k pi / (n + 1))
        let n = 101;
        let ev: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        let diag = vec![0.0; n];
        let off = vec![1.0; n - 1];
        for s in [-2.5, -1.0 + 1e-3, -1e-9, 1e-9, 0.3, 1.999] {
            assert_eq!(
                sturm_count(&diag, &off, s),
                ev.iter().filter(|&&l| l < s).count(),
                "{s}"
            );
        }
    }

    #[test]
    fn growth_is_rejected_near_singular_shift() {
        // bipartite grid at 0: tiny pivots make the unpivoted factor unreliable
        let a = grid_laplacian(10, 10, |_, _| 0.0);
        let ev = sorted_eigenvalues(a.to_dense().unwrap());
        let pat = LdlPattern::new(&a);
        for s in [-1e-9, 1e-9] {
            if let Some((neg, _)) = pat.inertia(s, 5e-10) {
                assert_eq!(neg, ev.iter().filter(|&&l| l < s).count(), "{s}");
            }
        }
    }
}
