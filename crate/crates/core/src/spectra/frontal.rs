//! Multifrontal LDL^T of `A - sI` over the dissection tree, with 1x1 and
//! 2x2 threshold pivots. Fully summed rows that fail the threshold test are
//! delayed to the parent front. Slower than the up-looking factorization,
//! but stable at shifts where many leading submatrices are singular (atoms
//! of small cluster spectra on percolation graphs).

use super::ldl::{nested_dissection, TreeNode};
use crate::operator::SymmetricOperatorMatrix;

const NONE: usize = usize::MAX;
// accepted pivots keep multipliers below 1 / U
const U: f64 = 0.1;

pub(crate) struct Multifrontal {
    diag: Vec<f64>,
    // entries to later positions, row-compressed by position
    up: Vec<usize>,
    uj: Vec<usize>,
    ux: Vec<f64>,
    tree: Vec<TreeNode>,
    // later positions coupled to each subtree, sorted
    boundary: Vec<Vec<usize>>,
    scale: f64,
}

struct Front {
    idx: Vec<usize>,
    m: Vec<f64>,
}

struct Dense<'a> {
    m: &'a mut [f64],
    size: usize,
}

impl Dense<'_> {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.size + j]
    }

    fn swap(&mut self, i: usize, j: usize, idx: &mut [usize]) {
        if i == j {
            return;
        }
        let s = self.size;
        for c in 0..s {
            self.m.swap(i * s + c, j * s + c);
        }
        for r in 0..s {
            self.m.swap(r * s + i, r * s + j);
        }
        idx.swap(i, j);
    }

    // largest |m(i, c)| over rows i >= k other than `skip`, and the row of the
    // largest one among fully summed rows (< nf)
    fn column_max(&self, c: usize, k: usize, nf: usize, skip: usize) -> (f64, usize) {
        let (mut g, mut r, mut gr) = (0.0f64, NONE, 0.0f64);
        for i in k..self.size {
            if i == c || i == skip {
                continue;
            }
            let v = self.get(i, c).abs();
            g = g.max(v);
            if i < nf && v > gr {
                gr = v;
                r = i;
            }
        }
        (g, r)
    }
}

#[derive(Default)]
struct Tally {
    neg: usize,
    pos: usize,
    // largest entry magnitude met in any front
    rho: f64,
}

impl Multifrontal {
    pub(crate) fn new(a: &SymmetricOperatorMatrix) -> Self {
        let n = a.n();
        let (perm, tree) = nested_dissection(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut up = vec![0usize; n + 1];
        for (i, j, _) in a.upper_entries() {
            up[inv[i].min(inv[j]) + 1] += 1;
        }
        for k in 0..n {
            up[k + 1] += up[k];
        }
        let mut next = up.clone();
        let mut uj = vec![0usize; a.nnz_upper()];
        let mut ux = vec![0.0; a.nnz_upper()];
        for (i, j, v) in a.upper_entries() {
            let (lo, hi) = (inv[i].min(inv[j]), inv[i].max(inv[j]));
            uj[next[lo]] = hi;
            ux[next[lo]] = v;
            next[lo] += 1;
        }
        let diag = perm.iter().map(|&old| a.diag()[old]).collect();
        let mut boundary: Vec<Vec<usize>> = Vec::with_capacity(tree.len());
        for node in &tree {
            let end = node.vars.end;
            let mut b: Vec<usize> = node
                .vars
                .clone()
                .flat_map(|v| uj[up[v]..up[v + 1]].iter().copied())
                .chain(
                    node.children
                        .iter()
                        .flat_map(|&c| boundary[c].iter().copied()),
                )
                .filter(|&j| j >= end)
                .collect();
            b.sort_unstable();
            b.dedup();
            boundary.push(b);
        }
        Multifrontal {
            diag,
            up,
            uj,
            ux,
            tree,
            boundary,
            scale: a.norm_bound().max(1.0),
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.diag.len()
    }

    /// Negative and positive eigenvalue counts of `A - shift I`, or `None`
    /// when a pivot is within tolerance of zero or the error estimate
    /// `eps * (largest front entry) * (largest front size)` exceeds `accuracy`.
    pub(crate) fn inertia(&self, shift: f64, accuracy: f64) -> Option<(usize, usize)> {
        let tol = 1e-12 * self.scale.max(shift.abs());
        let mut loc = vec![NONE; self.n()];
        let mut contrib: Vec<Option<Front>> = (0..self.tree.len()).map(|_| None).collect();
        let mut tally = Tally {
            rho: self.scale.max(shift.abs()),
            ..Tally::default()
        };
        let mut largest = 1usize;
        for (id, node) in self.tree.iter().enumerate() {
            let kids: Vec<Front> = node
                .children
                .iter()
                .map(|&c| contrib[c].take().expect("children precede parents"))
                .collect();
            let mut idx: Vec<usize> = node.vars.clone().collect();
            for f in &kids {
                idx.extend(f.idx.iter().copied().filter(|&j| j < node.vars.start));
            }
            let nf = idx.len();
            idx.extend_from_slice(&self.boundary[id]);
            let size = idx.len();
            largest = largest.max(size);
            for (k, &j) in idx.iter().enumerate() {
                loc[j] = k;
            }
            let mut m = vec![0.0f64; size * size];
            for v in node.vars.clone() {
                let lv = loc[v];
                m[lv * size + lv] += self.diag[v] - shift;
                for p in self.up[v]..self.up[v + 1] {
                    let lj = loc[self.uj[p]];
                    m[lv * size + lj] += self.ux[p];
                    m[lj * size + lv] += self.ux[p];
                }
            }
            for f in &kids {
                let fs = f.idx.len();
                for (b, &jb) in f.idx.iter().enumerate() {
                    let row = loc[jb] * size;
                    for (c, &jc) in f.idx.iter().enumerate() {
                        m[row + loc[jc]] += f.m[b * fs + c];
                    }
                }
            }
            for &j in &idx {
                loc[j] = NONE;
            }
            let mut front = Dense { m: &mut m, size };
            let done = eliminate(&mut front, nf, &mut idx, tol, &mut tally)?;
            if id + 1 == self.tree.len() {
                if done < size {
                    return None;
                }
                break;
            }
            let rest = size - done;
            let mut cm = vec![0.0f64; rest * rest];
            for b in 0..rest {
                let src = (done + b) * size + done;
                cm[b * rest..(b + 1) * rest].copy_from_slice(&m[src..src + rest]);
            }
            contrib[id] = Some(Front {
                idx: idx[done..].to_vec(),
                m: cm,
            });
        }
        let err = f64::EPSILON * tally.rho * largest as f64;
        if !(err <= accuracy) {
            return None;
        }
        Some((tally.neg, tally.pos))
    }
}

// Eliminates fully summed rows 0..nf of the front as far as the threshold
// test allows, moving pivots to the leading positions. Returns the number
// of eliminated rows; `None` on a pivot within `tol` of zero.
fn eliminate(
    f: &mut Dense<'_>,
    nf: usize,
    idx: &mut [usize],
    tol: f64,
    t: &mut Tally,
) -> Option<usize> {
    let size = f.size;
    let mut k = 0;
    while k < nf {
        let mut chosen = None;
        for c in k..nf {
            let acc = f.get(c, c);
            let (g, r) = f.column_max(c, k, nf, NONE);
            if acc.abs() >= U * g && acc.abs() > tol {
                chosen = Some((c, None));
                break;
            }
            if g == 0.0 {
                // an exactly zero row and column: singular at this shift
                return None;
            }
            if r == NONE {
                continue;
            }
            let (a11, a12, a22) = (acc, f.get(r, c), f.get(r, r));
            let det = a11 * a22 - a12 * a12;
            if det.abs() <= tol * a12.abs() {
                continue;
            }
            let (g1, _) = f.column_max(c, k, size, r);
            let (g2, _) = f.column_max(r, k, size, c);
            let (i11, i12, i22) = ((a22 / det).abs(), (a12 / det).abs(), (a11 / det).abs());
            if i11 * g1 + i12 * g2 <= 1.0 / U && i12 * g1 + i22 * g2 <= 1.0 / U {
                chosen = Some((c, Some(r)));
                break;
            }
        }
        let Some((c, partner)) = chosen else { break };
        f.swap(k, c, idx);
        match partner {
            None => {
                pivot_1x1(f, k, t);
                k += 1;
            }
            Some(r) => {
                // r may have moved into c's old slot
                let r = if r == k { c } else { r };
                f.swap(k + 1, r, idx);
                pivot_2x2(f, k, t);
                k += 2;
            }
        }
    }
    Some(k)
}

fn pivot_1x1(f: &mut Dense<'_>, k: usize, t: &mut Tally) {
    let s = f.size;
    let d = f.get(k, k);
    if d < 0.0 {
        t.neg += 1;
    } else {
        t.pos += 1;
    }
    t.rho = t.rho.max(d.abs());
    for i in k + 1..s {
        let l = f.m[i * s + k] / d;
        if l == 0.0 {
            continue;
        }
        for j in k + 1..s {
            let v = f.m[i * s + j] - l * f.m[k * s + j];
            f.m[i * s + j] = v;
            t.rho = t.rho.max(v.abs());
        }
    }
}

fn pivot_2x2(f: &mut Dense<'_>, k: usize, t: &mut Tally) {
    let s = f.size;
    let (a, b, c) = (f.get(k, k), f.get(k + 1, k), f.get(k + 1, k + 1));
    let det = a * c - b * b;
    if det < 0.0 {
        t.neg += 1;
        t.pos += 1;
    } else if a < 0.0 {
        t.neg += 2;
    } else {
        t.pos += 2;
    }
    t.rho = t.rho.max(a.abs()).max(b.abs()).max(c.abs());
    let (i11, i12, i22) = (c / det, -b / det, a / det);
    for i in k + 2..s {
        let (x, y) = (f.m[i * s + k], f.m[i * s + k + 1]);
        let (l1, l2) = (x * i11 + y * i12, x * i12 + y * i22);
        if l1 == 0.0 && l2 == 0.0 {
            continue;
        }
        for j in k + 2..s {
            let v = f.m[i * s + j] - l1 * f.m[k * s + j] - l2 * f.m[(k + 1) * s + j];
            f.m[i * s + j] = v;
            t.rho = t.rho.max(v.abs());
        }
    }
}
