//! Exact rank and determinant of integer matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::counting::connected_blocks;
use crate::error::{Error, Result};
use crate::operator::SymmetricOperatorMatrix;

/// Largest block dimension handled by exact elimination.
pub const EXACT_GUARD: usize = 4096;

const P: u64 = (1 << 61) - 1;

/// `dim ker(A - (r/s) I)` for a matrix with integer entries.
///
/// A rational eigenvalue of an integer symmetric matrix is a root of a monic
/// integer polynomial, hence an integer; energies with reduced denominator
/// above one therefore have trivial kernel.
pub fn kernel_dim_exact(a: &SymmetricOperatorMatrix, r: i64, s: i64) -> Result<usize> {
    if !a.is_exact() {
        return Err(Error::invalid(
            "exact kernel dimension needs integer matrix entries",
        ));
    }
    if s == 0 {
        return Err(Error::invalid("energy denominator must be nonzero"));
    }
    let g = r.gcd(&s);
    let (mut r, mut s) = (r / g, s / g);
    if s < 0 {
        r = -r;
        s = -s;
    }
    if s > 1 || a.is_empty() {
        return Ok(0);
    }
    let (diag, off) = a.exact_entries()?;
    let blocks = connected_blocks(a);
    let mut block_of = vec![0usize; a.n()];
    let mut pos = vec![0usize; a.n()];
    for (b, rows) in blocks.iter().enumerate() {
        for (k, &row) in rows.iter().enumerate() {
            block_of[row] = b;
            pos[row] = k;
        }
    }
    let mut entries: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); blocks.len()];
    for &(i, j, v) in &off {
        entries[block_of[i]].push((pos[i], pos[j], v));
    }
    let mut nullity = 0;
    for (rows, block_entries) in blocks.iter().zip(&entries) {
        let n = rows.len();
        if n > EXACT_GUARD {
            return Err(Error::Resource {
                what: "exact elimination dimension",
                reached: n as u64,
                limit: EXACT_GUARD as u64,
            });
        }
        if n == 1 {
            nullity += usize::from(diag[rows[0]] == r);
            continue;
        }
        let mut m = vec![vec![0i64; n]; n];
        for (k, &row) in rows.iter().enumerate() {
            m[k][k] = diag[row]
                .checked_sub(r)
                .ok_or_else(|| Error::invalid("shifted entry overflows"))?;
        }
        for &(i, j, v) in block_entries {
            m[i][j] = v;
            m[j][i] = v;
        }
        nullity += n - rank_exact(&m);
    }
    Ok(nullity)
}

/// Rank over the rationals. A rank computed modulo a large prime is a lower
/// bound; it is accepted once a kernel basis of matching dimension is
/// reconstructed and verified over the integers. Otherwise fraction-free
/// elimination decides.
pub(crate) fn rank_exact(m: &[Vec<i64>]) -> usize {
    let n = m.len();
    if n == 0 {
        return 0;
    }
    let (rank_p, rref, pivots) = rref_mod_p(m);
    if rank_p == m[0].len() {
        return rank_p;
    }
    if certify_kernel(m, &rref, &pivots) {
        return rank_p;
    }
    rank_bareiss(m)
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn to_mod(v: i64) -> u64 {
    v.rem_euclid(P as i64) as u64
}

fn rref_mod_p(m: &[Vec<i64>]) -> (usize, Vec<Vec<u64>>, Vec<usize>) {
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|r| r.iter().map(|&v| to_mod(v)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = powmod(a[r][c], P - 2);
        for v in a[r][c..].iter_mut() {
            *v = mulmod(*v, inv);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..cols {
                if pivot_row[j] != 0 {
                    row[j] = (row[j] + P - mulmod(f, pivot_row[j])) % P;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (r, a, pivots)
}

/// Rational reconstruction of `a mod P` with numerator and denominator below
/// `sqrt(P / 2)`.
fn reconstruct(a: u64) -> Option<(i128, i128)> {
    let bound: i128 = ((P / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (P as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let (num, den) = if t1 < 0 { (-r1, -t1) } else { (r1, t1) };
    if num.gcd(&den) != 1 {
        return None;
    }
    Some((num, den))
}

fn certify_kernel(m: &[Vec<i64>], rref: &[Vec<u64>], pivots: &[usize]) -> bool {
    let cols = m[0].len();
    let mut is_pivot = vec![false; cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    for f in (0..cols).filter(|&c| !is_pivot[c]) {
        // kernel vector with a one in free column f
        let mut parts: Vec<(usize, i128, i128)> = vec![(f, 1, 1)];
        for (row, &pc) in rref.iter().zip(pivots) {
            let v = (P - row[f]) % P;
            if v == 0 {
                continue;
            }
            let Some((num, den)) = reconstruct(v) else {
                return false;
            };
            parts.push((pc, num, den));
        }
        let mut lcm: i128 = 1;
        for &(_, _, den) in &parts {
            lcm = match lcm.checked_mul(den / lcm.gcd(&den)) {
                Some(v) => v,
                None => return false,
            };
        }
        let mut w = vec![0i128; cols];
        for &(c, num, den) in &parts {
            match num.checked_mul(lcm / den) {
                Some(v) => w[c] = v,
                None => return false,
            }
        }
        for row in m {
            let mut acc: i128 = 0;
            for (c, &x) in row.iter().enumerate() {
                if x == 0 || w[c] == 0 {
                    continue;
                }
                match (x as i128)
                    .checked_mul(w[c])
                    .and_then(|t| acc.checked_add(t))
                {
                    Some(v) => acc = v,
                    None => return false,
                }
            }
            if acc != 0 {
                return false;
            }
        }
    }
    true
}

/// Rank by fraction-free elimination with row pivoting and column skipping.
pub fn rank_bareiss(m: &[Vec<i64>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let small: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    if let Some(r) = bareiss_i128(small) {
        return r;
    }
    let big: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    bareiss_big(big).0
}

fn bareiss_i128(mut a: Vec<Vec<i128>>) -> Option<usize> {
    let (rows, cols) = (a.len(), a[0].len());
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c];
        for i in r + 1..rows {
            let f = a[i][c];
            for j in c + 1..cols {
                let t = piv
                    .checked_mul(a[i][j])?
                    .checked_sub(f.checked_mul(a[r][j])?)?;
                a[i][j] = t / prev;
            }
            a[i][c] = 0;
        }
        prev = piv;
        r += 1;
    }
    Some(r)
}

/// Returns the rank and, for square input, the determinant.
fn bareiss_big(mut a: Vec<Vec<BigInt>>) -> (usize, BigInt) {
    let (rows, cols) = (a.len(), a[0].len());
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut negate = false;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(r, p);
            negate = !negate;
        }
        let piv = a[r][c].clone();
        for i in r + 1..rows {
            let f = a[i][c].clone();
            for j in c + 1..cols {
                let t = &piv * &a[i][j] - &f * &a[r][j];
                a[i][j] = t / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = piv;
        r += 1;
    }
    let det = if rows == cols && r == rows {
        if negate {
            -prev
        } else {
            prev
        }
    } else {
        BigInt::zero()
    };
    (r, det)
}

/// Determinant of a square big-integer matrix.
pub fn determinant_exact(m: &[Vec<BigInt>]) -> Result<BigInt> {
    if m.is_empty() {
        return Ok(BigInt::one());
    }
    if m.iter().any(|r| r.len() != m.len()) {
        return Err(Error::invalid("determinant needs a square matrix"));
    }
    Ok(bareiss_big(m.to_vec()).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, off: &[(usize, usize, f64)]) -> SymmetricOperatorMatrix {
        SymmetricOperatorMatrix::from_entries(vec![0.0; n], off).unwrap()
    }

    #[test]
    fn small_kernels() {
        let cycle = sym(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        assert_eq!(kernel_dim_exact(&cycle, 0, 1).unwrap(), 2);
        assert_eq!(kernel_dim_exact(&cycle, 2, 1).unwrap(), 1);
        assert_eq!(kernel_dim_exact(&cycle, -4, -2).unwrap(), 1);
        let p3 = sym(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(kernel_dim_exact(&p3, 0, 1).unwrap(), 1);
        assert_eq!(kernel_dim_exact(&p3, 1, 1).unwrap(), 0);
        let dimer = sym(2, &[(0, 1, 1.0)]);
        assert_eq!(kernel_dim_exact(&dimer, 1, 1).unwrap(), 1);
        assert_eq!(kernel_dim_exact(&dimer, 1, 2).unwrap(), 0);
    }

    #[test]
    fn rejects_float_entries() {
        let a = SymmetricOperatorMatrix::from_entries(vec![0.5], &[]).unwrap();
        assert!(matches!(
            kernel_dim_exact(&a, 0, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    /// Deterministic pseudo-random integers for test matrices.
    fn lcg(state: &mut u64) -> i64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 33) as i64
    }

    #[test]
    fn modular_path_agrees_with_bareiss() {
        let mut st = 17u64;
        for trial in 0..60 {
            let n = 2 + (trial % 12);
            let k = 1 + (lcg(&mut st) as usize % n);
            // product of an n x k and a k x n factor has rank at most k
            let u: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..k).map(|_| lcg(&mut st) % 7 - 3).collect())
                .collect();
            let v: Vec<Vec<i64>> = (0..k)
                .map(|_| (0..n).map(|_| lcg(&mut st) % 7 - 3).collect())
                .collect();
            let m: Vec<Vec<i64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..k).map(|t| u[i][t] * v[t][j]).sum())
                        .collect()
                })
                .collect();
            let rb = rank_bareiss(&m);
            assert!(rb <= k);
            assert_eq!(rank_exact(&m), rb, "trial {trial}");
        }
    }

    #[test]
    fn bareiss_overflow_falls_back_to_big_integers() {
        // Hilbert-like growth: entries up to 1e15 overflow i128 products quickly
        let n = 8;
        let m: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| ((i * n + j) as i64 * 999_999_937) % 1_000_000_000_000_007)
                    .collect()
            })
            .collect();
        let big: Vec<Vec<BigInt>> = m
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        assert_eq!(rank_bareiss(&m), bareiss_big(big).0);
    }

    #[test]
    fn determinants() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(1)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(2)],
        ];
        assert_eq!(determinant_exact(&m).unwrap(), BigInt::from(4));
        let swap = vec![
            vec![BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0)],
        ];
        assert_eq!(determinant_exact(&swap).unwrap(), BigInt::from(-1));
    }

    #[test]
    fn reconstruction() {
        let third = powmod(3, P - 2);
        assert_eq!(reconstruct(third), Some((1, 3)));
        assert_eq!(reconstruct(P - 2), Some((-2, 1)));
    }
}
