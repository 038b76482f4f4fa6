use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::counting::{CounterOptions, SpectralCounter};
use super::poly::{ln_abs, taylor_shift};
use crate::error::{Error, Result};
use crate::operator::SymmetricOperatorMatrix;

/// Largest dimension accepted by [`charpoly_exact`].
pub const CHARPOLY_GUARD: usize = 64;

/// Coefficients `c_0, ..., c_D` of `det(tI - A)`, constant term first.
///
/// Faddeev-LeVerrier recursion `M_k = A M_{k-1} + c_{D-k+1} I`,
/// `c_{D-k} = -tr(A M_k) / k`, in 128-bit arithmetic with a big-integer
/// rerun on overflow.
pub fn charpoly_exact(a: &SymmetricOperatorMatrix) -> Result<Vec<BigInt>> {
    if !a.is_exact() {
        return Err(Error::invalid(
            "characteristic polynomial needs integer entries",
        ));
    }
    let n = a.n();
    if n > CHARPOLY_GUARD {
        return Err(Error::Resource {
            what: "characteristic polynomial dimension",
            reached: n as u64,
            limit: CHARPOLY_GUARD as u64,
        });
    }
    let dense = a.to_dense()?;
    let m: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| dense[(i, j)] as i64).collect())
        .collect();
    if let Some(c) = leverrier_i128(&m) {
        return Ok(c.into_iter().map(BigInt::from).collect());
    }
    Ok(leverrier_big(&m))
}

fn leverrier_i128(a: &[Vec<i64>]) -> Option<Vec<i128>> {
    let n = a.len();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    for k in 1..=n {
        // am = A * M_k
        let mut am = vec![vec![0i128; n]; n];
        for i in 0..n {
            for (l, &x) in a[i].iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let x = x as i128;
                for j in 0..n {
                    am[i][j] = am[i][j].checked_add(x.checked_mul(m[l][j])?)?;
                }
            }
        }
        let mut tr: i128 = 0;
        for (i, row) in am.iter().enumerate() {
            tr = tr.checked_add(row[i])?;
        }
        debug_assert_eq!(tr % k as i128, 0);
        c[n - k] = -tr / k as i128;
        for (i, row) in am.iter_mut().enumerate() {
            row[i] = row[i].checked_add(c[n - k])?;
        }
        m = am;
    }
    Some(c)
}

fn leverrier_big(a: &[Vec<i64>]) -> Vec<BigInt> {
    let n = a.len();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::from(1);
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect())
        .collect();
    for k in 1..=n {
        let mut am = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for (l, &x) in a[i].iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    am[i][j] += &m[l][j] * x;
                }
            }
        }
        let tr: BigInt = (0..n).map(|i| &am[i][i]).sum();
        c[n - k] = -(tr / k);
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += &c[n - k];
        }
        m = am;
    }
    c
}

/// Result of checking Lück's counting bound at an integer energy.
#[derive(Clone, Debug)]
pub struct LuckReport {
    pub dim: usize,
    /// Multiplicity of `E` as a root of the characteristic polynomial.
    pub k: usize,
    /// `|q(0)|` where `p(t + E) = t^k q(t)`.
    pub c: BigInt,
    /// `max(1, ||A - E||)` bounded by the largest absolute row sum.
    pub norm: f64,
    pub bound: f64,
    /// Eigenvalues in `]E, E + eps]`.
    pub lhs: usize,
}

impl LuckReport {
    pub fn holds(&self) -> bool {
        self.lhs as f64 <= self.bound
    }
}

/// Counts eigenvalues in `]E, E + eps]` and compares with
/// `(log(1/C) + D log K) / log(1/eps)`.
pub fn luck_bound(a: &SymmetricOperatorMatrix, e: i64, eps: f64) -> Result<LuckReport> {
    let p = charpoly_exact(a)?;
    luck_bound_with(a, &p, e, eps)
}

/// As [`luck_bound`], reusing a characteristic polynomial of `a`.
pub fn luck_bound_with(
    a: &SymmetricOperatorMatrix,
    charpoly: &[BigInt],
    e: i64,
    eps: f64,
) -> Result<LuckReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("eps must lie in (0, 1)"));
    }
    if charpoly.len() != a.n() + 1 {
        return Err(Error::invalid(
            "characteristic polynomial does not match the matrix",
        ));
    }
    let shifted = taylor_shift(charpoly, e);
    let k = shifted.iter().take_while(|c| c.is_zero()).count();
    let Some(q0) = shifted.get(k) else {
        return Err(Error::internal(
            "characteristic polynomial vanished identically",
        ));
    };
    let c = q0.abs();
    let ef = e.to_f64().expect("i64 converts");
    let mut rows: Vec<f64> = a.diag().iter().map(|d| (d - ef).abs()).collect();
    for (i, j, v) in a.upper_entries() {
        rows[i] += v.abs();
        rows[j] += v.abs();
    }
    let norm = rows.into_iter().fold(1.0, f64::max);
    let d = a.n() as f64;
    let bound = (-ln_abs(&c) + d * norm.ln()) / (1.0 / eps).ln();
    let counter = SpectralCounter::new(
        a,
        CounterOptions {
            dense_cache_limit: CHARPOLY_GUARD,
            ..Default::default()
        },
    )?;
    let lhs = counter.count(ef + eps, true)? - counter.count(ef, true)?;
    Ok(LuckReport {
        dim: a.n(),
        k,
        c,
        norm,
        bound,
        lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::exact::determinant_exact;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn path(n: usize) -> SymmetricOperatorMatrix {
        let off: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        SymmetricOperatorMatrix::from_entries(vec![0.0; n], &off).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(charpoly_exact(&path(3)).unwrap(), ints(&[0, -2, 0, 1]));
        let one = SymmetricOperatorMatrix::from_entries(vec![3.0], &[]).unwrap();
        assert_eq!(charpoly_exact(&one).unwrap(), ints(&[-3, 1]));
        assert_eq!(charpoly_exact(&path(2)).unwrap(), ints(&[-1, 0, 1]));
    }

    /// det(tI - A) at t = 0..=n by Bareiss, then Lagrange interpolation in
    /// exact rational arithmetic (Newton divided differences).
    fn interpolation_oracle(a: &SymmetricOperatorMatrix) -> Vec<BigInt> {
        let n = a.n();
        let d = a.to_dense().unwrap();
        let values: Vec<BigInt> = (0..=n)
            .map(|t| {
                let m: Vec<Vec<BigInt>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let v = -(d[(i, j)] as i64) + if i == j { t as i64 } else { 0 };
                                BigInt::from(v)
                            })
                            .collect()
                    })
                    .collect();
                determinant_exact(&m).unwrap()
            })
            .collect();
        // divided differences on nodes 0..=n are integers divided by k!
        let mut dd = values.clone();
        for level in 1..=n {
            for i in (level..=n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / BigInt::from(level);
            }
        }
        // expand Newton form sum dd[k] * prod_{i<k} (t - i)
        let mut coeffs = vec![BigInt::zero(); n + 1];
        let mut basis = vec![BigInt::from(1)];
        for k in 0..=n {
            for (i, b) in basis.iter().enumerate() {
                coeffs[i] += &dd[k] * b;
            }
            let mut next = vec![BigInt::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * BigInt::from(k);
            }
            basis = next;
        }
        coeffs
    }

    #[test]
    fn leverrier_matches_interpolated_determinants() {
        let mut st = 99u64;
        for n in 1..=9 {
            let mut off = Vec::new();
            let mut diag = Vec::new();
            for i in 0..n {
                st = st.wrapping_mul(6364136223846793005).wrapping_add(1);
                diag.push(((st >> 40) % 5) as f64 - 2.0);
                for j in i + 1..n {
                    st = st.wrapping_mul(6364136223846793005).wrapping_add(1);
                    let v = ((st >> 40) % 5) as f64 - 2.0;
                    if v != 0.0 {
                        off.push((i, j, v));
                    }
                }
            }
            let a = SymmetricOperatorMatrix::from_entries(diag, &off).unwrap();
            assert_eq!(
                charpoly_exact(&a).unwrap(),
                interpolation_oracle(&a),
                "n = {n}"
            );
        }
    }

    #[test]
    fn big_integer_path_agrees() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| 1_000_000.0 * (i as f64 + 1.0)).collect();
        let off: Vec<_> = (1..n).map(|i| (i - 1, i, 999_983.0)).collect();
        let a = SymmetricOperatorMatrix::from_entries(diag, &off).unwrap();
        let d = a.to_dense().unwrap();
        let m: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| d[(i, j)] as i64).collect())
            .collect();
        assert!(leverrier_i128(&m).is_none());
        assert_eq!(charpoly_exact(&a).unwrap(), interpolation_oracle(&a));
    }

    #[test]
    fn luck_examples() {
        let r = luck_bound(&path(3), 0, 0.1).unwrap();
        assert_eq!((r.k, r.lhs), (1, 0));
        assert_eq!(r.c, BigInt::from(2));
        assert_eq!(r.norm, 2.0);
        let expect = ((0.5f64).ln() + 3.0 * 2f64.ln()) / 10f64.ln();
        assert!((r.bound - expect).abs() < 1e-12);
        assert!((r.bound - 0.602).abs() < 1e-3);
        assert!(r.holds());

        let zero = SymmetricOperatorMatrix::from_entries(vec![0.0], &[]).unwrap();
        let r = luck_bound(&zero, 0, 0.3).unwrap();
        assert_eq!((r.k, r.lhs), (1, 0));
        assert_eq!(r.c, BigInt::from(1));
        assert_eq!(r.bound, 0.0);
        assert!(luck_bound(&zero, 0, 1.0).is_err());
    }
}
