use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;

use super::poly::{derivative, eval_f64, from_i64, gcd_degree};
use crate::error::{Error, Result};

/// `sup_{D >= 1} log(4 D^3) / D`, attained at `D = 2`.
pub const LOG4D3_SUP: f64 = 1.732_867_951_399_863_2;

/// A real algebraic energy `E = alpha / b` with `alpha` an algebraic integer
/// given by its (monic, squarefree) minimal polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicNumber {
    minpoly: Vec<i64>,
    denom: u64,
    root_bound: f64,
    alpha: f64,
    alpha_error: f64,
}

impl AlgebraicNumber {
    /// `minpoly` lists coefficients from the constant term up and must end in
    /// 1. The root of interest is the real root nearest `approx`, or the
    /// largest real root when no approximation is given.
    ///
    /// Irreducibility is not checked; a reducible input only enlarges the
    /// degree and hence the constant.
    pub fn new(minpoly: Vec<i64>, denom: u64, approx: Option<f64>) -> Result<Self> {
        if minpoly.len() < 2 {
            return Err(Error::invalid(
                "minimal polynomial must have degree at least 1",
            ));
        }
        if *minpoly.last().expect("nonempty") != 1 {
            return Err(Error::invalid("minimal polynomial must be monic"));
        }
        if denom == 0 {
            return Err(Error::invalid("denominator must be positive"));
        }
        let big = from_i64(&minpoly);
        if gcd_degree(&big, &derivative(&big)) != 0 {
            return Err(Error::invalid("minimal polynomial is not squarefree"));
        }
        let n = minpoly.len() - 1;
        let root_bound = 1.0
            + minpoly[..n]
                .iter()
                .map(|c| c.unsigned_abs() as f64)
                .fold(0.0, f64::max);
        let roots = real_roots(&minpoly);
        let chosen = match approx {
            Some(x) => roots
                .iter()
                .copied()
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())),
            None => roots.iter().copied().reduce(f64::max),
        }
        .ok_or_else(|| Error::invalid("minimal polynomial has no real root"))?;
        let (alpha, alpha_error) = polish(&big, chosen);
        if roots.iter().any(|r| r.abs() > root_bound) {
            return Err(Error::internal("root exceeds the Cauchy bound"));
        }
        Ok(AlgebraicNumber {
            minpoly,
            denom,
            root_bound,
            alpha,
            alpha_error,
        })
    }

    pub fn integer(k: i64) -> Self {
        Self::new(vec![-k, 1], 1, None).expect("linear polynomials are valid")
    }

    /// The rational `r / s` in lowest terms.
    pub fn rational(r: i64, s: i64) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("denominator must be nonzero"));
        }
        let g = r.gcd(&s);
        let (mut r, mut s) = (r / g, s / g);
        if s < 0 {
            r = -r;
            s = -s;
        }
        Self::new(vec![-r, 1], s as u64, None)
    }

    pub fn minpoly(&self) -> &[i64] {
        &self.minpoly
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    /// Cauchy bound `1 + max |m_i|` on every conjugate of `alpha`.
    pub fn root_bound(&self) -> f64 {
        self.root_bound
    }

    pub fn value(&self) -> f64 {
        self.alpha / self.denom as f64
    }

    pub fn value_error(&self) -> f64 {
        self.alpha_error / self.denom as f64
    }

    /// `(r, s)` when the energy is rational.
    pub fn as_rational(&self) -> Option<(i64, i64)> {
        (self.degree() == 1).then(|| (-self.minpoly[0], self.denom as i64))
    }
}

/// Real roots from the eigenvalues of the companion matrix.
fn real_roots(minpoly: &[i64]) -> Vec<f64> {
    let n = minpoly.len() - 1;
    if n == 1 {
        return vec![-minpoly[0] as f64];
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -minpoly[i] as f64;
    }
    let scale = minpoly
        .iter()
        .map(|v| v.unsigned_abs() as f64)
        .fold(1.0, f64::max);
    let mut roots: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * scale)
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Newton refinement; returns the root and an error estimate.
fn polish(p: &[BigInt], mut x: f64) -> (f64, f64) {
    let dp = derivative(p);
    for _ in 0..60 {
        let d = eval_f64(&dp, x);
        if d == 0.0 {
            break;
        }
        let s = eval_f64(p, x) / d;
        if !s.is_finite() {
            break;
        }
        x -= s;
        if s.abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    let d = eval_f64(&dp, x);
    let err = 2.0 * (eval_f64(p, x) / d).abs() + 4.0 * f64::EPSILON * x.abs();
    (x, err)
}

/// Per-site constant `C_E` of the log-Hölder bound
/// `N(E + eps) - N(E) <= C_E / log(1/eps)` for matrices with `||A|| <= K`:
///
/// `C_E = log b + (n - 1)(S + log(8 R b) + log K) + log K`,
/// with `S = sup_D log(4 D^3)/D` and `R` the Cauchy root bound.
pub fn algebraic_constant(e: &AlgebraicNumber, k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(Error::invalid("norm bound K must be finite and at least 1"));
    }
    if e.root_bound < 1.0 {
        return Err(Error::invalid("root bound below 1"));
    }
    let b = e.denom as f64;
    let n = e.degree() as f64;
    Ok(b.ln() + (n - 1.0) * (LOG4D3_SUP + (8.0 * e.root_bound * b).ln() + k.ln()) + k.ln())
}
