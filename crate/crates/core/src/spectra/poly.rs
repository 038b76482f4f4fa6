//! Dense integer polynomials, coefficients stored from the constant term up.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub(crate) fn trim(p: &mut Vec<BigInt>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

/// Coefficients of `p(t + e)`.
pub(crate) fn taylor_shift(p: &[BigInt], e: i64) -> Vec<BigInt> {
    let mut c = p.to_vec();
    let e = BigInt::from(e);
    if e.is_zero() {
        return c;
    }
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = &c[j + 1] * &e;
            c[j] += t;
        }
    }
    c
}

pub(crate) fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    let d: Vec<BigInt> = p.iter().enumerate().skip(1).map(|(i, c)| c * i).collect();
    if d.is_empty() {
        vec![BigInt::zero()]
    } else {
        d
    }
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    trim(&mut p);
    let g = p.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in &mut p {
            *c /= &g;
        }
    }
    p
}

fn is_zero_poly(p: &[BigInt]) -> bool {
    p.iter().all(Zero::is_zero)
}

/// Pseudo-remainder of `a` by `b` (deg b >= 0, b nonzero).
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lb = b[db].clone();
    while !is_zero_poly(&r) && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[dr - db + i] -= &lr * bc;
        }
        r.pop();
        trim(&mut r);
        if r.len() == 1 && db == 0 {
            break;
        }
    }
    r
}

/// Degree of `gcd(a, b)` over the rationals.
pub(crate) fn gcd_degree(a: &[BigInt], b: &[BigInt]) -> usize {
    let (mut x, mut y) = (primitive(a.to_vec()), primitive(b.to_vec()));
    if is_zero_poly(&x) {
        return if is_zero_poly(&y) { 0 } else { y.len() - 1 };
    }
    while !is_zero_poly(&y) {
        if y.len() == 1 {
            return 0;
        }
        let r = primitive(pseudo_rem(&x, &y));
        x = y;
        y = r;
    }
    x.len() - 1
}

pub(crate) fn eval_f64(p: &[BigInt], x: f64) -> f64 {
    p.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

/// `ln |v|` for a nonzero integer of any size.
pub(crate) fn ln_abs(v: &BigInt) -> f64 {
    let a = v.abs();
    let bits = a.bits();
    if bits <= 1000 {
        return a.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 900;
    let top: BigInt = &a >> shift;
    top.to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn from_i64(p: &[i64]) -> Vec<BigInt> {
    p.iter().map(|&c| BigInt::from(c)).collect()
}
