//! Dense univariate polynomials over `BigComplex`, coefficients in ascending degree.

use crate::num::BigComplex;

pub type Poly = Vec<BigComplex>;

pub fn from_roots(roots: &[BigComplex], prec: u32) -> Poly {
    let mut p = vec![BigComplex::one(prec)];
    for r in roots {
        p = mul(&p, &[-r, BigComplex::one(prec)]);
    }
    p
}

pub fn mul(a: &[BigComplex], b: &[BigComplex]) -> Poly {
    let p = a[0].prec().max(b[0].prec());
    let mut c = vec![BigComplex::zero(p); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j].mul_acc(x, y);
        }
    }
    c
}

pub fn add(a: &[BigComplex], b: &[BigComplex]) -> Poly {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut c = long.to_vec();
    for (ci, s) in c.iter_mut().zip(short) {
        *ci += s;
    }
    c
}

pub fn scale(a: &[BigComplex], s: &BigComplex) -> Poly {
    a.iter().map(|x| x * s).collect()
}

pub fn derivative(a: &[BigComplex]) -> Poly {
    if a.len() <= 1 {
        return vec![BigComplex::zero(a.first().map_or(64, BigComplex::prec))];
    }
    a.iter().enumerate().skip(1).map(|(k, c)| c.scale_i64(k as i64)).collect()
}

pub fn eval(a: &[BigComplex], t: &BigComplex) -> BigComplex {
    let mut acc = BigComplex::zero(a[0].prec().max(t.prec()));
    for c in a.iter().rev() {
        acc = &acc * t;
        acc += c;
    }
    acc
}

/// Drops trailing coefficients that are exactly zero, keeping at least one.
pub fn trim(mut a: Poly) -> Poly {
    while a.len() > 1 && a.last().is_some_and(BigComplex::is_zero) {
        a.pop();
    }
    a
}
