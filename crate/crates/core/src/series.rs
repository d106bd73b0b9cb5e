//! Truncated power series with multiprecision complex coefficients.

use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::BigComplex;

/// Name of the expansion variable; binary operations require equal tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Var {
    #[serde(rename = "t")]
    T,
    /// ODE-side local coordinate `Q = exp(ŷ/y)`.
    #[serde(rename = "Q")]
    BigQ,
    /// Modular coordinate `q = exp(2πiτ)`.
    #[serde(rename = "q")]
    SmallQ,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::T => "t",
            Var::BigQ => "Q",
            Var::SmallQ => "q",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// d/dx, drops the truncation order by one.
    DVar,
    /// x·d/dx, keeps the truncation order.
    Theta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// `Σ_{n=0}^{N} c_n xⁿ + O(x^{N+1})`.
#[derive(Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<BigComplex>,
    var: Var,
}

impl fmt::Debug for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerSeries[{}; N={}](", self.var, self.order())?;
        for (k, c) in self.coeffs.iter().take(6).enumerate() {
            write!(f, "{}{:?}", if k > 0 { ", " } else { "" }, c)?;
        }
        if self.coeffs.len() > 6 {
            write!(f, ", …")?;
        }
        write!(f, ")")
    }
}

impl PowerSeries {
    /// Panics on an empty coefficient list.
    pub fn new(coeffs: Vec<BigComplex>, var: Var) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least a constant term");
        PowerSeries { coeffs, var }
    }

    pub fn zero(order: usize, var: Var, prec: u32) -> Self {
        PowerSeries { coeffs: vec![BigComplex::zero(prec); order + 1], var }
    }

    pub fn constant(c: BigComplex, order: usize, var: Var) -> Self {
        let mut s = Self::zero(order, var, c.prec());
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize, var: Var, prec: u32) -> Self {
        Self::constant(BigComplex::one(prec), order, var)
    }

    /// The series `x`.
    pub fn identity(order: usize, var: Var, prec: u32) -> Self {
        let mut s = Self::zero(order, var, prec);
        if order >= 1 {
            s.coeffs[1] = BigComplex::one(prec);
        }
        s
    }

    pub fn from_f64(values: &[f64], order: usize, var: Var, prec: u32) -> Self {
        let mut s = Self::zero(order, var, prec);
        for (c, &v) in s.coeffs.iter_mut().zip(values) {
            *c = BigComplex::from_f64(prec, v, 0.0);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(BigComplex::prec).max().unwrap_or(crate::num::MIN_PREC)
    }

    pub fn coeffs(&self) -> &[BigComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigComplex {
        &self.coeffs[n]
    }

    pub fn into_coeffs(self) -> Vec<BigComplex> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        PowerSeries { coeffs: self.coeffs[..=n].to_vec(), var: self.var }
    }

    pub fn retag(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    fn check_tag(&self, other: &Self) -> Result<()> {
        if self.var != other.var {
            return Err(Error::TagMismatch(self.var.to_string(), other.var.to_string()));
        }
        Ok(())
    }

    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self> {
        match op {
            ArithOp::Add => self.add(other),
            ArithOp::Sub => self.sub(other),
            ArithOp::Mul => self.mul(other),
            ArithOp::Div => self.div(other),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_tag(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect();
        Ok(PowerSeries { coeffs, var: self.var })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_tag(other)?;
        let n = self.order().min(other.order());
        let coeffs = (0..=n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect();
        Ok(PowerSeries { coeffs, var: self.var })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_tag(other)?;
        let n = self.order().min(other.order());
        Ok(PowerSeries { coeffs: mul_trunc(&self.coeffs, &other.coeffs, n), var: self.var })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_tag(other)?;
        let inv = other.recip()?;
        self.mul(&inv)
    }

    /// `1/self`; requires a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0].is_zero() {
            return Err(Error::DivisionByZeroSeries);
        }
        let n = self.order();
        let inv0 = a[0].recip();
        let mut b = Vec::with_capacity(n + 1);
        b.push(inv0.clone());
        for k in 1..=n {
            let mut acc = BigComplex::zero(self.prec());
            for j in 1..=k {
                acc.mul_acc(&a[j], &b[k - j]);
            }
            b.push(-(&acc * &inv0));
        }
        Ok(PowerSeries { coeffs: b, var: self.var })
    }

    pub fn neg(&self) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|c| -c).collect(), var: self.var }
    }

    pub fn scale(&self, c: &BigComplex) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect(), var: self.var }
    }

    pub fn scale_real(&self, c: &Float) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| x.scale(c)).collect(), var: self.var }
    }

    pub fn add_constant(&self, c: &BigComplex) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += c;
        s
    }

    /// `self(c·x)`: coefficient n scaled by cⁿ.
    pub fn rescale_var(&self, c: &BigComplex) -> Self {
        let mut pow = BigComplex::one(self.prec());
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a * &pow);
            pow = &pow * c;
        }
        PowerSeries { coeffs, var: self.var }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one(self.order(), self.var, self.prec());
        for _ in 0..e {
            acc = PowerSeries { coeffs: mul_trunc(&acc.coeffs, &self.coeffs, self.order()), var: self.var };
        }
        acc
    }

    /// `exp(self)`; a nonzero constant term contributes the scalar factor `exp(c₀)`.
    pub fn exp_series(&self) -> Self {
        let a = &self.coeffs;
        let n = self.order();
        let p = self.prec();
        let mut e = Vec::with_capacity(n + 1);
        e.push(a[0].exp());
        // n e_n = Σ_{k=1}^{n} k a_k e_{n-k}
        for m in 1..=n {
            let mut acc = BigComplex::zero(p);
            for k in 1..=m {
                acc.mul_acc(&a[k].scale_i64(k as i64), &e[m - k]);
            }
            e.push(acc.div_i64(m as i64));
        }
        PowerSeries { coeffs: e, var: self.var }
    }

    /// `outer ∘ inner`, tagged with the inner variable.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroInnerConstant);
        }
        let n = outer.order().min(inner.order());
        let p = outer.prec().max(inner.prec());
        let mut acc = vec![BigComplex::zero(p); n + 1];
        for k in (0..=n).rev() {
            acc = mul_trunc(&acc, &inner.coeffs, n);
            acc[0] += &outer.coeffs[k];
        }
        Ok(PowerSeries { coeffs: acc, var: inner.var })
    }

    /// Compositional inverse by Newton iteration, doubling the correct order per step.
    pub fn revert(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() || self.order() < 1 || self.coeffs[1].is_zero() {
            return Err(Error::NonUnitLinearCoefficient);
        }
        let n = self.order();
        let p = self.prec();
        let da = self.derive(Derivative::DVar);
        let mut b = PowerSeries::zero(1, self.var, p);
        b.coeffs[1] = self.coeffs[1].recip();
        let mut m = 1;
        while m < n {
            m = (2 * m).min(n);
            let mut bm = b.coeffs.clone();
            bm.resize(m + 1, BigComplex::zero(p));
            let bm = PowerSeries { coeffs: bm, var: self.var };
            let a_of_b = PowerSeries::compose(&self.truncate(m), &bm)?;
            let da_of_b = PowerSeries::compose(&da.truncate(m), &bm)?;
            let mut resid = a_of_b;
            resid.coeffs[1] -= &BigComplex::one(p);
            let step = resid.div(&da_of_b)?;
            b = bm.sub(&step)?;
        }
        Ok(b)
    }

    pub fn derive(&self, mode: Derivative) -> Self {
        match mode {
            Derivative::Theta => PowerSeries {
                coeffs: self.coeffs.iter().enumerate().map(|(k, c)| c.scale_i64(k as i64)).collect(),
                var: self.var,
            },
            Derivative::DVar => {
                if self.order() == 0 {
                    return PowerSeries::zero(0, self.var, self.prec());
                }
                let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.scale_i64(k as i64)).collect();
                PowerSeries { coeffs, var: self.var }
            }
        }
    }

    /// Horner evaluation with the heuristic tail `|c_N zᴺ|`.
    ///
    /// Fails when the tail exceeds `2^tol_log2`.
    pub fn eval_at(&self, z: &BigComplex, tol_log2: f64) -> Result<(BigComplex, Float)> {
        let (v, tail) = self.eval_unchecked(z);
        let tail_log2 = if tail.is_zero() { f64::NEG_INFINITY } else { tail.clone().log2().to_f64() };
        if tail_log2 > tol_log2 {
            return Err(Error::OutsideConvergenceHeuristic { tail: tail_log2.exp2(), tol: tol_log2.exp2() });
        }
        Ok((v, tail))
    }

    pub fn eval_unchecked(&self, z: &BigComplex) -> (BigComplex, Float) {
        let p = self.prec().max(z.prec());
        let mut acc = BigComplex::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = &acc * z;
            acc += c;
        }
        let n = self.order() as u32;
        let tail = (&self.coeffs[n as usize] * &z.powi(n)).abs();
        (acc, tail)
    }

    /// Largest `log2 |a_n - b_n|` over the common range.
    pub fn max_log2_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        (0..=n).map(|k| (&self.coeffs[k] - &other.coeffs[k]).log2_abs()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_json(&self, hex: bool) -> SeriesJson {
        SeriesJson {
            variable: self.var,
            precision_bits: self.prec(),
            order: self.order(),
            coeffs: self.coeffs.iter().map(|c| c.to_strings(hex)).collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        if j.coeffs.is_empty() {
            return Err(Error::InvalidInput("series with no coefficients".into()));
        }
        let coeffs = j.coeffs.iter().map(|s| BigComplex::from_strings(s, j.precision_bits)).collect::<Result<Vec<_>>>()?;
        Ok(PowerSeries { coeffs, var: j.variable })
    }
}

/// Serialized series: coefficients as `[re, im]` decimal (or `0x` hex) strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub variable: Var,
    pub precision_bits: u32,
    pub order: usize,
    pub coeffs: Vec<[String; 2]>,
}

/// Product truncated to degree `n`.
pub(crate) fn mul_trunc(a: &[BigComplex], b: &[BigComplex], n: usize) -> Vec<BigComplex> {
    let p = a[0].prec().max(b[0].prec());
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = BigComplex::zero(p);
        let lo = k.saturating_sub(b.len() - 1);
        for i in lo..=k.min(a.len() - 1) {
            acc.mul_acc(&a[i], &b[k - i]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 192;

    fn s(v: &[f64], n: usize) -> PowerSeries {
        PowerSeries::from_f64(v, n, Var::T, P)
    }

    #[test]
    fn polynomial_product() {
        let p = s(&[1.0, 1.0], 4).mul(&s(&[1.0, -1.0], 4)).unwrap();
        assert!(p.max_log2_diff(&s(&[1.0, 0.0, -1.0], 4)) == f64::NEG_INFINITY);
    }

    #[test]
    fn division_by_self() {
        let a = s(&[2.0, -1.0, 0.5, 3.0], 8);
        let q = a.div(&a).unwrap();
        assert!(q.max_log2_diff(&PowerSeries::one(8, Var::T, P)) < -180.0);
        assert_eq!(s(&[0.0, 1.0], 3).recip().unwrap_err(), Error::DivisionByZeroSeries);
    }

    #[test]
    fn tag_mismatch_is_an_error() {
        let a = s(&[1.0], 2);
        let b = PowerSeries::one(2, Var::SmallQ, P);
        assert!(matches!(a.add(&b), Err(Error::TagMismatch(..))));
        assert!(matches!(a.mul(&b), Err(Error::TagMismatch(..))));
    }

    #[test]
    fn mixing_orders_takes_min() {
        assert_eq!(s(&[1.0], 3).mul(&s(&[1.0], 7)).unwrap().order(), 3);
    }

    #[test]
    fn exp_of_zero_and_inverse_pair() {
        let z = PowerSeries::zero(5, Var::T, P);
        assert!(z.exp_series().max_log2_diff(&PowerSeries::one(5, Var::T, P)) == f64::NEG_INFINITY);
        let a = s(&[0.0, 0.7, -0.2, 1.5], 12);
        let e = a.exp_series().mul(&a.neg().exp_series()).unwrap();
        assert!(e.max_log2_diff(&PowerSeries::one(12, Var::T, P)) < -180.0);
    }

    #[test]
    fn compose_with_identity_and_errors() {
        let f = s(&[1.0, 2.0, 3.0], 6);
        let id = PowerSeries::identity(6, Var::BigQ, P);
        let c = PowerSeries::compose(&f, &id).unwrap();
        assert_eq!(c.var(), Var::BigQ);
        assert!(c.retag(Var::T).max_log2_diff(&f) == f64::NEG_INFINITY);
        assert_eq!(PowerSeries::compose(&f, &s(&[1.0, 1.0], 6)).unwrap_err(), Error::NonzeroInnerConstant);
    }

    #[test]
    fn revert_geometric_inverse() {
        // x/(1+x) is its own shape under inversion: inverse is x/(1-x)
        let a = s(&[0.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0], 8);
        let b = a.revert().unwrap();
        let want = s(&[0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 8);
        assert!(b.max_log2_diff(&want) < -180.0);
        assert_eq!(s(&[0.0, 0.0, 1.0], 4).revert().unwrap_err(), Error::NonUnitLinearCoefficient);
        let id = PowerSeries::identity(7, Var::T, P);
        assert!(id.revert().unwrap().max_log2_diff(&id) == f64::NEG_INFINITY);
    }

    #[test]
    fn derivatives() {
        let q = PowerSeries::identity(5, Var::SmallQ, P);
        assert!(q.derive(Derivative::Theta).max_log2_diff(&q) == f64::NEG_INFINITY);
        let d = s(&[1.0, 0.25], 3).derive(Derivative::DVar);
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff(0).to_c64(), (0.25, 0.0));
        assert_eq!(d.coeff(1).to_c64(), (0.0, 0.0));
    }

    #[test]
    fn eval_geometric_series() {
        let g = PowerSeries::from_f64(&[1.0; 200], 199, Var::T, P);
        let half = BigComplex::from_f64(P, 0.5, 0.0);
        let (v, tail) = g.eval_at(&half, -150.0).unwrap();
        assert!((v.re.to_f64() - 2.0).abs() < 1e-15);
        assert!(tail.to_f64() < 1e-59);
        assert!(matches!(g.eval_at(&BigComplex::from_f64(P, 0.99, 0.0), -150.0), Err(Error::OutsideConvergenceHeuristic { .. })));
        let (v, _) = s(&[1.0, 1.0], 1).eval_unchecked(&BigComplex::zero(P));
        assert_eq!(v.to_c64(), (1.0, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let a = s(&[1.0, -0.1, 1.0 / 3.0], 2).scale(&BigComplex::from_f64(P, 0.3, 0.7));
        for hex in [false, true] {
            let j = a.to_json(hex);
            let text = serde_json::to_string(&j).unwrap();
            let back = PowerSeries::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(back, a);
        }
    }
}
