//! Modular accessory parameters `ρᵢ` versus classical `m_j`, canonical forms, and transport of
//! `ρ_F` back through the normalization of the puncture.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Step, TransformRecord};
use crate::num::BigComplex;
use crate::poly::{self, Poly};

/// Finite punctures `α_j` (∞ implicit), modular parameters `ρ₀…ρ_{n−3}` and classical `m_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessoryData {
    pub punctures: Vec<BigComplex>,
    pub rho_vec: Vec<BigComplex>,
    pub m_vec: Vec<BigComplex>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccessoryJson {
    pub punctures: Vec<[String; 2]>,
    pub rho_vec: Vec<[String; 2]>,
    #[serde(default)]
    pub m_vec: Vec<[String; 2]>,
    /// Residue at infinity from `Σ α_j(1 + m_jα_j)`; output only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_infinity: Option<[String; 2]>,
}

impl AccessoryData {
    /// `P¹ ∖ {0, 1, α⁻¹, ∞}` with `Σρᵢtⁱ = t − ρ/α`.
    pub fn four_punctured(alpha: &BigComplex, rho: &BigComplex) -> Result<Self> {
        let p = alpha.prec().max(rho.prec());
        if alpha.is_zero() {
            return Err(Error::CollidingPunctures("α⁻¹ = ∞".into()));
        }
        let punctures = vec![BigComplex::zero(p), BigComplex::one(p), alpha.recip()];
        let rho_vec = vec![-(rho / alpha), BigComplex::one(p)];
        let m_vec = rho_to_m(&punctures, &rho_vec)?;
        Ok(AccessoryData { punctures, rho_vec, m_vec })
    }

    pub fn to_json(&self, hex: bool) -> AccessoryJson {
        let conv = |v: &[BigComplex]| v.iter().map(|c| c.to_strings(hex)).collect();
        AccessoryJson {
            punctures: conv(&self.punctures),
            rho_vec: conv(&self.rho_vec),
            m_vec: conv(&self.m_vec),
            m_infinity: Some(m_infinity(&self.punctures, &self.m_vec).to_strings(hex)),
        }
    }

    /// Reads punctures and `ρ`; `m` is recomputed from them.
    pub fn from_json(j: &AccessoryJson, prec: u32) -> Result<Self> {
        let conv = |v: &[[String; 2]]| v.iter().map(|s| BigComplex::from_strings(s, prec)).collect::<Result<Vec<_>>>();
        let punctures = conv(&j.punctures)?;
        let rho_vec = conv(&j.rho_vec)?;
        let m_vec = rho_to_m(&punctures, &rho_vec)?;
        Ok(AccessoryData { punctures, rho_vec, m_vec })
    }
}

fn check_distinct(punctures: &[BigComplex]) -> Result<()> {
    for (i, a) in punctures.iter().enumerate() {
        for b in &punctures[i + 1..] {
            if (a - b).is_zero() {
                return Err(Error::CollidingPunctures(format!("{a:?} = {b:?}")));
            }
        }
    }
    Ok(())
}

/// `m_j = Res_{t=α_j} (4Σρᵢtⁱ − P″)/(2P) = (4Σρᵢα_jⁱ − P″(α_j)) / (2P′(α_j))`.
pub fn rho_to_m(punctures: &[BigComplex], rho_vec: &[BigComplex]) -> Result<Vec<BigComplex>> {
    check_distinct(punctures)?;
    if punctures.is_empty() || rho_vec.is_empty() {
        return Err(Error::InvalidInput("empty puncture or parameter list".into()));
    }
    let prec = punctures[0].prec();
    let p = poly::from_roots(punctures, prec);
    let dp = poly::derivative(&p);
    let ddp = poly::derivative(&dp);
    Ok(punctures
        .iter()
        .map(|a| {
            let num = &poly::eval(rho_vec, a).scale_i64(4) - &poly::eval(&ddp, a);
            &num / &poly::eval(&dp, a).scale_i64(2)
        })
        .collect())
}

/// `m_∞ = Σ α_j(1 + m_jα_j)`.
pub fn m_infinity(punctures: &[BigComplex], m_vec: &[BigComplex]) -> BigComplex {
    let prec = punctures.first().map_or(64, BigComplex::prec);
    let mut acc = BigComplex::zero(prec);
    for (a, m) in punctures.iter().zip(m_vec) {
        let inner = &BigComplex::one(prec) + &(m * a);
        acc += &(a * &inner);
    }
    acc
}

/// `(Σm_j, Σα_jm_j − (1 − n/2))`, both zero for a valid parameter set; `n` counts ∞.
pub fn relation_residuals(punctures: &[BigComplex], m_vec: &[BigComplex]) -> (BigComplex, BigComplex) {
    let prec = punctures.first().map_or(64, BigComplex::prec);
    let n = punctures.len() as i64 + 1;
    let mut s = BigComplex::zero(prec);
    let mut w = BigComplex::zero(prec);
    for (a, m) in punctures.iter().zip(m_vec) {
        s += m;
        w += &(a * m);
    }
    // 1 − n/2 = (2 − n)/2
    let target = BigComplex::ratio(prec, 2 - n, 2);
    (s, &w - &target)
}

/// Closed forms `(m₀, m₁, m_α, m_∞)` for the punctures `(0, 1, α⁻¹, ∞)`.
pub fn closed_forms(alpha: &BigComplex, rho: &BigComplex) -> [BigComplex; 4] {
    let p = alpha.prec().max(rho.prec());
    let one = BigComplex::one(p);
    let two_rho = rho.scale_i64(2);
    let am1 = alpha - &one;
    let m0 = &(alpha + &one) - &two_rho;
    let m1 = &(&one - &two_rho) / &am1;
    let ma = &(alpha * &(&two_rho - alpha)) / &am1;
    let minf = &m0 / alpha;
    [m0, m1, ma, minf]
}

/// `num/den` with polynomial numerator and denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Self {
        RationalFunction { num, den }
    }

    pub fn polynomial(num: Poly) -> Self {
        let p = num[0].prec();
        RationalFunction { num, den: vec![BigComplex::one(p)] }
    }

    pub fn add(&self, o: &Self) -> Self {
        RationalFunction {
            num: poly::add(&poly::mul(&self.num, &o.den), &poly::mul(&o.num, &self.den)),
            den: poly::mul(&self.den, &o.den),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        RationalFunction { num: poly::mul(&self.num, &o.num), den: poly::mul(&self.den, &o.den) }
    }

    pub fn scale(&self, c: &BigComplex) -> Self {
        RationalFunction { num: poly::scale(&self.num, c), den: self.den.clone() }
    }

    pub fn derivative(&self) -> Self {
        let a = poly::mul(&poly::derivative(&self.num), &self.den);
        let b = poly::mul(&self.num, &poly::derivative(&self.den));
        let m1 = BigComplex::from_i64(self.num[0].prec(), -1);
        RationalFunction { num: poly::add(&a, &poly::scale(&b, &m1)), den: poly::mul(&self.den, &self.den) }
    }

    pub fn eval(&self, t: &BigComplex) -> BigComplex {
        &poly::eval(&self.num, t) / &poly::eval(&self.den, t)
    }

    /// Largest `log2|c|` over the coefficients of `num·o.den − o.num·den`.
    pub fn log2_distance(&self, o: &Self) -> f64 {
        let m1 = BigComplex::from_i64(self.num[0].prec(), -1);
        let d = poly::add(&poly::mul(&self.num, &o.den), &poly::scale(&poly::mul(&o.num, &self.den), &m1));
        d.iter().map(BigComplex::log2_abs).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Potential `u − p′/2 − p²/4` of `Y″ + pY′ + uY = 0` after removing the first-order term.
pub fn canonical_form(p: &RationalFunction, u: &RationalFunction) -> RationalFunction {
    let prec = p.num[0].prec();
    let half = BigComplex::ratio(prec, -1, 2);
    let quarter = BigComplex::ratio(prec, -1, 4);
    u.add(&p.derivative().scale(&half)).add(&p.mul(p).scale(&quarter))
}

/// `(4PΣρᵢtⁱ − 2PP″ + P′²)/(4P²)` for the operator `(d/dt)P(d/dt) + Σρᵢtⁱ`.
pub fn modular_canonical_potential(punctures: &[BigComplex], rho_vec: &[BigComplex]) -> RationalFunction {
    let prec = punctures[0].prec();
    let p = poly::from_roots(punctures, prec);
    let dp = poly::derivative(&p);
    let ddp = poly::derivative(&dp);
    let four = BigComplex::from_i64(prec, 4);
    let m2 = BigComplex::from_i64(prec, -2);
    let num = poly::add(
        &poly::add(&poly::scale(&poly::mul(&p, rho_vec), &four), &poly::scale(&poly::mul(&p, &ddp), &m2)),
        &poly::mul(&dp, &dp),
    );
    RationalFunction { num, den: poly::scale(&poly::mul(&p, &p), &four) }
}

/// `¼Σ 1/(t−α_j)² + ½Σ m_j/(t−α_j)` at `t`.
pub fn classical_potential(punctures: &[BigComplex], m_vec: &[BigComplex], t: &BigComplex) -> BigComplex {
    let prec = t.prec();
    let mut acc = BigComplex::zero(prec);
    for (a, m) in punctures.iter().zip(m_vec) {
        let inv = (t - a).recip();
        acc += &inv.sqr().div_i64(4);
        acc += &(m * &inv).div_i64(2);
    }
    acc
}

/// `ρ_F` at one step before `step` was applied, from its value after it.
///
/// `w` is the puncture after the step.
pub fn undo_step(step: Step, w: &BigComplex, rho: &BigComplex) -> Result<BigComplex> {
    let one = BigComplex::one(w.prec());
    match step {
        // ρ_F(1 − w) = (wρ_F(w) − 1)/(w − 1)
        Step::Reflect => {
            let den = w - &one;
            if den.is_zero() {
                return Err(Error::ZeroDenominator("reflection at w = 1".into()));
            }
            Ok(&(&(w * rho) - &one) / &den)
        }
        Step::Conjugate => Ok(rho.conj()),
        // ρ_F(1/w) = w·ρ_F(w)
        Step::Invert => Ok(w * rho),
    }
}

/// `ρ_F` at the caller's puncture from its value at the normalized one.
pub fn transport_rho(record: &TransformRecord, rho_normalized: &BigComplex) -> Result<BigComplex> {
    // replay forward to recover the puncture after each step
    let mut ws = Vec::with_capacity(record.steps.len());
    let mut w = record.original_w.clone();
    for s in &record.steps {
        w = s.apply(&w);
        ws.push(w.clone());
    }
    if !ws.is_empty() && w.dist_f64(&record.normalized_w) > 1e-12 * (1.0 + w.abs_f64()) {
        return Err(Error::UnsupportedTransform(format!("steps {:?} do not reach {:?}", record.steps, record.normalized_w)));
    }
    let mut rho = rho_normalized.clone();
    for (s, w_after) in record.steps.iter().zip(&ws).rev() {
        rho = undo_step(*s, w_after, &rho)?;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 192;

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::from_f64(P, re, im)
    }

    #[test]
    fn anchor_conversion() {
        let d = AccessoryData::four_punctured(&c(2.0, 0.0), &c(1.0, 0.0)).unwrap();
        let expect = [1.0, -1.0, 0.0];
        for (m, e) in d.m_vec.iter().zip(expect) {
            assert!((m - &c(e, 0.0)).log2_abs() < -150.0, "{m:?}");
        }
        assert!((&m_infinity(&d.punctures, &d.m_vec) - &c(0.5, 0.0)).log2_abs() < -150.0);
    }

    #[test]
    fn colliding_punctures_rejected() {
        let r = rho_to_m(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], &[c(-0.5, 0.0), c(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::CollidingPunctures(_))));
    }

    #[test]
    fn canonical_form_without_first_order_term_is_identity() {
        let u = RationalFunction::new(vec![c(1.0, 0.0), c(2.0, 1.0)], vec![c(3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let p = RationalFunction::polynomial(vec![c(0.0, 0.0)]);
        assert!(canonical_form(&p, &u).log2_distance(&u) < -150.0);
    }

    #[test]
    fn reflection_undo_is_involutive() {
        let w = c(0.3, 0.1);
        let rho = c(0.7, -0.2);
        let w1 = Step::Reflect.apply(&w);
        let r1 = undo_step(Step::Reflect, &w1, &rho).unwrap();
        let back = undo_step(Step::Reflect, &w, &r1).unwrap();
        assert!((&back - &rho).log2_abs() < -150.0);
    }
}
