//! Automorphisms of the four-punctured sphere `{0, 1, α⁻¹, ∞}` and the parabolic
//! generators of its uniformizing group.

use std::collections::VecDeque;
use std::fmt;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::check_alpha;
use crate::num::{frac, pi, BigComplex};

/// 2×2 matrix acting by `τ ↦ (aτ + b)/(cτ + d)`.
#[derive(Clone, PartialEq)]
pub struct MoebiusMatrix {
    pub m: [BigComplex; 4],
}

impl fmt::Debug for MoebiusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.m[0], self.m[1], self.m[2], self.m[3])
    }
}

impl MoebiusMatrix {
    pub fn new(a: BigComplex, b: BigComplex, c: BigComplex, d: BigComplex) -> Self {
        MoebiusMatrix { m: [a, b, c, d] }
    }

    pub fn from_real(a: Float, b: Float, c: Float, d: Float) -> Self {
        Self::new(BigComplex::from_real(a), BigComplex::from_real(b), BigComplex::from_real(c), BigComplex::from_real(d))
    }

    pub fn identity(prec: u32) -> Self {
        Self::new(BigComplex::one(prec), BigComplex::zero(prec), BigComplex::zero(prec), BigComplex::one(prec))
    }

    /// `T = [[1, 1], [0, 1]]`.
    pub fn translation(prec: u32) -> Self {
        Self::new(BigComplex::one(prec), BigComplex::one(prec), BigComplex::zero(prec), BigComplex::one(prec))
    }

    pub fn prec(&self) -> u32 {
        self.m.iter().map(BigComplex::prec).max().unwrap_or(64)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &o.m;
        Self::new(&(a * e) + &(b * g), &(a * f) + &(b * h), &(c * e) + &(d * g), &(c * f) + &(d * h))
    }

    pub fn det(&self) -> BigComplex {
        &(&self.m[0] * &self.m[3]) - &(&self.m[1] * &self.m[2])
    }

    pub fn trace(&self) -> BigComplex {
        &self.m[0] + &self.m[3]
    }

    pub fn inverse(&self) -> Self {
        let inv = self.det().recip();
        Self::new(&self.m[3] * &inv, -(&self.m[1] * &inv), -(&self.m[2] * &inv), &self.m[0] * &inv)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.m[0], -&self.m[1], -&self.m[2], -&self.m[3])
    }

    pub fn apply(&self, tau: &BigComplex) -> BigComplex {
        &(&(&self.m[0] * tau) + &self.m[1]) / &(&(&self.m[2] * tau) + &self.m[3])
    }

    /// Automorphy factor `cτ + d`.
    pub fn j_factor(&self, tau: &BigComplex) -> BigComplex {
        &(&self.m[2] * tau) + &self.m[3]
    }

    /// `log2` of the largest entrywise deviation from `other`.
    pub fn log2_dist(&self, other: &Self) -> f64 {
        (0..4).map(|k| (&self.m[k] - &other.m[k]).log2_abs()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Deviation as Möbius maps, i.e. up to the sign of the matrix.
    pub fn log2_dist_projective(&self, other: &Self) -> f64 {
        self.log2_dist(other).min(self.log2_dist(&other.neg()))
    }

    pub fn to_strings(&self, hex: bool) -> [[String; 2]; 4] {
        [self.m[0].to_strings(hex), self.m[1].to_strings(hex), self.m[2].to_strings(hex), self.m[3].to_strings(hex)]
    }
}

/// Parabolic stabilizer of the cusp `c`: `[[1+cD, −c²D], [D, 1−cD]]`.
pub fn parabolic(c: &Float, d: &Float) -> MoebiusMatrix {
    let p = c.prec().max(d.prec());
    let cd = Float::with_val(p, c * d);
    let c2d = Float::with_val(p, &cd * c);
    MoebiusMatrix::from_real(Float::with_val(p, 1 + &cd), -c2d, d.clone(), Float::with_val(p, 1 - &cd))
}

/// The three involutions of the sphere, as Möbius maps in `t`.
///
/// `φ₀: t ↦ (1−αt)/(α(1−t))`, `φ₁: t ↦ (t−1)/(αt−1)`, `φ₂: t ↦ 1/(αt)`.
pub fn involution_maps(alpha: &BigComplex) -> [MoebiusMatrix; 3] {
    let p = alpha.prec();
    let one = BigComplex::one(p);
    let zero = BigComplex::zero(p);
    [
        MoebiusMatrix::new(-alpha, one.clone(), -alpha, alpha.clone()),
        MoebiusMatrix::new(one.clone(), -&one, alpha.clone(), -&one),
        MoebiusMatrix::new(zero, one, alpha.clone(), BigComplex::zero(p)),
    ]
}

/// Root of `αz² = 1` used as the fixed point of `φ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Z2Branch {
    /// `−1/√α` (principal square root).
    Negative,
    /// `+1/√α`.
    Positive,
}

#[derive(Clone, Debug)]
pub struct Involution {
    pub index: usize,
    pub map: MoebiusMatrix,
    pub fixed_point: BigComplex,
    pub cusp_assignment: &'static str,
}

/// Fixed points `z₀, z₁, z₂` of `φ₀, φ₁, φ₂`.
pub fn fixed_points(alpha: &BigComplex, z2: Z2Branch) -> [BigComplex; 3] {
    let p = alpha.prec();
    let inv = alpha.recip();
    let z0 = &BigComplex::one(p) - &(&(alpha * &(alpha - 1.0)).sqrt() * &inv);
    let s = (&BigComplex::one(p) - alpha).sqrt();
    let plus = &(&BigComplex::one(p) + &s) * &inv;
    let minus = &(&BigComplex::one(p) - &s) * &inv;
    // ℑz₁ > 0; on a tie (real roots) the larger real part
    let z1 = match plus.im.partial_cmp(&minus.im) {
        Some(std::cmp::Ordering::Greater) => plus,
        Some(std::cmp::Ordering::Less) => minus,
        _ => {
            if plus.re >= minus.re {
                plus
            } else {
                minus
            }
        }
    };
    let r = alpha.sqrt().recip();
    let z2 = match z2 {
        Z2Branch::Negative => -r,
        Z2Branch::Positive => r,
    };
    [z0, z1, z2]
}

pub fn involutions(alpha: &BigComplex, z2: Z2Branch) -> [Involution; 3] {
    let maps = involution_maps(alpha);
    let fps = fixed_points(alpha, z2);
    let labels = ["0", "c1", "c2"];
    let mut it = maps.into_iter().zip(fps).enumerate().map(|(k, (map, z))| Involution {
        index: k,
        map,
        fixed_point: z,
        cusp_assignment: labels[k],
    });
    [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
}

/// One step of the S₃ × conjugation action on the puncture `w = α⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// `w ↦ 1 − w`
    Reflect,
    /// `w ↦ 1/w`
    Invert,
    /// `w ↦ w̄`
    Conjugate,
}

impl Step {
    pub fn apply(self, w: &BigComplex) -> BigComplex {
        match self {
            Step::Reflect => &BigComplex::one(w.prec()) - w,
            Step::Invert => w.recip(),
            Step::Conjugate => w.conj(),
        }
    }
}

/// Steps taking the caller's puncture into the target region, in application order.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformRecord {
    pub original_w: BigComplex,
    pub normalized_w: BigComplex,
    pub steps: Vec<Step>,
}

impl TransformRecord {
    pub fn identity(w: &BigComplex) -> Self {
        TransformRecord { original_w: w.clone(), normalized_w: w.clone(), steps: Vec::new() }
    }
}

fn in_region(w: &BigComplex, closed_circle: bool) -> bool {
    let (x, y) = w.to_c64();
    let r = x.hypot(y);
    x > 0.0 && y >= 0.0 && if closed_circle { r <= 1.0 + 1e-15 } else { r < 1.0 }
}

/// Map `w ∉ {0, 1}` to `α` with `α⁻¹` in `{|w| < 1, ℜw > 0, ℑw ≥ 0}`.
pub fn normalize_domain(w: &BigComplex) -> Result<(BigComplex, TransformRecord)> {
    let p = w.prec();
    if w.log2_abs() < -f64::from(p) + 8.0 {
        return Err(Error::DegeneratePuncture("w = 0".into()));
    }
    check_alpha(&w.recip()).map_err(|_| Error::DegeneratePuncture(format!("w = {w:?}")))?;
    for closed in [false, true] {
        let mut queue = VecDeque::from([(w.clone(), Vec::<Step>::new())]);
        while let Some((v, steps)) = queue.pop_front() {
            if in_region(&v, closed) {
                let rec = TransformRecord { original_w: w.clone(), normalized_w: v.clone(), steps };
                return Ok((v.recip(), rec));
            }
            if steps.len() >= 4 {
                continue;
            }
            for s in [Step::Conjugate, Step::Reflect, Step::Invert] {
                if steps.last() == Some(&s) {
                    continue;
                }
                let mut next = steps.clone();
                next.push(s);
                queue.push_back((s.apply(&v), next));
            }
        }
    }
    Err(Error::DegeneratePuncture(format!("no normal form for w = {w:?}")))
}

/// Cusp representatives from `Q₀, Q₁, Q₂`.
#[derive(Clone, Debug)]
pub struct CuspData {
    pub c1: Float,
    pub c2: Float,
    /// `ℑ log(Q_j/Q₀)/(2πi) = 1/√D_j − 1/√D₀`, in sorted order.
    pub imag_parts: [Float; 2],
    /// True if the cusp of `φ₁` received the larger representative.
    pub swapped: bool,
}

pub fn cusp_representatives(q0: &BigComplex, q1: &BigComplex, q2: &BigComplex) -> Result<CuspData> {
    if q0.is_zero() || q1.is_zero() || q2.is_zero() {
        return Err(Error::ZeroQ);
    }
    let p = q0.prec();
    let two_pi = Float::with_val(p, pi(p) * 2u32);
    let rep = |q: &BigComplex| -> (Float, Float) {
        let ratio = q / q0;
        let re = frac(&Float::with_val(p, ratio.arg() / &two_pi));
        let im = Float::with_val(p, -ratio.abs().ln() / &two_pi);
        (re, im)
    };
    let (a, ia) = rep(q1);
    let (b, ib) = rep(q2);
    if a <= b {
        Ok(CuspData { c1: a, c2: b, imag_parts: [ia, ib], swapped: false })
    } else {
        Ok(CuspData { c1: b, c2: a, imag_parts: [ib, ia], swapped: true })
    }
}

/// `(D₀, D₁, D₂) = (1/(c₁(1−c₂)), 1/(c₁(c₂−c₁)), 1/((c₂−c₁)(1−c₂)))`.
pub fn stabilizer_constants(c1: &Float, c2: &Float) -> Result<[Float; 3]> {
    if !(*c1 > 0 && c1 < c2 && *c2 < 1) {
        return Err(Error::OrderingViolation { c1: c1.to_f64(), c2: c2.to_f64() });
    }
    let p = c1.prec().max(c2.prec());
    let one_m_c2 = Float::with_val(p, 1 - c2);
    let gap = Float::with_val(p, c2 - c1);
    Ok([
        Float::with_val(p, c1 * &one_m_c2).recip(),
        Float::with_val(p, c1 * &gap).recip(),
        Float::with_val(p, &gap * &one_m_c2).recip(),
    ])
}

/// Exact variant over the rationals.
pub fn stabilizer_constants_exact(c1: &Rational, c2: &Rational) -> Result<[Rational; 3]> {
    if !(*c1 > 0 && c1 < c2 && *c2 < 1) {
        return Err(Error::OrderingViolation { c1: c1.to_f64(), c2: c2.to_f64() });
    }
    let one_m_c2 = Rational::from(1) - c2;
    let gap = Rational::from(c2 - c1);
    Ok([
        Rational::from(c1 * &one_m_c2).recip(),
        Rational::from(c1 * &gap).recip(),
        Rational::from(&gap * &one_m_c2).recip(),
    ])
}

/// Exact `[[1+cD, −c²D], [D, 1−cD]]` as `[a, b, c, d]`.
pub fn parabolic_exact(c: &Rational, d: &Rational) -> [Rational; 4] {
    let cd = Rational::from(c * d);
    let c2d = Rational::from(&cd * c);
    [Rational::from(1 + &cd), -c2d, d.clone(), Rational::from(1 - &cd)]
}

pub fn mul_exact(x: &[Rational; 4], y: &[Rational; 4]) -> [Rational; 4] {
    let e = |a: &Rational, b: &Rational, c: &Rational, d: &Rational| Rational::from(a * b) + Rational::from(c * d);
    [e(&x[0], &y[0], &x[1], &y[2]), e(&x[0], &y[1], &x[1], &y[3]), e(&x[2], &y[0], &x[3], &y[2]), e(&x[2], &y[1], &x[3], &y[3])]
}

/// `S_{c₂}·S_{c₁}·S₀·T⁻¹` in exact arithmetic.
pub fn relation_product_exact(c1: &Rational, c2: &Rational) -> Result<[Rational; 4]> {
    let [d0, d1, d2] = stabilizer_constants_exact(c1, c2)?;
    let zero = Rational::new();
    let s0 = parabolic_exact(&zero, &d0);
    let s1 = parabolic_exact(c1, &d1);
    let s2 = parabolic_exact(c2, &d2);
    let t_inv = [Rational::from(1), Rational::from(-1), Rational::new(), Rational::from(1)];
    Ok(mul_exact(&mul_exact(&mul_exact(&s2, &s1), &s0), &t_inv))
}

#[derive(Clone, Debug)]
pub struct GroupData {
    pub c1: Float,
    pub c2: Float,
    pub d: [Float; 3],
    pub t: MoebiusMatrix,
    pub s0: MoebiusMatrix,
    pub sc1: MoebiusMatrix,
    pub sc2: MoebiusMatrix,
    /// `log2` deviation of `S_{c₂}S_{c₁}S₀T⁻¹` from the identity.
    pub relation_log2_dev: f64,
}

impl GroupData {
    /// Generator `S` and cusp `c` for residual index `j ∈ {1, 2, 3}`.
    pub fn generator(&self, j: usize) -> (&MoebiusMatrix, Float, &Float) {
        let p = self.c1.prec();
        match j {
            1 => (&self.s0, Float::new(p), &self.d[0]),
            2 => (&self.sc1, self.c1.clone(), &self.d[1]),
            _ => (&self.sc2, self.c2.clone(), &self.d[2]),
        }
    }

    pub fn generators(&self) -> [&MoebiusMatrix; 4] {
        [&self.t, &self.s0, &self.sc1, &self.sc2]
    }
}

pub fn build_generators(c1: &Float, c2: &Float, d: &[Float; 3]) -> Result<GroupData> {
    let p = c1.prec().max(c2.prec());
    let s0 = parabolic(&Float::new(p), &d[0]);
    let sc1 = parabolic(c1, &d[1]);
    let sc2 = parabolic(c2, &d[2]);
    let t = MoebiusMatrix::translation(p);
    let prod = sc2.mul(&sc1).mul(&s0).mul(&t.inverse());
    let dev = prod.log2_dist(&MoebiusMatrix::identity(p));
    let scale = d.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max).log2();
    if dev - 2.0 * scale > -f64::from(p) + 16.0 {
        return Err(Error::RelationViolation { log2_dev: dev });
    }
    Ok(GroupData { c1: c1.clone(), c2: c2.clone(), d: d.clone(), t, s0, sc1, sc2, relation_log2_dev: dev })
}

/// `W = √D·[[c, (−1−c²D)/D], [1, −c]]`: traceless, `W² = −I`, and `W·T⁻¹·W⁻¹ = S_c`.
pub fn involution_lift(c: &Float, d: &Float) -> MoebiusMatrix {
    let p = c.prec().max(d.prec());
    let s = Float::with_val(p, d.sqrt_ref());
    let c2d = Float::with_val(p, c * c) * d;
    let b = -(c2d + 1u32) / d;
    let sc = Float::with_val(p, &s * c);
    MoebiusMatrix::from_real(sc.clone(), Float::with_val(p, &s * &b), s.clone(), -sc)
}

/// Fixed point `c + i/√D` of the involution lift.
pub fn lift_fixed_point(c: &Float, d: &Float) -> BigComplex {
    let p = c.prec().max(d.prec());
    BigComplex::from_parts(c.clone(), Float::with_val(p, d.sqrt_ref()).recip())
}

/// `r = Q₀·exp(2π/√D₀)`.
pub fn scale_factor(q0: &BigComplex, d0: &Float) -> Result<BigComplex> {
    if d0.is_nan() || *d0 <= 0 {
        return Err(Error::InvalidInput("D0 must be positive".into()));
    }
    let p = q0.prec();
    let e = Float::with_val(p, pi(p) * 2u32) / Float::with_val(p, d0.sqrt_ref());
    Ok(q0.scale(&e.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    #[test]
    fn anchor_generators_and_relation() {
        let c1 = Float::with_val(P, 0.25);
        let c2 = Float::with_val(P, 0.5);
        let d = stabilizer_constants(&c1, &c2).unwrap();
        assert_eq!(d.iter().map(|x| x.to_f64()).collect::<Vec<_>>(), vec![8.0, 16.0, 8.0]);
        let g = build_generators(&c1, &c2, &d).unwrap();
        assert_eq!(g.relation_log2_dev, f64::NEG_INFINITY);
        assert_eq!(g.s0.m[2].to_c64(), (8.0, 0.0));
    }

    #[test]
    fn ordering_violation() {
        let a = Float::with_val(P, 0.5);
        let b = Float::with_val(P, 0.25);
        assert!(matches!(stabilizer_constants(&a, &b), Err(Error::OrderingViolation { .. })));
    }

    #[test]
    fn fixed_points_at_two() {
        let a = BigComplex::from_f64(P, 2.0, 0.0);
        let [z0, z1, z2] = fixed_points(&a, Z2Branch::Negative);
        assert!((z0.re.to_f64() - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert_eq!(z1.to_c64(), (0.5, 0.5));
        assert!((z2.re.to_f64() + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let w = BigComplex::from_f64(P, 0.5, 0.0);
        let (a, rec) = normalize_domain(&w).unwrap();
        assert_eq!(a.to_c64(), (2.0, 0.0));
        assert!(rec.steps.is_empty());
        let (_, rec) = normalize_domain(&BigComplex::from_f64(P, 0.3, -0.1)).unwrap();
        assert_eq!(rec.steps, vec![Step::Conjugate]);
        let (a, rec) = normalize_domain(&BigComplex::from_f64(P, 2.0, 0.0)).unwrap();
        assert_eq!(rec.steps, vec![Step::Invert]);
        assert_eq!(a.to_c64(), (2.0, 0.0));
        assert!(normalize_domain(&BigComplex::one(P)).is_err());
        assert!(normalize_domain(&BigComplex::zero(P)).is_err());
    }

    #[test]
    fn scale_factor_rearranges() {
        let q0 = BigComplex::from_f64(P, 0.01, 0.0);
        let d0 = Float::with_val(P, 8);
        let r = scale_factor(&q0, &d0).unwrap();
        let back = r.scale(&(-Float::with_val(P, pi(P) * 2u32) / Float::with_val(P, d0.sqrt_ref())).exp());
        assert!(back.dist_f64(&q0) < 1e-35);
    }
}
