//! Multiprecision complex scalars built on MPFR floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;

use crate::error::{Error, Result};

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

pub fn real(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Parse a real decimal or `0x`-prefixed hexadecimal string.
pub fn parse_real(s: &str, prec: u32) -> Result<Float> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let parsed = if let Some(hex) = body.strip_prefix("0x") {
        Float::parse_radix(hex, 16)
    } else {
        Float::parse(body)
    }
    .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    let x = parsed.complete(prec);
    Ok(if neg { -x } else { x })
}

/// Number of decimal digits that round-trip a `prec`-bit mantissa.
pub fn decimal_digits(prec: u32) -> usize {
    (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 2
}

pub fn format_real(x: &Float, hex: bool) -> String {
    if hex {
        let s = x.to_string_radix(16, None);
        match s.strip_prefix('-') {
            Some(rest) => format!("-0x{rest}"),
            None => format!("0x{s}"),
        }
    } else {
        x.to_string_radix(10, Some(decimal_digits(x.prec())))
    }
}

/// Complex number with MPFR real and imaginary parts.
///
/// Binary operations round to the larger operand precision.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6e} {:+.6e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(20);
        let re = self.re.to_string_radix(10, Some(d));
        let im = self.im.to_string_radix(10, Some(d));
        if self.im.is_sign_negative() {
            write!(f, "{re}{im}i")
        } else {
            write!(f, "{re}+{im}i")
        }
    }
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Self::from_f64(prec, 0.0, 1.0)
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        BigComplex { re: real(prec, re), im: real(prec, im) }
    }

    pub fn from_i64(prec: u32, n: i64) -> Self {
        BigComplex { re: Float::with_val(prec, n), im: Float::new(prec) }
    }

    pub fn from_real(x: Float) -> Self {
        let im = Float::new(x.prec());
        BigComplex { re: x, im }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        let p = re.prec().max(im.prec());
        BigComplex { re: Float::with_val(p, re), im: Float::with_val(p, im) }
    }

    /// Exact rational `num/den` rounded once.
    pub fn ratio(prec: u32, num: i64, den: i64) -> Self {
        let mut re = Float::with_val(prec, num);
        re /= den;
        Self::from_real(re)
    }

    /// Parse `a`, `a+bi`, `a-bi`, `bi` or a JSON-style pair written as `a,b`.
    pub fn parse(s: &str, prec: u32) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty number".into()));
        }
        if let Some((a, b)) = s.split_once(',') {
            return Ok(BigComplex { re: parse_real(a, prec)?, im: parse_real(b, prec)? });
        }
        let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
            return Ok(Self::from_real(parse_real(&s, prec)?));
        };
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k];
            if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E' | b'@') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (parse_real(&body[..k], prec)?, &body[k..]),
            None => (Float::new(prec), body),
        };
        let im = match im {
            "" | "+" => real(prec, 1.0),
            "-" => real(prec, -1.0),
            other => parse_real(other, prec)?,
        };
        Ok(BigComplex { re, im })
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Float {
        let mut n = Float::with_val(self.prec(), self.re.square_ref());
        n += &self.im * &self.im;
        n
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn scale(&self, x: &Float) -> Self {
        let p = self.prec().max(x.prec());
        BigComplex {
            re: Float::with_val(p, &self.re * x),
            im: Float::with_val(p, &self.im * x),
        }
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        BigComplex { re: Float::with_val(self.prec(), &self.re * n), im: Float::with_val(self.prec(), &self.im * n) }
    }

    pub fn div_i64(&self, n: i64) -> Self {
        BigComplex { re: Float::with_val(self.prec(), &self.re / n), im: Float::with_val(self.prec(), &self.im / n) }
    }

    pub fn mul_i(&self) -> Self {
        BigComplex { re: -self.im.clone(), im: self.re.clone() }
    }

    /// `self += a * b` without temporaries.
    pub fn mul_acc(&mut self, a: &BigComplex, b: &BigComplex) {
        self.re += &a.re * &b.re;
        self.re -= &a.im * &b.im;
        self.im += &a.re * &b.im;
        self.im += &a.im * &b.re;
    }

    /// `self -= a * b` without temporaries.
    pub fn mul_sub(&mut self, a: &BigComplex, b: &BigComplex) {
        self.re -= &a.re * &b.re;
        self.re += &a.im * &b.im;
        self.im -= &a.re * &b.im;
        self.im -= &a.im * &b.re;
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        BigComplex {
            re: Float::with_val(self.prec(), &self.re / &n),
            im: -Float::with_val(self.prec(), &self.im / &n),
        }
    }

    pub fn sqr(&self) -> Self {
        self * self
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = BigComplex::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    /// Principal square root, branch cut on the negative real axis.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return BigComplex::zero(p);
        }
        let r = self.abs();
        let two = real(p, 2.0);
        if !self.re.is_sign_negative() {
            let s = Float::with_val(p, &r + &self.re);
            let s = Float::with_val(p, &s / &two).sqrt();
            let im = Float::with_val(p, &self.im / &s) / 2u32;
            BigComplex { re: s, im }
        } else {
            let t = Float::with_val(p, &r - &self.re);
            let mut t = Float::with_val(p, &t / &two).sqrt();
            if self.im.is_sign_negative() {
                t = -t;
            }
            let re = Float::with_val(p, &self.im / &t) / 2u32;
            BigComplex { re, im: t }
        }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        BigComplex { re: Float::with_val(p, &m * &c), im: Float::with_val(p, &m * &s) }
    }

    /// Principal logarithm, imaginary part in (-π, π].
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        let p = self.prec();
        Ok(BigComplex { re: self.abs().ln(), im: Float::with_val(p, self.im.atan2_ref(&self.re)) })
    }

    /// `|self - other|` as f64, for tolerance bookkeeping.
    pub fn dist_f64(&self, other: &BigComplex) -> f64 {
        (self - other).abs_f64()
    }

    /// `log2 |self|`, `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.abs().log2().to_f64()
    }

    pub fn to_strings(&self, hex: bool) -> [String; 2] {
        [format_real(&self.re, hex), format_real(&self.im, hex)]
    }

    pub fn from_strings(s: &[String; 2], prec: u32) -> Result<Self> {
        Ok(BigComplex { re: parse_real(&s[0], prec)?, im: parse_real(&s[1], prec)? })
    }
}

/// Compare two reals given as f64 where a total order is needed.
pub fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Reduce a real into `[0, 1)`.
pub fn frac(x: &Float) -> Float {
    let mut f = Float::with_val(x.prec(), x.floor_ref());
    f = Float::with_val(x.prec(), x - &f);
    if f >= 1 {
        f -= 1;
    }
    f
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &BigComplex) -> BigComplex {
                let f: fn(&BigComplex, &BigComplex, u32) -> BigComplex = $body;
                f(self, rhs, self.prec().max(rhs.prec()))
            }
        }
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: &BigComplex) -> BigComplex {
                (&self).$m(rhs)
            }
        }
        impl $tr<BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $m(self, rhs: BigComplex) -> BigComplex {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b, p| BigComplex {
    re: Float::with_val(p, &a.re + &b.re),
    im: Float::with_val(p, &a.im + &b.im),
});
binop!(Sub, sub, |a, b, p| BigComplex {
    re: Float::with_val(p, &a.re - &b.re),
    im: Float::with_val(p, &a.im - &b.im),
});
binop!(Mul, mul, |a, b, p| {
    let mut re = Float::with_val(p, &a.re * &b.re);
    re -= &a.im * &b.im;
    let mut im = Float::with_val(p, &a.re * &b.im);
    im += &a.im * &b.re;
    BigComplex { re, im }
});
binop!(Div, div, |a, b, p| {
    let n = b.norm_sqr();
    let mut re = Float::with_val(p, &a.re * &b.re);
    re += &a.im * &b.im;
    let mut im = Float::with_val(p, &a.im * &b.re);
    im -= &a.re * &b.im;
    BigComplex { re: re / &n, im: im / &n }
});

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: -self.re, im: -self.im }
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: &BigComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&BigComplex> for BigComplex {
    fn sub_assign(&mut self, rhs: &BigComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&BigComplex> for BigComplex {
    fn mul_assign(&mut self, rhs: &BigComplex) {
        *self = &*self * rhs;
    }
}

impl Add<&Float> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &Float) -> BigComplex {
        BigComplex { re: Float::with_val(self.prec(), &self.re + rhs), im: self.im.clone() }
    }
}

impl Sub<&Float> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &Float) -> BigComplex {
        BigComplex { re: Float::with_val(self.prec(), &self.re - rhs), im: self.im.clone() }
    }
}

impl Mul<&Float> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &Float) -> BigComplex {
        self.scale(rhs)
    }
}

impl Add<f64> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: f64) -> BigComplex {
        BigComplex { re: Float::with_val(self.prec(), &self.re + rhs), im: self.im.clone() }
    }
}

impl Sub<f64> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: f64) -> BigComplex {
        BigComplex { re: Float::with_val(self.prec(), &self.re - rhs), im: self.im.clone() }
    }
}

impl Mul<f64> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: f64) -> BigComplex {
        BigComplex { re: Float::with_val(self.prec(), &self.re * rhs), im: Float::with_val(self.prec(), &self.im * rhs) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn close(a: &BigComplex, b: &BigComplex, bits: i32) -> bool {
        (a - b).log2_abs() < -f64::from(bits)
    }

    #[test]
    fn parse_forms() {
        let z = BigComplex::parse("0.5+0.001i", P).unwrap();
        assert_eq!(z.to_c64(), (0.5, 0.001));
        let z = BigComplex::parse("-1e-3-2.5i", P).unwrap();
        assert_eq!(z.to_c64(), (-1e-3, -2.5));
        let z = BigComplex::parse("2.5e+2", P).unwrap();
        assert_eq!(z.to_c64(), (250.0, 0.0));
        let z = BigComplex::parse("-i", P).unwrap();
        assert_eq!(z.to_c64(), (0.0, -1.0));
        let z = BigComplex::parse("0.25,-0.75", P).unwrap();
        assert_eq!(z.to_c64(), (0.25, -0.75));
        assert!(BigComplex::parse("", P).is_err());
        assert!(BigComplex::parse("abc", P).is_err());
    }

    #[test]
    fn string_round_trip_is_exact() {
        let z = BigComplex::from_real(pi(P)).mul_i() + BigComplex::ratio(P, 1, 3);
        for hex in [false, true] {
            let s = z.to_strings(hex);
            let back = BigComplex::from_strings(&s, P).unwrap();
            assert_eq!(back, z, "hex={hex}");
        }
    }

    #[test]
    fn sqrt_is_principal() {
        for (x, y) in [(-1.0, 0.0), (-1.0, -0.0), (3.0, 4.0), (-3.0, -4.0), (0.0, 2.0)] {
            let z = BigComplex::from_f64(P, x, y);
            let s = z.sqrt();
            assert!(!s.re.is_sign_negative());
            assert!(close(&s.sqr(), &z, P as i32 - 8));
        }
        let s = BigComplex::from_f64(P, -4.0, 0.0).sqrt();
        assert_eq!(s.to_c64(), (0.0, 2.0));
    }

    #[test]
    fn exp_ln_inverse() {
        let z = BigComplex::from_f64(P, 0.3, -2.9);
        let back = z.exp().ln().unwrap();
        assert!(close(&back, &z, P as i32 - 8));
        assert!(BigComplex::zero(P).ln().is_err());
    }

    #[test]
    fn mixed_precision_takes_max() {
        let a = BigComplex::one(64);
        let b = BigComplex::one(300);
        assert_eq!((&a + &b).prec(), 300);
        assert_eq!((&b * &a).prec(), 300);
    }

    #[test]
    fn frac_reduces() {
        assert_eq!(frac(&real(P, -0.25)).to_f64(), 0.75);
        assert_eq!(frac(&real(P, 2.5)).to_f64(), 0.5);
    }
}
