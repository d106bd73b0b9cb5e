//! q-expansions at the Fuchsian value, Rankin–Cohen brackets and the ring identities they satisfy.
//!
//! Derivatives are `θ = q·d/dq`, which equals `(2πi)⁻¹d/dτ` for cusp width one.

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Qr;
use crate::num::BigComplex;
use crate::poly::{self, Poly};
use crate::series::{Derivative, PowerSeries, SeriesJson};
use crate::solver::UniformizationResult;

/// Precision of the magnitude bookkeeping; only the exponent range matters.
const MAJORANT_PREC: u32 = 24;

/// A q-series with an attached (possibly fractional) weight.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub series: PowerSeries,
    pub weight: Rational,
    pub label: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QExpansionJson {
    pub label: String,
    pub weight: String,
    pub series: SeriesJson,
}

impl QExpansion {
    pub fn new(series: PowerSeries, weight: impl Into<Rational>, label: impl Into<String>) -> Self {
        QExpansion { series, weight: weight.into(), label: label.into() }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        Ok(QExpansion {
            series: self.series.mul(&other.series)?,
            weight: Rational::from(&self.weight + &other.weight),
            label: format!("{}·{}", self.label, other.label),
        })
    }

    pub fn to_json(&self, hex: bool) -> QExpansionJson {
        QExpansionJson { label: self.label.clone(), weight: self.weight.to_string(), series: self.series.to_json(hex) }
    }
}

/// `x(x−1)⋯(x−m+1)/m!` for rational `x`.
pub fn binomial(x: &Rational, m: u32) -> Rational {
    let mut acc = Rational::from(1);
    for j in 0..m {
        acc *= Rational::from(x - j);
        acc /= j + 1;
    }
    acc
}

/// `[f,g]_n = Σ_{r+s=n} (−1)^r C(k+n−1, s) C(l+n−1, r) θ^r f θ^s g`.
pub fn rc_bracket(f: &QExpansion, g: &QExpansion, n: u32) -> Result<QExpansion> {
    let t = Tracked::bracket(&Tracked::exact(&f.series), &f.weight, &Tracked::exact(&g.series), &g.weight, n)?;
    Ok(QExpansion {
        series: t.v,
        weight: Rational::from(&f.weight + &g.weight) + 2 * n,
        label: format!("[{},{}]_{}", f.label, g.label, n),
    })
}

/// A series together with a coefficientwise bound on the magnitudes that entered it.
///
/// Rounding error in `v_n` is a small multiple of `ε·m_n`, so `|v_n|/m_n` measures an
/// identity's deviation independently of how fast the coefficients grow.
#[derive(Clone, Debug)]
struct Tracked {
    v: PowerSeries,
    m: Vec<Float>,
}

impl Tracked {
    fn exact(s: &PowerSeries) -> Self {
        let m = s.coeffs().iter().map(|c| Float::with_val(MAJORANT_PREC, c.abs())).collect();
        Tracked { v: s.clone(), m }
    }

    fn constant(c: &BigComplex, like: &Tracked) -> Self {
        let n = like.v.order();
        let v = PowerSeries::constant(c.clone(), n, like.v.var());
        let mut m = vec![Float::with_val(MAJORANT_PREC, 0); n + 1];
        m[0] = Float::with_val(MAJORANT_PREC, c.abs());
        Tracked { v, m }
    }

    fn order(&self) -> usize {
        self.v.order()
    }

    fn mul(&self, o: &Self) -> Result<Self> {
        let v = self.v.mul(&o.v)?;
        let n = v.order();
        let mut m = vec![Float::with_val(MAJORANT_PREC, 0); n + 1];
        for (i, a) in self.m.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.m.iter().enumerate().take(n + 1 - i) {
                m[i + j] += a * b;
            }
        }
        Ok(Tracked { v, m })
    }

    fn add(&self, o: &Self) -> Result<Self> {
        let v = self.v.add(&o.v)?;
        let m = self.m.iter().zip(&o.m).map(|(a, b)| Float::with_val(MAJORANT_PREC, a + b)).collect();
        Ok(Tracked { v, m })
    }

    fn sub(&self, o: &Self) -> Result<Self> {
        let v = self.v.sub(&o.v)?;
        let m = self.m.iter().zip(&o.m).map(|(a, b)| Float::with_val(MAJORANT_PREC, a + b)).collect();
        Ok(Tracked { v, m })
    }

    fn scale(&self, c: &BigComplex) -> Self {
        let a = Float::with_val(MAJORANT_PREC, c.abs());
        Tracked { v: self.v.scale(c), m: self.m.iter().map(|x| Float::with_val(MAJORANT_PREC, x * &a)).collect() }
    }

    fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&BigComplex::from_real(Float::with_val(self.v.prec(), r)))
    }

    fn theta(&self) -> Self {
        let m = self.m.iter().enumerate().map(|(k, x)| Float::with_val(MAJORANT_PREC, x * k as u32)).collect();
        Tracked { v: self.v.derive(Derivative::Theta), m }
    }

    fn theta_pow(&self, r: u32) -> Self {
        (0..r).fold(self.clone(), |acc, _| acc.theta())
    }

    /// Horner evaluation of a polynomial at this series.
    fn compose_poly(&self, p: &[BigComplex]) -> Result<Self> {
        let mut acc = Tracked::constant(p.last().expect("nonempty polynomial"), self);
        for c in p.iter().rev().skip(1) {
            acc = acc.mul(self)?.add(&Tracked::constant(c, self))?;
        }
        Ok(acc)
    }

    fn bracket(f: &Self, k: &Rational, g: &Self, l: &Rational, n: u32) -> Result<Self> {
        let kk = Rational::from(k + n) - 1u32;
        let ll = Rational::from(l + n) - 1u32;
        let mut acc = Tracked::constant(&BigComplex::zero(f.v.prec()), &f.mul(g)?);
        for r in 0..=n {
            let s = n - r;
            let mut c = binomial(&kk, s) * binomial(&ll, r);
            if r % 2 == 1 {
                c = -c;
            }
            if c == 0 {
                continue;
            }
            let term = f.theta_pow(r).mul(&g.theta_pow(s))?.scale_rational(&c);
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Largest `log2(|v_n|/m_n)` for `n ≤ upto`, and the index attaining it.
    fn relative_deviation(&self, upto: usize, floor: f64) -> (f64, usize) {
        let mut worst = (floor, 0);
        for n in 0..=upto.min(self.order()) {
            let v = &self.v.coeffs()[n];
            if v.is_zero() {
                continue;
            }
            let d = if self.m[n].is_zero() { v.log2_abs() } else { v.log2_abs() - self.m[n].to_f64().log2() };
            if d > worst.0 {
                worst = (d, n);
            }
        }
        worst
    }
}

/// One coefficientwise identity `lhs − rhs = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// `max_n log2(|lhs_n − rhs_n| / majorant_n)`, floored at `−prec − 64`.
    pub max_log2_dev: f64,
    pub worst_index: usize,
    pub checked_to: usize,
    pub threshold_log2: f64,
    pub passed: bool,
    /// Informational checks are reported but never fail a report.
    pub enforced: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.enforced)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// First failing check as an error.
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed && c.enforced) {
            None => Ok(()),
            Some(c) => Err(Error::IdentityViolation { name: c.name.clone(), index: c.worst_index, log2_dev: c.max_log2_dev }),
        }
    }
}

/// Default acceptance level `2^(−P+40)` for identities among q-expansions.
pub fn identity_threshold_log2(prec: u32) -> f64 {
    -f64::from(prec) + 40.0
}

fn judge(name: &str, diff: &Tracked, upto: usize, prec: u32, threshold_log2: f64) -> IdentityCheck {
    let (dev, idx) = diff.relative_deviation(upto, -f64::from(prec) - 64.0);
    IdentityCheck {
        name: name.to_string(),
        max_log2_dev: dev,
        worst_index: idx,
        checked_to: upto.min(diff.order()),
        threshold_log2,
        passed: dev < threshold_log2,
        enforced: true,
    }
}

fn note(name: &str, diff: &Tracked, upto: usize, prec: u32, threshold_log2: f64) -> IdentityCheck {
    IdentityCheck { enforced: false, ..judge(name, diff, upto, prec, threshold_log2) }
}

/// `P(t) = ∏(t − α_j)` over the finite punctures and `κ = (−1)ⁿ ∏_{α_j ≠ 0} α_j`, `n` counting `∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessoryPolynomial {
    pub p: Poly,
    pub kappa: BigComplex,
}

impl AccessoryPolynomial {
    pub fn from_punctures(finite: &[BigComplex]) -> Self {
        let prec = finite.first().map_or(64, BigComplex::prec);
        let n = finite.len() + 1;
        let mut kappa = BigComplex::one(prec);
        for a in finite.iter().filter(|a| !a.is_zero()) {
            kappa = &kappa * a;
        }
        if n % 2 == 1 {
            kappa = -kappa;
        }
        AccessoryPolynomial { p: poly::from_roots(finite, prec), kappa }
    }

    /// Punctures `{0, 1, α⁻¹}`; `κ = α⁻¹`.
    pub fn for_alpha(alpha: &BigComplex) -> Self {
        let p = alpha.prec();
        Self::from_punctures(&[BigComplex::zero(p), BigComplex::one(p), alpha.recip()])
    }
}

/// Series checked for a certified result: `g = F`, `f = g²`, `t`.
struct Forms {
    g: Tracked,
    f: Tracked,
    t: Tracked,
    theta_t: Tracked,
    p_of_t: Tracked,
    pd_of_t: Tracked,
    kappa: BigComplex,
    rho_hat: BigComplex,
    prec: u32,
    upto: usize,
}

impl Forms {
    fn new(res: &UniformizationResult) -> Result<Self> {
        let n = res.f_series.order().min(res.t_series.order());
        let g = Tracked::exact(&res.f_series.truncate(n));
        let t = Tracked::exact(&res.t_series.truncate(n));
        let f = g.mul(&g)?;
        let ap = AccessoryPolynomial::for_alpha(&res.alpha);
        let p_of_t = t.compose_poly(&ap.p)?;
        let pd_of_t = t.compose_poly(&poly::derivative(&ap.p))?;
        Ok(Forms {
            theta_t: t.theta(),
            g,
            f,
            t,
            p_of_t,
            pd_of_t,
            kappa: ap.kappa,
            rho_hat: res.rho_hat_f.clone(),
            prec: res.prec,
            upto: n.saturating_sub(4),
        })
    }

    /// `t − ρ̂`.
    fn t_minus_rho_hat(&self) -> Tracked {
        let c = Tracked::constant(&-&self.rho_hat, &self.t);
        self.t.add(&c).expect("same tags")
    }
}

/// The three uniformization identities as q-series, each checked to order `N − 4`:
///
/// - `theta_t`: `θt = κ⁻¹·f·P(t)`;
/// - `bracket_ratio`: `[f,f]₂·P(t) = −12 f²(θt)²(t − ρ̂)`, the ratio identity cleared of denominators;
/// - `ode`: `P Ψ_tt + P′ Ψ_t + (t − ρ̂)Ψ = 0` for `Ψ = F`, `d/dt = (θt)⁻¹θ`, multiplied by `(θt)³`.
///
/// The sign in `bracket_ratio` follows from `[f,f]₂ = −3c²m²q₀^{2m} + ⋯` for `f = cq₀^m + ⋯`.
/// The positive-sign variant is reported as the informational `bracket_ratio_plus`.
pub fn verify_uniformizing_identities(res: &UniformizationResult) -> Result<IdentityReport> {
    verify_uniformizing_identities_with(res, identity_threshold_log2(res.prec))
}

pub fn verify_uniformizing_identities_with(res: &UniformizationResult, threshold_log2: f64) -> Result<IdentityReport> {
    let fm = Forms::new(res)?;
    let two = Rational::from(2);
    let checks: Vec<Result<Vec<IdentityCheck>>> = (0..3)
        .into_par_iter()
        .map(|which| -> Result<Vec<IdentityCheck>> {
            match which {
                0 => {
                    let rhs = fm.f.mul(&fm.p_of_t)?.scale(&fm.kappa.recip());
                    Ok(vec![judge("theta_t", &fm.theta_t.sub(&rhs)?, fm.upto, fm.prec, threshold_log2)])
                }
                1 => {
                    let ff2 = Tracked::bracket(&fm.f, &two, &fm.f, &two, 2)?;
                    let lhs = ff2.mul(&fm.p_of_t)?;
                    let f2 = fm.f.mul(&fm.f)?;
                    let u2 = fm.theta_t.mul(&fm.theta_t)?;
                    let rhs = f2.mul(&u2)?.mul(&fm.t_minus_rho_hat())?.scale(&BigComplex::from_i64(fm.prec, 12));
                    Ok(vec![
                        judge("bracket_ratio", &lhs.add(&rhs)?, fm.upto, fm.prec, threshold_log2),
                        note("bracket_ratio_plus", &lhs.sub(&rhs)?, fm.upto, fm.prec, threshold_log2),
                    ])
                }
                _ => {
                    let u = &fm.theta_t;
                    let th = fm.g.theta();
                    let th2 = th.theta();
                    let thu = u.theta();
                    // u³·Ψ_tt = u·θ²Ψ − θΨ·θu,  u³·Ψ_t = u²·θΨ
                    let a = u.mul(&th2)?.sub(&th.mul(&thu)?)?.mul(&fm.p_of_t)?;
                    let b = u.mul(u)?.mul(&th)?.mul(&fm.pd_of_t)?;
                    let c = u.mul(u)?.mul(u)?.mul(&fm.g)?.mul(&fm.t_minus_rho_hat())?;
                    Ok(vec![judge("ode", &a.add(&b)?.add(&c)?, fm.upto, fm.prec, threshold_log2)])
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    for c in checks {
        out.extend(c?);
    }
    Ok(IdentityReport { checks: out })
}

/// Bracket identities among three forms `(f, g, h)` of weights `(k, l, m)`, to order `N − 4`.
///
/// Enforced: `m[f,g]₁h + k[g,h]₁f + l[h,f]₁g = 0`; the Jacobi identity for `[·,·]₁`;
/// `k·f[[f,g]₁,g]₁ = (k+l+2)[f,g]₁² + l·g[[f,g]₁,f]₁`; and the quadratic identity below with `g = f`.
///
/// Informational: `k²(k+1)f²[g,g]₂ = l²(l+1)g²[f,f]₂ − (k+1)(l+1)[f,g]₁² + l(l+1)g[[f,g]₁,f]₁`
/// for distinct `f, g`, which does not hold for generic series.
pub fn verify_bracket_identities(forms: &[QExpansion], prec: u32) -> Result<IdentityReport> {
    if forms.len() < 3 {
        return Err(Error::InvalidInput(format!("need three forms, got {}", forms.len())));
    }
    let threshold = identity_threshold_log2(prec);
    let (f, g, h) = (&forms[0], &forms[1], &forms[2]);
    let n = f.series.order().min(g.series.order()).min(h.series.order());
    let upto = n.saturating_sub(4);
    let tf = Tracked::exact(&f.series.truncate(n));
    let tg = Tracked::exact(&g.series.truncate(n));
    let th = Tracked::exact(&h.series.truncate(n));
    let (k, l, m) = (&f.weight, &g.weight, &h.weight);
    let br1 = |a: &Tracked, wa: &Rational, b: &Tracked, wb: &Rational| Tracked::bracket(a, wa, b, wb, 1);

    let fg = br1(&tf, k, &tg, l)?;
    let gh = br1(&tg, l, &th, m)?;
    let hf = br1(&th, m, &tf, k)?;
    let w_fg = Rational::from(k + l) + 2u32;
    let w_gh = Rational::from(l + m) + 2u32;
    let w_hf = Rational::from(m + k) + 2u32;

    let rc1 = fg
        .mul(&th)?
        .scale_rational(m)
        .add(&gh.mul(&tf)?.scale_rational(k))?
        .add(&hf.mul(&tg)?.scale_rational(l))?;
    let jacobi = br1(&fg, &w_fg, &th, m)?.add(&br1(&gh, &w_gh, &tf, k)?)?.add(&br1(&hf, &w_hf, &tg, l)?)?;

    let fg_f = br1(&fg, &w_fg, &tf, k)?;
    let fg_g = br1(&fg, &w_fg, &tg, l)?;
    let square = tf
        .mul(&fg_g)?
        .scale_rational(k)
        .sub(&fg.mul(&fg)?.scale_rational(&w_fg))?
        .sub(&tg.mul(&fg_f)?.scale_rational(l))?;

    let quadratic = |a: &Tracked, ka: &Rational, b: &Tracked, kb: &Rational| -> Result<Tracked> {
        let ab = br1(a, ka, b, kb)?;
        let w_ab = Rational::from(ka + kb) + 2u32;
        let ka1 = Rational::from(ka + 1u32);
        let kb1 = Rational::from(kb + 1u32);
        let bb2 = Tracked::bracket(b, kb, b, kb, 2)?;
        let aa2 = Tracked::bracket(a, ka, a, ka, 2)?;
        let lhs = a.mul(a)?.mul(&bb2)?.scale_rational(&(Rational::from(ka * ka) * &ka1));
        let r1 = b.mul(b)?.mul(&aa2)?.scale_rational(&(Rational::from(kb * kb) * &kb1));
        let r2 = ab.mul(&ab)?.scale_rational(&Rational::from(&ka1 * &kb1));
        let r3 = b.mul(&br1(&ab, &w_ab, a, ka)?)?.scale_rational(&Rational::from(kb * &kb1));
        lhs.sub(&r1)?.add(&r2)?.sub(&r3)
    };

    Ok(IdentityReport {
        checks: vec![
            judge("rc1", &rc1, upto, prec, threshold),
            judge("jacobi", &jacobi, upto, prec, threshold),
            judge("bracket_square", &square, upto, prec, threshold),
            judge("rc2_diagonal", &quadratic(&tf, k, &tf, k)?, upto, prec, threshold),
            note("rc2", &quadratic(&tf, k, &tg, l)?, upto, prec, threshold),
        ],
    })
}

/// `f`, `f·t`, `f·t²` from a certified result, each of weight two.
pub fn weight_two_triple(res: &UniformizationResult) -> Result<[QExpansion; 3]> {
    let g = &res.f_series;
    let f = g.mul(g)?;
    let ft = f.mul(&res.t_series)?;
    let ft2 = ft.mul(&res.t_series)?;
    Ok([QExpansion::new(f, 2, "f"), QExpansion::new(ft, 2, "f·t"), QExpansion::new(ft2, 2, "f·t²")])
}

/// `fᵏtⁱ`, `i = 0..2k`, for the four-punctured sphere.
#[derive(Clone, Debug)]
pub struct RingBasis {
    pub k: u32,
    pub elements: Vec<QExpansion>,
    pub rank: usize,
}

/// Basis of weight-`2k` forms; fails unless the leading coefficient block has full rank.
pub fn ring_basis(res: &UniformizationResult, k: u32) -> Result<RingBasis> {
    let dim = 2 * k as usize + 1;
    let g = &res.f_series;
    if g.order() + 1 < dim {
        return Err(Error::InvalidInput(format!("order {} too small for weight {}", g.order(), 2 * k)));
    }
    let f = g.mul(g)?;
    let fk = f.powi(k);
    let mut elements = Vec::with_capacity(dim);
    let mut cur = fk;
    for i in 0..dim {
        let label = match (k, i) {
            (0, _) => "1".to_string(),
            (_, 0) => format!("f^{k}"),
            _ => format!("f^{k}·t^{i}"),
        };
        elements.push(QExpansion::new(cur.clone(), 2 * k, label));
        cur = cur.mul(&res.t_series)?;
    }
    let matrix: Vec<Vec<BigComplex>> =
        (0..dim).map(|row| elements.iter().map(|e| e.series.coeff(row).clone()).collect()).collect();
    let rank = Qr::new(&matrix).rank(-f64::from(res.prec) / 2.0);
    if rank < dim {
        return Err(Error::RankDeficient { weight: 2 * k, rank, expected: dim });
    }
    Ok(RingBasis { k, elements, rank })
}

/// Weight-one generators `g = F`, `g₁ = g·t` and their bracket identities:
/// `g² = f`, `[g,g₁]₁ = κ⁻¹g⁴P(t)`, `[g,g]₂ = −2κ⁻²g⁶P(t)(t − ρ̂)`.
///
/// The informational `bracket_g_g_2_printed` tests `[g,g]₂ = 12κ⁻²g⁶P(t)(t − ρ̂)`, the
/// normalization obtained from the weight-`r` formula with `ρ̂ᵢ = 12ρᵢ/κ²`.
pub fn rational_generators(res: &UniformizationResult) -> Result<(QExpansion, QExpansion, IdentityReport)> {
    let fm = Forms::new(res)?;
    let one = Rational::from(1);
    let threshold = identity_threshold_log2(res.prec);
    let g1 = fm.g.mul(&fm.t)?;

    let f_direct = Tracked::exact(&res.f_series.truncate(fm.g.order())).mul(&fm.g)?;
    let square = f_direct.sub(&fm.f)?;

    let gg1 = Tracked::bracket(&fm.g, &one, &g1, &one, 1)?;
    let g4 = fm.f.mul(&fm.f)?;
    let rhs1 = g4.mul(&fm.p_of_t)?.scale(&fm.kappa.recip());

    let gg2 = Tracked::bracket(&fm.g, &one, &fm.g, &one, 2)?;
    let kinv2 = fm.kappa.recip().sqr();
    let base2 = g4.mul(&fm.f)?.mul(&fm.p_of_t)?.mul(&fm.t_minus_rho_hat())?;
    let rhs2 = base2.scale(&kinv2.scale_i64(-2));
    let printed2 = base2.scale(&kinv2.scale_i64(12));

    let report = IdentityReport {
        checks: vec![
            judge("g_squared", &square, fm.upto, fm.prec, threshold),
            judge("bracket_g_g1", &gg1.sub(&rhs1)?, fm.upto, fm.prec, threshold),
            judge("bracket_g_g_2", &gg2.sub(&rhs2)?, fm.upto, fm.prec, threshold),
            note("bracket_g_g_2_printed", &gg2.sub(&printed2)?, fm.upto, fm.prec, threshold),
        ],
    };
    let g = QExpansion::new(fm.g.v.clone(), 1, "g");
    let g1 = QExpansion::new(g1.v, 1, "g₁");
    Ok((g, g1, report))
}

/// `κ` solved from the `q¹` coefficients of `θt = κ⁻¹ f P(t)`.
pub fn kappa_from_leading(res: &UniformizationResult) -> Result<BigComplex> {
    let fm = Forms::new(res)?;
    let fp = fm.f.mul(&fm.p_of_t)?;
    let den = fm.theta_t.v.coeff(1);
    if den.is_zero() {
        return Err(Error::ZeroDenominator("q¹ coefficient of θt".into()));
    }
    Ok(fp.v.coeff(1) / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Var;

    #[test]
    fn rational_binomial_matches_integer_case() {
        assert_eq!(binomial(&Rational::from(5), 2), 10);
        assert_eq!(binomial(&Rational::from((1, 2)), 2), Rational::from((-1, 8)));
        assert_eq!(binomial(&Rational::from(3), 0), 1);
    }

    #[test]
    fn weight_two_second_bracket_closed_form() {
        let s = PowerSeries::from_f64(&[1.0, 3.0, -2.0, 0.5, 7.0, 1.0], 5, Var::SmallQ, 128);
        let f = QExpansion::new(s.clone(), 2, "f");
        let b = rc_bracket(&f, &f, 2).unwrap();
        let d1 = s.derive(Derivative::Theta);
        let d2 = d1.derive(Derivative::Theta);
        let six = BigComplex::from_i64(128, 6);
        let nine = BigComplex::from_i64(128, 9);
        let expect = s.mul(&d2).unwrap().scale(&six).sub(&d1.mul(&d1).unwrap().scale(&nine)).unwrap();
        assert!(b.series.max_log2_diff(&expect) < -100.0);
        assert_eq!(b.weight, 8);
    }

    #[test]
    fn kappa_for_alpha_two() {
        let ap = AccessoryPolynomial::for_alpha(&BigComplex::from_i64(128, 2));
        assert!((&ap.kappa - &BigComplex::ratio(128, 1, 2)).log2_abs() < -120.0);
        assert_eq!(ap.p.len(), 4);
    }
}
