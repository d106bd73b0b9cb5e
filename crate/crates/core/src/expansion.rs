//! Local expansion `ρ_F(1/2 + z) = Σ a_{j,k} zʲ z̄ᵏ` fitted from samples along the lines
//! `L_n: z = x(1 + i/n)`.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::Qr;
use crate::num::{format_real, BigComplex};
use crate::solver::solve_puncture;

/// Sampling schedule for the fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub slopes: Vec<u32>,
    pub xs: Vec<f64>,
    pub solver: SolverConfig,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        let mut xs: Vec<f64> = (1..=8).map(|k| 2e-6 * f64::from(k)).collect();
        xs.extend(xs.clone().iter().map(|x| -x));
        ExpansionConfig { slopes: vec![1, 2, 3, 4, 6, 8], xs, solver: SolverConfig::with_prec(160) }
    }
}

/// Point `1/2 + x(1 + i/n)` on the line `L_n`.
pub fn line_point(n: u32, x: f64, prec: u32) -> BigComplex {
    let half = BigComplex::ratio(prec, 1, 2);
    let x = Float::with_val(prec, x);
    let slope = Float::with_val(prec, n).recip();
    let im = Float::with_val(prec, &x * &slope);
    &half + &BigComplex::from_parts(x, im)
}

/// Certified `ρ_F` values along one line; failed solves are listed, not fatal.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub slope: u32,
    pub xs: Vec<f64>,
    pub values: Vec<BigComplex>,
    pub dropped: Vec<(f64, String)>,
}

impl SampleSet {
    /// Rows `x, slope, ℜρ_F, ℑρ_F`.
    pub fn csv_rows(&self, hex: bool) -> Vec<String> {
        self.xs
            .iter()
            .zip(&self.values)
            .map(|(x, v)| format!("{x:e},{},{},{}", self.slope, format_real(&v.re, hex), format_real(&v.im, hex)))
            .collect()
    }
}

/// Samples of `ρ_F` on `L_n`, each solved independently from the anchor `ρ_F(1/2) = 1`.
pub fn sample_line(n: u32, xs: &[f64], cfg: &SolverConfig) -> Result<SampleSet> {
    sample_line_with(n, xs, cfg.prec, &|w| solve_puncture(w, cfg).map(|s| s.rho_f))
}

/// As [`sample_line`] with a caller-supplied solver, e.g. one backed by a cache.
pub fn sample_line_with(
    n: u32,
    xs: &[f64],
    prec: u32,
    solve: &(dyn Fn(&BigComplex) -> Result<BigComplex> + Sync),
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidInput("line slope must be positive".into()));
    }
    let outcomes: Vec<(f64, Result<BigComplex>)> = xs
        .par_iter()
        .map(|&x| {
            let w = line_point(n, x, prec);
            (x, solve(&w))
        })
        .collect();
    let mut set = SampleSet { slope: n, xs: Vec::new(), values: Vec::new(), dropped: Vec::new() };
    for (x, r) in outcomes {
        match r {
            Ok(v) => {
                set.xs.push(x);
                set.values.push(v);
            }
            Err(e) if e.is_numerical() => set.dropped.push((x, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(set)
}

/// `(j, k)` with `j + k ≤ degree`, ordered by total degree then by decreasing `j`.
pub fn monomials(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree).flat_map(|m| (0..=m).rev().map(move |j| (j, m - j))).collect()
}

/// Real coefficients `a_{j,k}` with their estimated uncertainties.
#[derive(Clone, Debug)]
pub struct ExpansionFit {
    pub degree: usize,
    pub prec: u32,
    pub terms: Vec<(usize, usize)>,
    pub a: Vec<Float>,
    /// Propagated residual bound per coefficient.
    pub uncertainty: Vec<f64>,
    /// Largest `|ℑ a_{j,k}|` discarded by realification.
    pub max_imag: f64,
    pub residual_norm: f64,
    pub cond_log2: f64,
    pub sample_count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitJson {
    pub degree: usize,
    /// `a[j][k]` as decimal strings; entries with `j + k > degree` are absent.
    pub a: Vec<Vec<String>>,
    pub uncertainty: Vec<Vec<f64>>,
    pub max_imag: f64,
    pub residual_norm: f64,
    pub cond_log2: f64,
    pub sample_count: usize,
}

impl ExpansionFit {
    pub fn get(&self, j: usize, k: usize) -> Option<&Float> {
        self.terms.iter().position(|&t| t == (j, k)).map(|i| &self.a[i])
    }

    pub fn uncertainty_of(&self, j: usize, k: usize) -> f64 {
        self.terms.iter().position(|&t| t == (j, k)).map_or(f64::INFINITY, |i| self.uncertainty[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> FitJson {
        let mut a = vec![Vec::new(); self.degree + 1];
        let mut u = vec![Vec::new(); self.degree + 1];
        for j in 0..=self.degree {
            for k in 0..=self.degree - j {
                a[j].push(self.get(j, k).map(|x| format_real(x, false)).unwrap_or_default());
                u[j].push(self.uncertainty_of(j, k));
            }
        }
        FitJson {
            degree: self.degree,
            a,
            uncertainty: u,
            max_imag: self.max_imag,
            residual_norm: self.residual_norm,
            cond_log2: self.cond_log2,
            sample_count: self.sample_count,
        }
    }
}

/// Least-squares fit of `ρ_F(1/2 + z)` by `Σ a_{j,k} zʲ z̄ᵏ`, `j + k ≤ degree`.
///
/// Columns are normalized before the QR solve, which is the `1/|x|^{j+k}` weighting
/// up to a per-column constant. Complex coefficients are fitted and then realified.
pub fn fit_coefficients(samples: &[SampleSet], degree: usize) -> Result<ExpansionFit> {
    let used: Vec<&SampleSet> = samples.iter().filter(|s| !s.values.is_empty()).collect();
    if used.len() < degree + 1 {
        return Err(Error::InvalidInput(format!("{} lines, need at least {}", used.len(), degree + 1)));
    }
    if let Some(s) = used.iter().find(|s| s.values.len() < 2 * degree + 2) {
        return Err(Error::InvalidInput(format!("line {} has {} samples, need {}", s.slope, s.values.len(), 2 * degree + 2)));
    }
    let prec = used[0].values[0].prec();
    let terms = monomials(degree);
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for s in &used {
        let inv_n = Float::with_val(prec, s.slope).recip();
        let u = BigComplex::from_parts(Float::with_val(prec, 1), inv_n);
        for (x, v) in s.xs.iter().zip(&s.values) {
            let z = u.scale(&Float::with_val(prec, *x));
            let zb = z.conj();
            rows.push(terms.iter().map(|&(j, k)| &z.powi(j as u32) * &zb.powi(k as u32)).collect::<Vec<_>>());
            rhs.push(v.clone());
        }
    }
    let scales: Vec<Float> = (0..terms.len())
        .map(|c| {
            let mut s = Float::with_val(prec, 0);
            for r in &rows {
                s += r[c].norm_sqr();
            }
            s.sqrt()
        })
        .collect();
    let scaled: Vec<Vec<BigComplex>> =
        rows.iter().map(|r| r.iter().zip(&scales).map(|(x, s)| x.scale(&s.clone().recip())).collect()).collect();
    let qr = Qr::new(&scaled);
    let cond_log2 = qr.cond_log2();
    if !cond_log2.is_finite() || cond_log2 > f64::from(prec) / 2.0 {
        return Err(Error::IllConditionedFit { log2_cond: cond_log2 });
    }
    let y = qr.solve(&rhs);
    let coeffs: Vec<BigComplex> = y.iter().zip(&scales).map(|(c, s)| c.scale(&s.clone().recip())).collect();

    let mut r2 = Float::with_val(prec, 0);
    for (row, b) in rows.iter().zip(&rhs) {
        let mut e = b.clone();
        for (m, c) in row.iter().zip(&coeffs) {
            e.mul_sub(m, c);
        }
        r2 += e.norm_sqr();
    }
    let residual_norm = r2.sqrt().to_f64();
    let smin = qr.diagonal().last().map_or(0.0, Float::to_f64);
    // the floor stands in for the solver tolerance when the model is exact
    let floor = (-f64::from(prec) / 2.0).exp2();
    let uncertainty = scales.iter().map(|s| residual_norm.max(floor) / (smin * s.to_f64())).collect();
    let max_imag = coeffs.iter().map(|c| c.im.to_f64().abs()).fold(0.0, f64::max);
    Ok(ExpansionFit {
        degree,
        prec,
        a: coeffs.into_iter().map(|c| c.re).collect(),
        terms,
        uncertainty,
        max_imag,
        residual_norm,
        cond_log2,
        sample_count: rhs.len(),
    })
}

/// One relation `lhs = 0` among fitted coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub name: String,
    pub deviation: f64,
    /// `deviation / max |a|`.
    pub normalized: f64,
    /// Propagated fit uncertainty of the combination.
    pub uncertainty: f64,
    pub passed: bool,
}

/// Relations from the reflection symmetry about `1/2` and from the Takhtajan–Zograf identity.
///
/// A relation passes when its deviation is below `max(rel_tol·max|a|, 10·uncertainty)`.
pub fn verify_relations(fit: &ExpansionFit, rel_tol: f64) -> Vec<RelationCheck> {
    let scale = fit.max_abs().max(f64::MIN_POSITIVE);
    let a = |j: usize, k: usize| fit.get(j, k).map(Float::to_f64);
    let u = |j: usize, k: usize| fit.uncertainty_of(j, k);
    let mut out = Vec::new();
    let mut push = |name: String, combo: &[(f64, usize, usize)]| {
        let mut v = 0.0;
        let mut unc = 0.0;
        for &(c, j, k) in combo {
            match a(j, k) {
                Some(x) => v += c * x,
                None => return,
            }
            unc += c.abs() * u(j, k);
        }
        let dev = v.abs();
        out.push(RelationCheck {
            name,
            deviation: dev,
            normalized: dev / scale,
            uncertainty: unc,
            passed: dev <= (rel_tol * scale).max(10.0 * unc),
        });
    };
    let d = fit.degree;
    // a_{i+1,j} = −2a_{i,j} for i + j odd
    for m in (1..d).step_by(2) {
        for i in 0..=m {
            let j = m - i;
            push(format!("a[{},{}]+2a[{},{}]", i + 1, j, i, j), &[(1.0, i + 1, j), (2.0, i, j)]);
        }
    }
    for k in (2..=d).step_by(2) {
        push(format!("a[0,{k}]"), &[(1.0, 0, k)]);
    }
    if d >= 3 {
        push("a[2,1]-3a[0,3]".into(), &[(1.0, 2, 1), (-3.0, 0, 3)]);
    }
    // (j+1)a_{i,j+1} − 2j·a_{i,j} = (i+1)a_{j,i+1} − 2i·a_{j,i}
    for i in 0..d {
        for j in i + 1..d {
            if i + j + 1 > d {
                continue;
            }
            let (fi, fj) = (i as f64, j as f64);
            push(
                format!("tz({i},{j})"),
                &[(fj + 1.0, i, j + 1), (-2.0 * fj, i, j), (-(fi + 1.0), j, i + 1), (2.0 * fi, j, i)],
            );
        }
    }
    out
}
