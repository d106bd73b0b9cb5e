//! Modularity residuals and the Newton search for the Fuchsian value.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::accessory::transport_rho;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::frobenius::{modular_expansions, q_at, ProblemSpec};
use crate::geometry::{
    build_generators, cusp_representatives, fixed_points, scale_factor, stabilizer_constants, CuspData, GroupData,
    normalize_domain, MoebiusMatrix, TransformRecord, Z2Branch,
};
use crate::num::{pi, BigComplex};
use crate::series::{PowerSeries, SeriesJson};

/// Everything derived from `(α, ρ)` before the q-expansions.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub spec: ProblemSpec,
    pub fixed_points: [BigComplex; 3],
    pub q: [BigComplex; 3],
    pub cusps: CuspData,
    pub group: GroupData,
    pub r: BigComplex,
}

pub fn pipeline(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Pipeline> {
    let cc = cfg.continuation();
    let z = fixed_points(&spec.alpha, cfg.z2_branch);
    let (q0, (q1, q2)) = rayon::join(
        || q_at(spec, &z[0], &cc),
        || rayon::join(|| q_at(spec, &z[1], &cc), || q_at(spec, &z[2], &cc)),
    );
    let q = [q0?, q1?, q2?];
    let cusps = cusp_representatives(&q[0], &q[1], &q[2])?;
    let d = stabilizer_constants(&cusps.c1, &cusps.c2)?;
    let group = build_generators(&cusps.c1, &cusps.c2, &d)?;
    let r = scale_factor(&q[0], &group.d[0])?;
    Ok(Pipeline { spec: spec.clone(), fixed_points: z, q, cusps, group, r })
}

/// Order at which `Σ fₙqⁿ` reaches `2^tol_log2` at `ℑτ = sinθ/D`.
pub fn needed_order(d: f64, sin_theta: f64, tol_log2: f64) -> usize {
    let decay = 2.0 * std::f64::consts::PI * sin_theta / d;
    let bits = -tol_log2 + 8.0;
    (1.15 * bits * std::f64::consts::LN_2 / decay).ceil() as usize + 20
}

/// Balanced probe `ĉ + (e^{iθ} − 1)/D`, with `ℑτ* = ℑ(S_c τ*) = sinθ/D`.
pub fn probe_point(c: &Float, d: &Float, angle: f64) -> BigComplex {
    let p = c.prec().max(d.prec());
    let th = Float::with_val(p, angle);
    let (s, co) = th.sin_cos(Float::new(p));
    let re = Float::with_val(p, &co - 1u32) / d + c;
    let im = s / d;
    BigComplex::from_parts(re, im)
}

/// `exp(2πiτ)`.
pub fn q_of_tau(tau: &BigComplex) -> BigComplex {
    let p = tau.prec();
    let two_pi = Float::with_val(p, pi(p) * 2u32);
    tau.mul_i().scale(&two_pi).exp()
}

/// Series value and `log2` of the largest of the last four terms.
pub fn eval_with_tail(f: &PowerSeries, q: &BigComplex) -> (BigComplex, f64) {
    let (v, _) = f.eval_unchecked(q);
    let n = f.order();
    let lq = q.log2_abs();
    let tail = (n.saturating_sub(3)..=n)
        .map(|k| f.coeff(k).log2_abs() + k as f64 * lq)
        .fold(f64::NEG_INFINITY, f64::max);
    (v, tail)
}

#[derive(Clone, Debug)]
pub struct ResidualProbe {
    pub tau_star: BigComplex,
    /// 1 ↔ S₀, 2 ↔ S_{c₁}, 3 ↔ S_{c₂}.
    pub generator_index: usize,
    pub angle: f64,
    pub value: BigComplex,
    pub tail_log2: f64,
}

impl ResidualProbe {
    pub fn log2_abs(&self) -> f64 {
        self.value.log2_abs()
    }
}

/// `F(γτ) − s·(cτ + d)·F(τ)` for a weight-one q-series `F`.
pub fn transformation_residual(f: &PowerSeries, gamma: &MoebiusMatrix, tau: &BigComplex, sign: i8) -> (BigComplex, f64) {
    let gt = gamma.apply(tau);
    let (a, ta) = eval_with_tail(f, &q_of_tau(&gt));
    let (b, tb) = eval_with_tail(f, &q_of_tau(tau));
    let mut rhs = &gamma.j_factor(tau) * &b;
    if sign < 0 {
        rhs = -rhs;
    }
    let scale = gamma.j_factor(tau).log2_abs().max(0.0);
    (&a - &rhs, ta.max(tb + scale))
}

/// The three generator residuals at the probe angle `angle`.
pub fn residual_probes(pipe: &Pipeline, f: &PowerSeries, sign: i8, angle: f64) -> [ResidualProbe; 3] {
    std::array::from_fn(|k| {
        let j = k + 1;
        let (s, c, d) = pipe.group.generator(j);
        let tau = probe_point(&c, d, angle);
        let (value, tail_log2) = transformation_residual(f, s, &tau, sign);
        ResidualProbe { tau_star: tau, generator_index: j, angle, value, tail_log2 }
    })
}

/// `(F₁, F₂, F₃)` at `(α, ρ)` for the probe angle `angle`.
pub fn residuals(spec: &ProblemSpec, cfg: &SolverConfig, angle: f64, sign: i8) -> Result<[ResidualProbe; 3]> {
    let pipe = pipeline(spec, cfg)?;
    let n = full_order(&pipe, cfg);
    let (_, f) = modular_expansions(spec, &pipe.r, n);
    Ok(residual_probes(&pipe, &f, sign, angle))
}

fn full_order(pipe: &Pipeline, cfg: &SolverConfig) -> usize {
    if !cfg.auto_extend {
        return cfg.order;
    }
    let tol = cfg.tolerance_log2();
    let smin = cfg.probe_angles.iter().map(|a| a.sin()).fold(1.0, f64::min);
    let dmax = pipe.group.d.iter().map(Float::to_f64).fold(0.0, f64::max);
    needed_order(dmax, smin, tol).clamp(cfg.order, cfg.max_order)
}

fn newton_order(pipe: &Pipeline, cfg: &SolverConfig) -> usize {
    let s = cfg.probe_angles[0].sin();
    needed_order(pipe.group.d[0].to_f64(), s, cfg.tolerance_log2()).clamp(32, cfg.max_order)
}

/// Primary residual `F₁` (the `S₀` probe at the first angle).
fn primary_residual(spec: &ProblemSpec, cfg: &SolverConfig, sign: i8) -> Result<BigComplex> {
    let pipe = pipeline(spec, cfg)?;
    let n = newton_order(&pipe, cfg);
    let (_, f) = modular_expansions(spec, &pipe.r, n);
    let tau = probe_point(&Float::new(spec.prec), &pipe.group.d[0], cfg.probe_angles[0]);
    Ok(transformation_residual(&f, &pipe.group.s0, &tau, sign).0)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BranchChoices {
    pub z2: Z2Branch,
    /// True if `φ₁`'s cusp representative exceeds `φ₂`'s.
    pub cusps_swapped: bool,
}

#[derive(Clone, Debug)]
pub struct UniformizationResult {
    pub alpha: BigComplex,
    pub rho_f: BigComplex,
    pub rho_hat_f: BigComplex,
    pub r: BigComplex,
    pub group: GroupData,
    pub cusp_imag_parts: [Float; 2],
    pub residuals: Vec<ResidualProbe>,
    pub prec: u32,
    pub order: usize,
    pub effective_order: usize,
    pub tol_log2: f64,
    pub t_series: PowerSeries,
    /// Weight-one form `F`; the weight-two form is `F²`.
    pub f_series: PowerSeries,
    pub multiplier_sign: i8,
    pub branch_choices: BranchChoices,
    pub newton_iterations: usize,
}

impl UniformizationResult {
    pub fn max_residual_log2(&self) -> f64 {
        self.residuals.iter().map(ResidualProbe::log2_abs).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::new(self.alpha.clone(), self.rho_f.clone(), self.order, self.prec)
    }
}

/// Newton on `F₁`: real `ρ` for real `α`, otherwise `(ℜρ, ℑρ)`.
pub fn newton(alpha: &BigComplex, rho0: &BigComplex, cfg: &SolverConfig, sign: i8) -> Result<(BigComplex, usize)> {
    let p = cfg.prec;
    let real_alpha = alpha.im.is_zero();
    let base = ProblemSpec::new(alpha.clone(), rho0.clone(), cfg.order, p)?;
    let tol = cfg.tolerance_log2();
    let eval = |rho: &BigComplex| primary_residual(&base.with_rho(rho), cfg, sign);
    let mut rho = if real_alpha { BigComplex::from_real(rho0.re.clone()).with_prec(p) } else { rho0.with_prec(p) };
    let mut f = eval(&rho)?;
    let h_log2 = -f64::from(p) / 3.0;
    for it in 0..cfg.max_newton_iters {
        if f.log2_abs() < tol - 8.0 {
            return Ok((rho, it));
        }
        let h = Float::with_val(p, h_log2).exp2() * Float::with_val(p, rho.abs().max(&Float::with_val(p, 1)));
        let hc = BigComplex::from_real(h.clone());
        let two_h = Float::with_val(p, &h * 2u32);
        let dx = (&eval(&(&rho + &hc))? - &eval(&(&rho - &hc))?).scale(&two_h.clone().recip());
        let delta = if real_alpha {
            // least squares over ℝ: δ = −ℜ(conj(F')·F)/|F'|²
            let num = Float::with_val(p, &dx.re * &f.re) + Float::with_val(p, &dx.im * &f.im);
            BigComplex::from_real(-(num / dx.norm_sqr()))
        } else {
            let hi = hc.mul_i();
            let dy = (&eval(&(&rho + &hi))? - &eval(&(&rho - &hi))?).scale(&two_h.recip());
            // [ℜdx ℜdy; ℑdx ℑdy]·(δx, δy) = −(ℜF, ℑF)
            let det = Float::with_val(p, &dx.re * &dy.im) - Float::with_val(p, &dy.re * &dx.im);
            if det.is_zero() {
                return Err(Error::NoConvergence("singular Jacobian".into()));
            }
            let x = -(Float::with_val(p, &f.re * &dy.im) - Float::with_val(p, &dy.re * &f.im)) / &det;
            let y = -(Float::with_val(p, &dx.re * &f.im) - Float::with_val(p, &f.re * &dx.im)) / &det;
            BigComplex::from_parts(x, y)
        };
        // damped step: accept the first halving that lowers |F₁|
        let mut lam = Float::with_val(p, 1);
        let mut accepted = None;
        for _ in 0..12 {
            let cand = &rho + &delta.scale(&lam);
            if let Ok(fc) = eval(&cand) {
                if fc.log2_abs() < f.log2_abs() || fc.log2_abs() < tol - 8.0 {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            lam /= 2u32;
        }
        let Some((cand, fc)) = accepted else {
            if f.log2_abs() < tol {
                return Ok((rho, it));
            }
            return Err(Error::NoConvergence(format!("line search stalled at |F1| = 2^{:.1}", f.log2_abs())));
        };
        let step_small = (&cand - &rho).log2_abs() < -f64::from(p) + 16.0;
        rho = cand;
        f = fc;
        if step_small && f.log2_abs() < tol {
            return Ok((rho, it + 1));
        }
    }
    if f.log2_abs() < tol {
        return Ok((rho, cfg.max_newton_iters));
    }
    Err(Error::NoConvergence(format!("|F1| = 2^{:.1} after {} iterations", f.log2_abs(), cfg.max_newton_iters)))
}

/// Residuals at all probes, expansions and the certificate for a converged `ρ`.
pub fn certify(alpha: &BigComplex, rho: &BigComplex, cfg: &SolverConfig, sign: i8, iterations: usize) -> Result<UniformizationResult> {
    let spec = ProblemSpec::new(alpha.clone(), rho.clone(), cfg.order, cfg.prec)?;
    let pipe = pipeline(&spec, cfg)?;
    let n = full_order(&pipe, cfg);
    let (t, f) = modular_expansions(&spec, &pipe.r, n);
    let mut probes = Vec::new();
    for &a in &cfg.probe_angles {
        probes.extend(residual_probes(&pipe, &f, sign, a));
    }
    let tol = cfg.tolerance_log2();
    let res = UniformizationResult {
        alpha: spec.alpha.clone(),
        rho_f: spec.rho.clone(),
        rho_hat_f: spec.rho_hat.clone(),
        r: pipe.r.clone(),
        group: pipe.group.clone(),
        cusp_imag_parts: pipe.cusps.imag_parts.clone(),
        residuals: probes,
        prec: cfg.prec,
        order: cfg.order,
        effective_order: n,
        tol_log2: tol,
        t_series: t.truncate(cfg.order),
        f_series: f.truncate(cfg.order),
        multiplier_sign: sign,
        branch_choices: BranchChoices { z2: cfg.z2_branch, cusps_swapped: pipe.cusps.swapped },
        newton_iterations: iterations,
    };
    let worst = res.max_residual_log2();
    let worst_tail = res.residuals.iter().map(|p| p.tail_log2).fold(f64::NEG_INFINITY, f64::max);
    if worst >= tol || worst_tail >= tol {
        return Err(Error::ResidualCheckFailed(format!(
            "max |F_j| = 2^{worst:.1}, max tail = 2^{worst_tail:.1}, tolerance 2^{tol:.1}"
        )));
    }
    Ok(res)
}

/// Newton from `rho0`, then the full certificate; tries both multiplier signs unless fixed.
pub fn solve_rho_from(alpha: &BigComplex, rho0: &BigComplex, cfg: &SolverConfig) -> Result<UniformizationResult> {
    let signs: Vec<i8> = match cfg.multiplier_sign {
        Some(s) => vec![s],
        None => vec![1, -1],
    };
    let mut last = Error::NoConvergence("no multiplier sign tried".into());
    for s in signs {
        match newton(alpha, rho0, cfg, s).and_then(|(rho, it)| certify(alpha, &rho, cfg, s, it)) {
            Ok(r) => return Ok(r),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Anchor of the warm start: `α = 2`, `ρ_F = 1`.
pub fn anchor(prec: u32) -> (BigComplex, BigComplex) {
    (BigComplex::from_f64(prec, 2.0, 0.0), BigComplex::one(prec))
}

/// Fuchsian value for a normalized `α`, seeded by continuation from the anchor.
pub fn solve_rho(alpha: &BigComplex, cfg: &SolverConfig) -> Result<UniformizationResult> {
    crate::frobenius::check_alpha(alpha)?;
    let seed = initial_guess(alpha, cfg)?;
    match solve_rho_from(alpha, &seed, cfg) {
        Ok(r) => Ok(r),
        Err(e) if e.is_numerical() => {
            let g = grid_guess(alpha, cfg)?;
            solve_rho_from(alpha, &g, cfg)
        }
        Err(e) => Err(e),
    }
}

fn lowered(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig { prec: 128, tol_log2: Some(-40.0), order: 40, probe_angles: vec![cfg.probe_angles[0]], ..cfg.clone() }
}

/// Seed for Newton: the anchor value, carried along a straight line in `w = α⁻¹`.
pub fn initial_guess(alpha: &BigComplex, cfg: &SolverConfig) -> Result<BigComplex> {
    let (a0, r0) = anchor(cfg.prec);
    let w0 = a0.recip();
    let w = alpha.recip();
    let dist = w.dist_f64(&w0);
    if dist <= 0.05 {
        return Ok(r0);
    }
    let steps = (dist / 0.05).ceil() as usize;
    let path: Vec<BigComplex> = (0..=steps)
        .map(|k| (&w0 + &(&w - &w0).scale(&Float::with_val(cfg.prec, k as f64 / steps as f64))).recip())
        .collect();
    let lo = lowered(cfg);
    let results = continuation_solve(&path, &lo)?;
    Ok(results.last().map(|r| r.rho_f.with_prec(cfg.prec)).unwrap_or(r0))
}

/// Coarse minimization of `|F₁|` over a box of radius 2 around `(α+1)/2`.
pub fn grid_guess(alpha: &BigComplex, cfg: &SolverConfig) -> Result<BigComplex> {
    let lo = lowered(cfg);
    let centre = (alpha + 1.0).div_i64(2);
    let real_alpha = alpha.im.is_zero();
    let mut pts = Vec::new();
    let m = 8i32;
    for i in -m..=m {
        let js: Vec<i32> = if real_alpha { vec![0] } else { (-m..=m).collect() };
        for j in js {
            let d = BigComplex::from_f64(lo.prec, 2.0 * f64::from(i) / f64::from(m), 2.0 * f64::from(j) / f64::from(m));
            pts.push(&centre.with_prec(lo.prec) + &d);
        }
    }
    let sign = cfg.multiplier_sign.unwrap_or(1);
    let spec = ProblemSpec::new(alpha.with_prec(lo.prec), centre.with_prec(lo.prec), lo.order, lo.prec)?;
    use rayon::prelude::*;
    let best = pts
        .par_iter()
        .filter_map(|rho| primary_residual(&spec.with_rho(rho), &lo, sign).ok().map(|f| (f.log2_abs(), rho.clone())))
        .min_by(|a, b| crate::num::cmp_f64(a.0, b.0));
    best.map(|b| b.1.with_prec(cfg.prec)).ok_or_else(|| Error::NoConvergence("grid search found no admissible point".into()))
}

/// Solve along a path of `α` values, seeding each Newton run with the previous `ρ_F`.
pub fn continuation_solve(path: &[BigComplex], cfg: &SolverConfig) -> Result<Vec<UniformizationResult>> {
    let (_, r0) = anchor(cfg.prec);
    let mut seed = r0;
    let mut out: Vec<UniformizationResult> = Vec::with_capacity(path.len());
    for (k, a) in path.iter().enumerate() {
        // first-order extrapolation from the last two steps
        let guess = if out.len() >= 2 {
            let n = out.len();
            &out[n - 1].rho_f.scale_i64(2) - &out[n - 2].rho_f
        } else {
            seed.clone()
        };
        let res = solve_rho_from(a, &guess, cfg)
            .or_else(|_| solve_rho_from(a, &seed, cfg))
            .map_err(|e| if e.is_numerical() { Error::StepTooLarge(k) } else { e })?;
        seed = res.rho_f.clone();
        out.push(res);
    }
    Ok(out)
}

/// `ρ_F` at the caller's puncture together with the certified solve at the normalized one.
#[derive(Clone, Debug)]
pub struct PunctureSolution {
    pub w: BigComplex,
    pub rho_f: BigComplex,
    pub record: TransformRecord,
    pub result: UniformizationResult,
}

/// Normalize `w`, solve there, and carry `ρ_F` back to `w`.
pub fn solve_puncture(w: &BigComplex, cfg: &SolverConfig) -> Result<PunctureSolution> {
    let (alpha, record) = normalize_domain(w)?;
    let result = solve_rho(&alpha, cfg)?;
    let rho_f = transport_rho(&record, &result.rho_f)?;
    Ok(PunctureSolution { w: w.clone(), rho_f, record, result })
}

/// Serialized result; every number is a decimal (or `0x` hex) string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultJson {
    pub alpha: [String; 2],
    #[serde(rename = "rho_F")]
    pub rho_f: [String; 2],
    #[serde(rename = "rho_hat_F")]
    pub rho_hat_f: [String; 2],
    pub r: [String; 2],
    pub c1: String,
    pub c2: String,
    #[serde(rename = "D0")]
    pub d0: String,
    #[serde(rename = "D1")]
    pub d1: String,
    #[serde(rename = "D2")]
    pub d2: String,
    pub generators: GeneratorsJson,
    pub residuals: Vec<ProbeJson>,
    pub precision_bits: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub effective_order: usize,
    pub tolerance_log2: f64,
    pub t_series: SeriesJson,
    pub f_series: SeriesJson,
    pub multiplier_sign: i8,
    pub branch_choices: BranchChoices,
    pub cusp_imag_parts: [String; 2],
    pub newton_iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GeneratorsJson {
    #[serde(rename = "T")]
    pub t: [[String; 2]; 4],
    #[serde(rename = "S0")]
    pub s0: [[String; 2]; 4],
    #[serde(rename = "Sc1")]
    pub sc1: [[String; 2]; 4],
    #[serde(rename = "Sc2")]
    pub sc2: [[String; 2]; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeJson {
    pub generator_index: usize,
    pub angle: f64,
    pub tau_star: [String; 2],
    pub value: [String; 2],
    pub log2_abs: f64,
    pub tail_log2: f64,
}

fn real_string(x: &Float, hex: bool) -> String {
    crate::num::format_real(x, hex)
}

impl UniformizationResult {
    pub fn to_json(&self, hex: bool) -> ResultJson {
        let g = &self.group;
        ResultJson {
            alpha: self.alpha.to_strings(hex),
            rho_f: self.rho_f.to_strings(hex),
            rho_hat_f: self.rho_hat_f.to_strings(hex),
            r: self.r.to_strings(hex),
            c1: real_string(&g.c1, hex),
            c2: real_string(&g.c2, hex),
            d0: real_string(&g.d[0], hex),
            d1: real_string(&g.d[1], hex),
            d2: real_string(&g.d[2], hex),
            generators: GeneratorsJson {
                t: g.t.to_strings(hex),
                s0: g.s0.to_strings(hex),
                sc1: g.sc1.to_strings(hex),
                sc2: g.sc2.to_strings(hex),
            },
            residuals: self
                .residuals
                .iter()
                .map(|p| ProbeJson {
                    generator_index: p.generator_index,
                    angle: p.angle,
                    tau_star: p.tau_star.to_strings(hex),
                    value: p.value.to_strings(hex),
                    log2_abs: finite_or(p.log2_abs()),
                    tail_log2: finite_or(p.tail_log2),
                })
                .collect(),
            precision_bits: self.prec,
            n: self.order,
            effective_order: self.effective_order,
            tolerance_log2: self.tol_log2,
            t_series: self.t_series.to_json(hex),
            f_series: self.f_series.to_json(hex),
            multiplier_sign: self.multiplier_sign,
            branch_choices: self.branch_choices.clone(),
            cusp_imag_parts: [real_string(&self.cusp_imag_parts[0], hex), real_string(&self.cusp_imag_parts[1], hex)],
            newton_iterations: self.newton_iterations,
        }
    }

    /// Rebuild a result from JSON; generators are recomputed from `(c₁, c₂, D)`.
    pub fn from_json(j: &ResultJson) -> Result<Self> {
        let p = j.precision_bits;
        let c = |s: &[String; 2]| BigComplex::from_strings(s, p);
        let re = |s: &String| crate::num::parse_real(s, p);
        let c1 = re(&j.c1)?;
        let c2 = re(&j.c2)?;
        let d = [re(&j.d0)?, re(&j.d1)?, re(&j.d2)?];
        let group = build_generators(&c1, &c2, &d)?;
        let residuals = j
            .residuals
            .iter()
            .map(|r| {
                Ok(ResidualProbe {
                    tau_star: c(&r.tau_star)?,
                    generator_index: r.generator_index,
                    angle: r.angle,
                    value: c(&r.value)?,
                    tail_log2: r.tail_log2,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UniformizationResult {
            alpha: c(&j.alpha)?,
            rho_f: c(&j.rho_f)?,
            rho_hat_f: c(&j.rho_hat_f)?,
            r: c(&j.r)?,
            group,
            cusp_imag_parts: [re(&j.cusp_imag_parts[0])?, re(&j.cusp_imag_parts[1])?],
            residuals,
            prec: p,
            order: j.n,
            effective_order: j.effective_order,
            tol_log2: j.tolerance_log2,
            t_series: PowerSeries::from_json(&j.t_series)?,
            f_series: PowerSeries::from_json(&j.f_series)?,
            multiplier_sign: j.multiplier_sign,
            branch_choices: j.branch_choices.clone(),
            newton_iterations: j.newton_iterations,
        })
    }
}

fn finite_or(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        -1.0e6
    }
}
