//! Frobenius basis of `αP(t)Y'' + αP'(t)Y' + (αt − ρ)Y = 0` at `t = 0`, with
//! `αP(t) = αt³ − (α+1)t² + t`, and analytic continuation of the basis.

use rug::Float;

use crate::error::{Error, Result};
use crate::num::{BigComplex, MIN_PREC};
use crate::series::{Derivative, PowerSeries, Var};

/// `(α, ρ)` with `ρ = α·ρ̂`, truncation order and working precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub alpha: BigComplex,
    pub rho: BigComplex,
    pub rho_hat: BigComplex,
    pub order: usize,
    pub prec: u32,
}

impl ProblemSpec {
    pub fn new(alpha: BigComplex, rho: BigComplex, order: usize, prec: u32) -> Result<Self> {
        if prec < MIN_PREC {
            return Err(Error::InvalidInput(format!("precision {prec} < {MIN_PREC} bits")));
        }
        if order < 2 {
            return Err(Error::InvalidInput(format!("truncation order {order} < 2")));
        }
        let alpha = alpha.with_prec(prec);
        let rho = rho.with_prec(prec);
        check_alpha(&alpha)?;
        let rho_hat = &rho / &alpha;
        Ok(ProblemSpec { alpha, rho, rho_hat, order, prec })
    }

    pub fn with_rho(&self, rho: &BigComplex) -> Self {
        let rho = rho.with_prec(self.prec);
        ProblemSpec { rho_hat: &rho / &self.alpha, rho, ..self.clone() }
    }

    /// The finite singular points `0, 1, α⁻¹`.
    pub fn singularities(&self) -> [BigComplex; 3] {
        [BigComplex::zero(self.prec), BigComplex::one(self.prec), self.alpha.recip()]
    }

    /// Radius of convergence of the expansions at `t = 0`.
    pub fn radius(&self) -> f64 {
        self.alpha.recip().abs_f64().min(1.0)
    }

    fn alpha_plus_one(&self) -> BigComplex {
        &self.alpha + 1.0
    }
}

pub(crate) fn check_alpha(alpha: &BigComplex) -> Result<()> {
    let p = alpha.prec();
    let tiny = -f64::from(p) + 8.0;
    if alpha.log2_abs() < tiny {
        return Err(Error::DegeneratePuncture("alpha = 0 sends the puncture to infinity".into()));
    }
    if (alpha - &BigComplex::one(p)).log2_abs() < tiny {
        return Err(Error::DegeneratePuncture("alpha = 1 merges the punctures 1 and 1/alpha".into()));
    }
    Ok(())
}

/// Final term of the `b`-recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BFinalTerm {
    /// `+2(n+1)a_{n+1}`, obtained by substituting `ŷ = y·log t + u`.
    Corrected,
    /// `+2(n−1)a_{n+1}`, kept only to show it contradicts `b₁ = α+1−2ρ`.
    Printed,
}

/// `a_0..a_len`, `b_0..b_len` of `y = Σ aₙtⁿ`, `ŷ = y·log t + Σ bₙtⁿ`.
pub fn frobenius_coefficients(spec: &ProblemSpec) -> (Vec<BigComplex>, Vec<BigComplex>) {
    coefficients_to(spec, spec.order, BFinalTerm::Corrected)
}

pub fn coefficients_to(spec: &ProblemSpec, len: usize, last: BFinalTerm) -> (Vec<BigComplex>, Vec<BigComplex>) {
    let p = spec.prec;
    let ap1 = spec.alpha_plus_one();
    let mut a = vec![BigComplex::one(p)];
    let mut b = vec![BigComplex::zero(p)];
    for n in 0..len {
        let ni = n as i64;
        let mid = &ap1.scale_i64(ni * ni + ni) + &spec.rho;
        let d = (ni + 1) * (ni + 1);
        // (n+1)² a_{n+1} = ((α+1)(n²+n)+ρ) a_n − αn² a_{n−1}
        let mut an = &mid * &a[n];
        if n > 0 {
            an.mul_sub(&spec.alpha.scale_i64(ni * ni), &a[n - 1]);
        }
        a.push(an.div_i64(d));
        // (n+1)² b_{n+1} = ((α+1)(n²+n)+ρ) b_n − αn² b_{n−1}
        //                   − 2αn a_{n−1} + (α+1)(2n+1) a_n − c·a_{n+1}
        let mut bn = &mid * &b[n];
        if n > 0 {
            bn.mul_sub(&spec.alpha.scale_i64(ni * ni), &b[n - 1]);
            bn.mul_sub(&spec.alpha.scale_i64(2 * ni), &a[n - 1]);
        }
        bn.mul_acc(&ap1.scale_i64(2 * ni + 1), &a[n]);
        let c = match last {
            BFinalTerm::Corrected => 2 * (ni + 1),
            BFinalTerm::Printed => 2 * (ni - 1),
        };
        bn -= &a[n + 1].scale_i64(c);
        b.push(bn.div_i64(d));
    }
    (a, b)
}

/// `αP(t)`, `αP'(t)`, `αt − ρ` as polynomials in `t`.
pub fn ode_polynomials(spec: &ProblemSpec, order: usize) -> (PowerSeries, PowerSeries, PowerSeries) {
    let p = spec.prec;
    let ap1 = spec.alpha_plus_one();
    let mut ap = PowerSeries::zero(order, Var::T, p);
    let mut dap = PowerSeries::zero(order, Var::T, p);
    let mut c = PowerSeries::zero(order, Var::T, p);
    let put = |s: &mut PowerSeries, k: usize, v: BigComplex| {
        if k <= order {
            let mut cs = s.clone().into_coeffs();
            cs[k] = v;
            *s = PowerSeries::new(cs, Var::T);
        }
    };
    put(&mut ap, 1, BigComplex::one(p));
    put(&mut ap, 2, -&ap1);
    put(&mut ap, 3, spec.alpha.clone());
    put(&mut dap, 0, BigComplex::one(p));
    put(&mut dap, 1, -ap1.scale_i64(2));
    put(&mut dap, 2, spec.alpha.scale_i64(3));
    put(&mut c, 0, -&spec.rho);
    put(&mut c, 1, spec.alpha.clone());
    (ap, dap, c)
}

/// `L[y]` for the operator of the ODE, computed with series arithmetic.
pub fn apply_operator(spec: &ProblemSpec, y: &PowerSeries) -> Result<PowerSeries> {
    let n = y.order();
    let (ap, dap, c) = ode_polynomials(spec, n);
    let d1 = y.derive(Derivative::DVar);
    let d2 = d1.derive(Derivative::DVar);
    let t1 = ap.truncate(n - 2).mul(&d2)?;
    let t2 = dap.mul(&d1)?;
    let t3 = c.mul(y)?;
    t1.add(&t2)?.add(&t3)
}

/// Non-logarithmic part of `L[y·log t + u]`: `L[u] + 2(αP/t)y' + (2αt − (α+1))y`.
pub fn log_part_residual(spec: &ProblemSpec, y: &PowerSeries, u: &PowerSeries) -> Result<PowerSeries> {
    let n = y.order();
    let p = spec.prec;
    let lu = apply_operator(spec, u)?;
    let mut ap_over_t = PowerSeries::zero(n, Var::T, p).into_coeffs();
    ap_over_t[0] = BigComplex::one(p);
    ap_over_t[1] = -spec.alpha_plus_one();
    ap_over_t[2] = spec.alpha.clone();
    let ap_over_t = PowerSeries::new(ap_over_t, Var::T);
    let mut lin = PowerSeries::zero(n, Var::T, p).into_coeffs();
    lin[0] = -spec.alpha_plus_one();
    lin[1] = spec.alpha.scale_i64(2);
    let lin = PowerSeries::new(lin, Var::T);
    let y1 = y.derive(Derivative::DVar);
    let r = ap_over_t.mul(&y1)?.scale_i64(2);
    lu.add(&r)?.add(&lin.mul(y)?)
}

trait ScaleI64 {
    fn scale_i64(&self, n: i64) -> Self;
}

impl ScaleI64 for PowerSeries {
    fn scale_i64(&self, n: i64) -> Self {
        self.scale(&BigComplex::from_i64(self.prec(), n))
    }
}

/// `Q(t) = t·exp(u/y)` with `u = Σ_{n≥1} bₙtⁿ`.
pub fn build_q(spec: &ProblemSpec, a: &[BigComplex], b: &[BigComplex]) -> Result<PowerSeries> {
    let n = spec.order;
    let y = PowerSeries::new(a[..=n].to_vec(), Var::T);
    let u = PowerSeries::new(b[..=n].to_vec(), Var::T);
    let e = u.div(&y)?.exp_series();
    let mut q = vec![BigComplex::zero(spec.prec)];
    q.extend(e.coeffs()[..n].iter().cloned());
    Ok(PowerSeries::new(q, Var::T))
}

/// `T = Q⁻¹` and `F = y∘T`, both in the variable `Q`.
pub fn build_t_and_f(spec: &ProblemSpec, a: &[BigComplex], qmap: &PowerSeries) -> Result<(PowerSeries, PowerSeries)> {
    let tmap = qmap.revert()?.retag(Var::BigQ);
    let y = PowerSeries::new(a[..=spec.order].to_vec(), Var::T);
    let fmap = PowerSeries::compose(&y, &tmap)?;
    Ok((tmap, fmap))
}

#[derive(Clone, Debug)]
pub struct FrobeniusArtifacts {
    pub a: Vec<BigComplex>,
    pub b: Vec<BigComplex>,
    pub qmap: PowerSeries,
    pub tmap: PowerSeries,
    pub fmap: PowerSeries,
}

pub fn build_artifacts(spec: &ProblemSpec) -> Result<FrobeniusArtifacts> {
    let (a, b) = frobenius_coefficients(spec);
    let qmap = build_q(spec, &a, &b)?;
    let (tmap, fmap) = build_t_and_f(spec, &a, &qmap)?;
    Ok(FrobeniusArtifacts { a, b, qmap, tmap, fmap })
}

/// q-expansions of `t` and `F = y∘t` with `t = r·q + O(q²)`.
///
/// Uses `θt = αP(t)F²` and `θ(θF/F²) = −(αt − ρ)F·θt` with `θ = q·d/dq`, which is
/// equivalent to reverting `Q(t)` and composing but has no cancellation.
pub fn modular_expansions(spec: &ProblemSpec, r: &BigComplex, order: usize) -> (PowerSeries, PowerSeries) {
    let p = spec.prec;
    let z = || BigComplex::zero(p);
    let n_max = order.max(1);
    let ap1 = spec.alpha_plus_one();
    let mut t = vec![z(); n_max + 1];
    let mut f = vec![z(); n_max + 1];
    let mut f2 = vec![z(); n_max + 1];
    let mut g = vec![z(); n_max + 1];
    let mut k = vec![z(); n_max + 1];
    let mut x = vec![z(); n_max + 1];
    let mut h = vec![z(); n_max + 1];
    f[0] = BigComplex::one(p);
    f2[0] = BigComplex::one(p);
    g[0] = BigComplex::one(p);
    k[0] = BigComplex::one(p);
    for n in 1..=n_max {
        // θt = t·K with K = (αt² − (α+1)t + 1)F²
        if n == 1 {
            t[1] = r.with_prec(p);
        } else {
            let mut acc = z();
            for j in 1..n {
                acc.mul_acc(&t[j], &k[n - j]);
            }
            t[n] = acc.div_i64(n as i64 - 1);
        }
        let mut tt = z();
        for j in 1..n {
            tt.mul_acc(&t[j], &t[n - j]);
        }
        let mut gn = &spec.alpha * &tt;
        gn.mul_sub(&ap1, &t[n]);
        g[n] = gn;
        // X = F·θt
        let mut xn = z();
        for j in 0..n {
            xn.mul_acc(&f[j], &t[n - j].scale_i64((n - j) as i64));
        }
        x[n] = xn;
        // θH = −(αt − ρ)X
        let mut yn = z();
        for j in 1..n {
            yn.mul_acc(&t[j], &x[n - j]);
        }
        let mut yn = &spec.alpha * &yn;
        yn.mul_sub(&spec.rho, &x[n]);
        h[n] = (-yn).div_i64(n as i64);
        // θF = H·F²
        let mut fn_ = z();
        for j in 1..=n {
            fn_.mul_acc(&h[j], &f2[n - j]);
        }
        f[n] = fn_.div_i64(n as i64);
        let mut s = z();
        for j in 0..=n {
            s.mul_acc(&f[j], &f[n - j]);
        }
        f2[n] = s;
        let mut s = z();
        for j in 0..=n {
            s.mul_acc(&g[j], &f2[n - j]);
        }
        k[n] = s;
    }
    t.truncate(order + 1);
    f.truncate(order + 1);
    (PowerSeries::new(t, Var::SmallQ), PowerSeries::new(f, Var::SmallQ))
}

/// Solution values `(y, y', ŷ, ŷ')` at `t_current`, continued along `path`.
#[derive(Clone, Debug)]
pub struct ContinuationState {
    pub t_current: BigComplex,
    pub vector: [BigComplex; 4],
    pub path: Vec<BigComplex>,
}

impl ContinuationState {
    pub fn y(&self) -> &BigComplex {
        &self.vector[0]
    }

    pub fn y_hat(&self) -> &BigComplex {
        &self.vector[2]
    }
}

/// Path and stepping parameters for analytic continuation.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationConfig {
    /// Each step covers this fraction of the distance to the nearest singularity.
    pub step_ratio: f64,
    /// Segments must stay this far from singular points (absolute).
    pub clearance: f64,
    /// Perpendicular midpoint offset, relative to `|target|`, for bulged paths.
    pub bulge: f64,
    /// Start point radius as a fraction of the `t = 0` convergence radius.
    pub start_fraction: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig { step_ratio: 0.4, clearance: 0.15, bulge: 0.2, start_fraction: 0.5 }
    }
}

fn n_terms_for(prec: u32, ratio: f64) -> usize {
    (f64::from(prec + 16) * std::f64::consts::LN_2 / -ratio.ln()).ceil() as usize + 10
}

/// `(y, y', u, u')` at `t` by direct summation, `|t|/radius ≤ ratio`.
fn local_values(spec: &ProblemSpec, t: &BigComplex, ratio: f64) -> [BigComplex; 4] {
    let m = n_terms_for(spec.prec, ratio);
    let (a, b) = coefficients_to(spec, m, BFinalTerm::Corrected);
    let p = spec.prec;
    let mut out = [BigComplex::zero(p), BigComplex::zero(p), BigComplex::zero(p), BigComplex::zero(p)];
    for n in (0..=m).rev() {
        out[0] = &out[0] * t;
        out[0] += &a[n];
        out[2] = &out[2] * t;
        out[2] += &b[n];
        if n >= 1 {
            out[1] = &out[1] * t;
            out[1] += &a[n].scale_i64(n as i64);
            out[3] = &out[3] * t;
            out[3] += &b[n].scale_i64(n as i64);
        }
    }
    out
}

/// Basis values at a point of the `t = 0` disk, principal branch of `log t`.
pub fn initial_state(spec: &ProblemSpec, t0: &BigComplex) -> Result<ContinuationState> {
    let ratio = t0.abs_f64() / spec.radius();
    if t0.is_zero() || ratio > 0.9 {
        return Err(Error::InvalidInput(format!("start point {t0:?} is not inside the t=0 disk")));
    }
    let [y, dy, u, du] = local_values(spec, t0, ratio.max(0.05));
    let lg = t0.ln()?;
    let yh = &(&y * &lg) + &u;
    let dyh = &(&(&dy * &lg) + &(&y / t0)) + &du;
    Ok(ContinuationState { t_current: t0.clone(), vector: [y, dy, yh, dyh], path: vec![t0.clone()] })
}

fn nearest_singularity(spec: &ProblemSpec, t: &BigComplex) -> (f64, usize) {
    spec.singularities()
        .iter()
        .enumerate()
        .map(|(k, s)| (t.dist_f64(s), k))
        .fold((f64::INFINITY, 0), |acc, v| if v.0 < acc.0 { v } else { acc })
}

/// Taylor coefficients of two solutions re-expanded at the ordinary point `t0`.
fn taylor_step(spec: &ProblemSpec, t0: &BigComplex, h: &BigComplex, v: &[BigComplex; 4], terms: usize) -> [BigComplex; 4] {
    let p = spec.prec;
    let ap1 = spec.alpha_plus_one();
    let al = &spec.alpha;
    // A = αP, B = A', C = αt − ρ, expanded in powers of (t − t0)
    let t2 = t0.sqr();
    let a0 = &(&(&(al * &t2) * t0) - &(&ap1 * &t2)) + t0;
    let a1 = &(&al.scale_i64(3) * &t2) - &(&ap1.scale_i64(2) * t0);
    let a1 = &a1 + 1.0;
    let a2 = &(al.scale_i64(3) * t0) - &ap1;
    let a3 = al.clone();
    let bc = [a1.clone(), a2.scale_i64(2), a3.scale_i64(3)];
    let ac = [a0.clone(), a1, a2, a3];
    let cc = [&(al * t0) - &spec.rho, al.clone()];
    let inv_a0 = a0.recip();
    let mut out: [BigComplex; 4] = std::array::from_fn(|_| BigComplex::zero(p));
    for s in 0..2 {
        let mut c: Vec<BigComplex> = Vec::with_capacity(terms + 1);
        c.push(v[2 * s].clone());
        c.push(v[2 * s + 1].clone());
        for k in 0..terms.saturating_sub(1) {
            let mut acc = BigComplex::zero(p);
            for (i, ai) in ac.iter().enumerate().skip(1) {
                if k + 2 >= i && k + 2 - i >= 2 {
                    let j = k + 2 - i;
                    acc.mul_acc(ai, &c[j].scale_i64((j * (j - 1)) as i64));
                }
            }
            for (i, bi) in bc.iter().enumerate() {
                if k + 1 >= i && k + 1 - i >= 1 {
                    let j = k + 1 - i;
                    acc.mul_acc(bi, &c[j].scale_i64(j as i64));
                }
            }
            for (i, ci) in cc.iter().enumerate() {
                if k >= i {
                    acc.mul_acc(ci, &c[k - i]);
                }
            }
            let next = (-(&acc * &inv_a0)).div_i64(((k + 2) * (k + 1)) as i64);
            c.push(next);
        }
        let mut val = BigComplex::zero(p);
        let mut der = BigComplex::zero(p);
        for j in (0..c.len()).rev() {
            val = &val * h;
            val += &c[j];
            if j >= 1 {
                der = &der * h;
                der += &c[j].scale_i64(j as i64);
            }
        }
        out[2 * s] = val;
        out[2 * s + 1] = der;
    }
    out
}

fn segment_distance(a: (f64, f64), b: (f64, f64), s: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 == 0.0 { 0.0 } else { (((s.0 - a.0) * dx + (s.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (px, py) = (a.0 + u * dx - s.0, a.1 + u * dy - s.1);
    (px * px + py * py).sqrt()
}

/// Continue `state` through the given waypoints.
pub fn continue_along(spec: &ProblemSpec, mut state: ContinuationState, waypoints: &[BigComplex], cfg: &ContinuationConfig) -> Result<ContinuationState> {
    let sing = spec.singularities();
    let terms = n_terms_for(spec.prec, cfg.step_ratio);
    let floor = (-f64::from(spec.prec) / 4.0).exp2();
    for w in waypoints {
        let a = state.t_current.to_c64();
        let b = w.to_c64();
        for s in &sing {
            let d = segment_distance(a, b, s.to_c64());
            if d < floor.max(1e-12) {
                return Err(Error::PathTooCloseToSingularity { singularity: format!("{s:?}"), distance: d });
            }
        }
        loop {
            let remaining = w - &state.t_current;
            let rem = remaining.abs_f64();
            if rem == 0.0 {
                break;
            }
            let (dist, _) = nearest_singularity(spec, &state.t_current);
            let max_step = cfg.step_ratio * dist;
            if max_step < floor {
                return Err(Error::StepUnderflow(format!("{:?}", state.t_current)));
            }
            let h = if rem <= max_step {
                remaining
            } else {
                remaining.scale(&Float::with_val(spec.prec, max_step / rem))
            };
            state.vector = taylor_step(spec, &state.t_current, &h, &state.vector, terms);
            state.t_current = if rem <= max_step { w.clone() } else { &state.t_current + &h };
        }
        state.path.push(w.clone());
    }
    Ok(state)
}

/// Default route from the `t = 0` disk to `target`: a straight segment along the ray,
/// bulged to the left of the direction of travel when it grazes a singularity.
pub fn default_path(spec: &ProblemSpec, target: &BigComplex, cfg: &ContinuationConfig) -> Result<(BigComplex, Vec<BigComplex>)> {
    let p = spec.prec;
    let r = target.abs_f64();
    if r == 0.0 {
        return Err(Error::DegeneratePuncture("t = 0 is a singular point".into()));
    }
    let start_r = cfg.start_fraction * spec.radius();
    let start = target.scale(&Float::with_val(p, start_r / r));
    let (sx, sy) = start.to_c64();
    let (tx, ty) = target.to_c64();
    let hits = spec.singularities().iter().any(|s| {
        let d = segment_distance((sx, sy), (tx, ty), s.to_c64());
        d < cfg.clearance
    });
    if !hits {
        return Ok((start, vec![target.clone()]));
    }
    let mid = &(&start + target).div_i64(2);
    let dir = &(target - &start) / &BigComplex::from_real(Float::with_val(p, (target - &start).abs()));
    let offset = dir.mul_i().scale(&Float::with_val(p, cfg.bulge * r));
    Ok((start, vec![mid + offset, target.clone()]))
}

/// Basis values at `target`; inside the disk the series are summed directly.
pub fn continue_solution(spec: &ProblemSpec, target: &BigComplex, path: Option<&[BigComplex]>, cfg: &ContinuationConfig) -> Result<ContinuationState> {
    if let Some(waypoints) = path {
        let (start, rest) = waypoints
            .split_first()
            .ok_or_else(|| Error::InvalidInput("empty continuation path".into()))?;
        let st = initial_state(spec, start)?;
        let mut wp = rest.to_vec();
        if wp.last().map(|l| l != target).unwrap_or(true) {
            wp.push(target.clone());
        }
        return continue_along(spec, st, &wp, cfg);
    }
    if target.abs_f64() <= cfg.start_fraction * spec.radius() {
        return initial_state(spec, target);
    }
    let (start, wp) = default_path(spec, target, cfg)?;
    let st = initial_state(spec, &start)?;
    continue_along(spec, st, &wp, cfg)
}

/// `Q(z) = exp(ŷ(z)/y(z))` along the default path.
pub fn q_at(spec: &ProblemSpec, z: &BigComplex, cfg: &ContinuationConfig) -> Result<BigComplex> {
    if z.abs_f64() <= 0.75 * spec.radius() {
        let ratio = z.abs_f64() / spec.radius();
        if z.is_zero() {
            return Ok(BigComplex::zero(spec.prec));
        }
        let [y, _, u, _] = local_values(spec, z, ratio.max(0.05));
        if y.is_zero() {
            return Err(Error::ZeroDenominator(format!("{z:?}")));
        }
        return Ok(z * &(&u / &y).exp());
    }
    let st = continue_solution(spec, z, None, cfg)?;
    if st.y().log2_abs() < -f64::from(spec.prec) / 2.0 {
        return Err(Error::ZeroDenominator(format!("{z:?}")));
    }
    Ok((st.y_hat() / st.y()).exp())
}
