//! One PASS/FAIL line per acceptance criterion; exits non-zero if any enforced line fails.
//!
//! Reference values come from the published table and closed forms; the oracles
//! (recurrence majorants, congruence membership) are written here independently.

use std::time::{Duration, Instant};

use fuchsian_core::accessory::{closed_forms, m_infinity, rho_to_m, AccessoryData};
use fuchsian_core::config::SolverConfig;
use fuchsian_core::expansion::{fit_coefficients, sample_line, verify_relations, ExpansionConfig, SampleSet};
use fuchsian_core::frobenius::{apply_operator, build_artifacts, frobenius_coefficients, log_part_residual, ProblemSpec};
use fuchsian_core::geometry::{parabolic, parabolic_exact, relation_product_exact, stabilizer_constants_exact};
use fuchsian_core::modular::{identity_threshold_log2, verify_uniformizing_identities, IdentityReport};
use fuchsian_core::solver::{solve_rho, UniformizationResult};
use fuchsian_core::{BigComplex, PowerSeries, Var};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rug::{Float, Rational};

const P: u32 = 512;
const N: usize = 150;

struct Line {
    id: u32,
    passed: bool,
    /// Only lines that are achievable as stated gate the exit status.
    enforced: bool,
    text: String,
}

fn line(id: u32, passed: bool, text: impl Into<String>) -> Line {
    Line { id, passed, enforced: true, text: text.into() }
}

fn c(re: f64, im: f64, prec: u32) -> BigComplex {
    BigComplex::from_f64(prec, re, im)
}

fn rel_log2(a: &BigComplex, b: &BigComplex) -> f64 {
    let scale = b.abs_f64().max(1.0).log2();
    (a - b).log2_abs() - scale
}

fn solve_anchor() -> (UniformizationResult, Duration) {
    let cfg = SolverConfig { prec: P, order: N, ..SolverConfig::default() };
    let t0 = Instant::now();
    let res = solve_rho(&c(2.0, 0.0, P), &cfg).expect("anchor solve");
    (res, t0.elapsed())
}

fn criterion_1(res: &UniformizationResult, elapsed: Duration) -> Line {
    let err = (&res.rho_f - &BigComplex::one(P)).abs_f64();
    let ok = err < 1e-20 && elapsed <= Duration::from_secs(120);
    line(1, ok, format!("anchor value: |rho_F - 1| = {err:.3e} at {P} bits, N = {N}, in {:.1} s", elapsed.as_secs_f64()))
}

fn criterion_2(res: &UniformizationResult) -> Line {
    let mut angles: Vec<f64> = res.residuals.iter().map(|p| p.angle).collect();
    angles.dedup();
    let worst = res.max_residual_log2();
    let tail = res.residuals.iter().map(|p| p.tail_log2).fold(f64::NEG_INFINITY, f64::max);
    let per_angle: Vec<usize> =
        angles.iter().map(|a| res.residuals.iter().filter(|p| p.angle == *a).count()).collect();
    let ok = angles.len() >= 2 && per_angle.iter().all(|&k| k == 3) && worst < -256.0 && tail < -256.0;
    line(2, ok, format!("residual certificate: max |F_j| = 2^{worst:.1}, tail 2^{tail:.1}, {} probes", angles.len()))
}

fn sig_digits(a: &Float, reference: &str) -> f64 {
    let r = Float::with_val(a.prec(), Float::parse(reference).unwrap());
    let d = Float::with_val(a.prec(), a - &r).abs();
    let rel = d.to_f64() / r.to_f64().abs();
    -rel.log10()
}

fn criteria_3_and_4() -> (Line, Line) {
    let cfg = ExpansionConfig::default();
    let t0 = Instant::now();
    let sets: Vec<SampleSet> =
        cfg.slopes.iter().map(|&n| sample_line(n, &cfg.xs, &cfg.solver).expect("samples")).collect();
    let per_slope = sets.iter().map(|s| s.values.len()).min().unwrap_or(0);
    let fit = fit_coefficients(&sets, 2).expect("degree-2 fit");
    let elapsed = t0.elapsed().as_secs_f64();

    let d10 = sig_digits(fit.get(1, 0).unwrap(), "-1.231129697228372059");
    let d01 = sig_digits(fit.get(0, 1).unwrap(), "0.063875489913862273");
    let d20 = sig_digits(fit.get(2, 0).unwrap(), "2.46225939445674411");
    let d11 = sig_digits(fit.get(1, 1).unwrap(), "-0.127750979827724546");
    // the table's a₀₂ is exactly 0, so its digits are counted against the scale of the fit
    let a02 = fit.get(0, 2).unwrap().to_f64().abs();
    let d02 = -(a02 / fit.max_abs()).log10();
    let ok3 = sets.len() >= 4
        && per_slope >= 10
        && d10 >= 8.0
        && d01 >= 8.0
        && [d20, d11, d02].iter().all(|&d| d >= 6.0)
        && elapsed <= 3600.0;
    let l3 = line(
        3,
        ok3,
        format!(
            "table: {} slopes x {per_slope} points, digits a10 {d10:.1}, a01 {d01:.1}, a20 {d20:.1}, a11 {d11:.1}, a02 {d02:.1}, {elapsed:.0} s",
            sets.len()
        ),
    );

    let rel = verify_relations(&fit, 1e-6);
    let failed: Vec<&str> = rel.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let worst = rel.iter().map(|r| r.normalized).fold(0.0, f64::max);
    let l4 = line(
        4,
        failed.is_empty() && !rel.is_empty(),
        format!("relations: {} checked, worst normalized deviation {worst:.2e}, failing {failed:?}", rel.len()),
    );
    (l3, l4)
}

fn criterion_5(res: &UniformizationResult) -> Vec<Line> {
    let report: IdentityReport = verify_uniformizing_identities(res).expect("identity report");
    let thr = identity_threshold_log2(P);
    let dev = |name: &str| report.get(name).map(|c| (c.max_log2_dev, c.passed, c.checked_to));
    let (t_dev, t_ok, to) = dev("theta_t").unwrap();
    let (o_dev, o_ok, _) = dev("ode").unwrap();
    let (b_dev, b_ok, _) = dev("bracket_ratio").unwrap();
    let (p_dev, p_ok, _) = dev("bracket_ratio_plus").unwrap();
    let reach = to + 4 >= N;
    vec![
        Line {
            id: 5,
            passed: t_ok && o_ok && p_ok && reach,
            enforced: false,
            text: format!(
                "identities as printed (to order {to}, threshold 2^{thr}): theta_t 2^{t_dev:.1}, ode 2^{o_dev:.1}, [f,f]_2 ratio = +(t-rho)/P 2^{p_dev:.1}"
            ),
        },
        line(
            5,
            t_ok && o_ok && b_ok && reach,
            format!("identities with the derived sign [f,f]_2 ratio = -(t-rho)/P: 2^{b_dev:.1}; theta_t and ode as above"),
        ),
    ]
}

/// Minimal `h > 0` with `±[[1−abh, a²h], [−b²h, 1+abh]] ∈ Γ₁(5)`, returned as the width `b²h`.
fn gamma1_5_width(a: i64, b: i64) -> i64 {
    let inside = |m: [i64; 4]| m[2].rem_euclid(5) == 0 && m[0].rem_euclid(5) == 1 && m[3].rem_euclid(5) == 1;
    (1..=1000)
        .find(|&h| {
            let m = [1 - a * b * h, a * a * h, -b * b * h, 1 + a * b * h];
            inside(m) || inside(m.map(|x| -x))
        })
        .map(|h| b * b * h)
        .expect("finite width")
}

fn criterion_6(res: &UniformizationResult) -> Line {
    let g = &res.group;
    let rel_ok = g.relation_log2_dev <= -f64::from(P) + 16.0;
    let mut tr_dev = f64::NEG_INFINITY;
    for (cusp, d) in [(Float::new(P), &g.d[0]), (g.c1.clone(), &g.d[1]), (g.c2.clone(), &g.d[2])] {
        let s = parabolic(&cusp, d);
        let tr = s.trace();
        let dev = (&(&tr * &tr) - &c(4.0, 0.0, P)).log2_abs();
        tr_dev = tr_dev.max(dev);
    }
    let c1 = g.c1.to_rational().unwrap();
    let c2 = g.c2.to_rational().unwrap();
    let d = stabilizer_constants_exact(&c1, &c2).unwrap();
    let exact_traces = [(Rational::new(), &d[0]), (c1.clone(), &d[1]), (c2.clone(), &d[2])]
        .iter()
        .all(|(cu, dd)| {
            let m = parabolic_exact(cu, dd);
            Rational::from(&m[0] + &m[3]) == 2
        });
    let id = [Rational::from(1), Rational::new(), Rational::new(), Rational::from(1)];
    let exact_rel = relation_product_exact(&c1, &c2).unwrap() == id;

    let third = Rational::from((1, 3));
    let two_fifths = Rational::from((2, 5));
    let ours = stabilizer_constants_exact(&third, &two_fifths).unwrap();
    let oracle = [gamma1_5_width(0, 1), gamma1_5_width(1, 3), gamma1_5_width(2, 5)];
    let g15 = ours.iter().zip(oracle).all(|(x, y)| *x == y) && oracle == [5, 45, 25];
    let ok = rel_ok && tr_dev <= -f64::from(P) + 16.0 && exact_traces && exact_rel && g15;
    line(
        6,
        ok,
        format!(
            "group: relation 2^{:.1}, max |tr^2-4| 2^{tr_dev:.1}, exact traces {exact_traces}, exact relation {exact_rel}, Gamma1(5) D = {oracle:?} vs {:?}",
            g.relation_log2_dev,
            ours.iter().map(|x| x.to_f64()).collect::<Vec<_>>()
        ),
    )
}

/// Worst `|L[y]_k| / M_k` where `M_k` bounds the recurrence terms of coefficient `k`.
fn operator_log2(spec: &ProblemSpec, r: &PowerSeries, a: &[BigComplex], b: Option<&[BigComplex]>, upto: usize) -> f64 {
    let al = spec.alpha.abs_f64();
    let ap1 = (&spec.alpha + 1.0).abs_f64();
    let rh = spec.rho.abs_f64();
    let abs = |v: &[BigComplex], k: usize| v.get(k).map_or(0.0, BigComplex::abs_f64);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=upto {
        let kf = k as f64;
        let rec = |v: &[BigComplex]| {
            (kf + 1.0).powi(2) * abs(v, k + 1)
                + (ap1 * (kf * kf + kf) + rh) * abs(v, k)
                + if k > 0 { al * kf * kf * abs(v, k - 1) } else { 0.0 }
        };
        let mut m = rec(a);
        if let Some(b) = b {
            m = rec(b)
                + 2.0 * al * kf * if k > 0 { abs(a, k - 1) } else { 0.0 }
                + ap1 * (2.0 * kf + 1.0) * abs(a, k)
                + 2.0 * (kf + 1.0) * abs(a, k + 1);
        }
        worst = worst.max(r.coeff(k).log2_abs() - m.log2());
    }
    worst
}

fn criterion_7(rng: &mut StdRng) -> Line {
    let thr = -f64::from(P) + 40.0;
    let mut worst_ode = f64::NEG_INFINITY;
    let mut worst_printed = f64::NEG_INFINITY;
    for _ in 0..5 {
        let alpha = c(rng.random_range(1.2..4.0), rng.random_range(-0.5..0.5), P);
        let rho = c(rng.random_range(-1.0..3.0), rng.random_range(-1.0..1.0), P);
        let spec = ProblemSpec::new(alpha.clone(), rho.clone(), N, P).unwrap();
        let (a, b) = frobenius_coefficients(&spec);
        let y = PowerSeries::new(a[..=N].to_vec(), Var::T);
        let u = PowerSeries::new(b[..=N].to_vec(), Var::T);
        let ly = apply_operator(&spec, &y).unwrap();
        let lu = log_part_residual(&spec, &y, &u).unwrap();
        worst_ode = worst_ode
            .max(operator_log2(&spec, &ly, &a, None, N - 2))
            .max(operator_log2(&spec, &lu, &a, Some(&b), N - 2));

        let small = ProblemSpec::new(alpha.clone(), rho.clone(), 8, P).unwrap();
        let art = build_artifacts(&small).unwrap();
        let ap1 = &alpha + 1.0;
        let t2 = &(&rho.scale_i64(2) - &alpha) - 1.0;
        let f2 = (&(&(&rho * &rho).scale_i64(9) - &(&rho * &ap1).scale_i64(2)) - &alpha).div_i64(4);
        for (got, want) in [
            (&art.a[1], rho.clone()),
            (&art.b[1], &ap1 - &rho.scale_i64(2)),
            (art.tmap.coeff(2), t2),
            (art.fmap.coeff(2), f2),
        ] {
            worst_printed = worst_printed.max(rel_log2(got, &want));
        }
    }
    let ok = worst_ode <= thr && worst_printed <= -f64::from(P) + 16.0;
    line(
        7,
        ok,
        format!("Frobenius: y and y-hat residual to order N-2 2^{worst_ode:.1} (relative), printed a1, b1, T2, F2 2^{worst_printed:.1}, 5 random pairs"),
    )
}

fn criterion_8() -> Line {
    let prec = 256;
    let cfg = SolverConfig::with_prec(prec);
    let tol = 10.0 * cfg.tolerance_log2().exp2();
    let solve_w = |w: &BigComplex| solve_rho(&w.recip(), &cfg).expect("direct solve").rho_f;
    let mut worst_reflect: f64 = 0.0;
    let mut worst_conj: f64 = 0.0;
    for (x, y) in [(0.52, 0.01), (0.47, 0.02), (0.51, -0.03)] {
        let z = c(x, y, prec);
        let rz = solve_w(&z);
        let one_minus = &BigComplex::one(prec) - &z;
        let r1 = solve_w(&one_minus);
        let predicted = &(&(&z * &rz) - 1.0) / &(&z - 1.0);
        worst_reflect = worst_reflect.max(r1.dist_f64(&predicted) / rz.abs_f64().max(1.0));
        let rc = solve_w(&z.conj());
        worst_conj = worst_conj.max(rc.dist_f64(&rz.conj()) / rz.abs_f64().max(1.0));
    }
    let ok = worst_reflect <= tol && worst_conj <= tol;
    line(
        8,
        ok,
        format!("symmetry at 3 points, {prec} bits: reflection {worst_reflect:.2e}, conjugation {worst_conj:.2e}, bound {tol:.2e}"),
    )
}

fn criterion_9(rng: &mut StdRng) -> Line {
    let data = AccessoryData::four_punctured(&c(2.0, 0.0, P), &BigComplex::one(P)).unwrap();
    let mi = m_infinity(&data.punctures, &data.m_vec);
    let expect = [1.0, -1.0, 0.0];
    let anchor_ok = data.m_vec.iter().zip(expect).all(|(m, e)| m.dist_f64(&c(e, 0.0, P)) < 1e-100)
        && mi.dist_f64(&c(0.5, 0.0, P)) < 1e-100;
    let sum = data.m_vec.iter().fold(BigComplex::zero(P), |s, m| &s + m);
    let sum_log2 = sum.log2_abs();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let alpha = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), P);
        let rho = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), P);
        let Ok(d) = AccessoryData::four_punctured(&alpha, &rho) else { continue };
        let m = rho_to_m(&d.punctures, &d.rho_vec).unwrap();
        let mut got = m.clone();
        got.push(m_infinity(&d.punctures, &m));
        for (g, w) in got.iter().zip(closed_forms(&alpha, &rho).iter()) {
            worst = worst.max(rel_log2(g, w));
        }
    }
    let ok = anchor_ok && sum_log2 <= -f64::from(P) + 20.0 && worst <= -f64::from(P) + 20.0;
    line(9, ok, format!("conversion: (1,-1,0,1/2) at (2,1) {anchor_ok}, sum m 2^{sum_log2:.1}, closed forms at 20 points 2^{worst:.1}"))
}

fn main() {
    // `cargo test -- --list` style invocations only ask for the test names
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_f0c5);
    let mut lines = Vec::new();
    let (res, elapsed) = solve_anchor();
    lines.push(criterion_1(&res, elapsed));
    lines.push(criterion_2(&res));
    let (l3, l4) = criteria_3_and_4();
    lines.push(l3);
    lines.push(l4);
    lines.extend(criterion_5(&res));
    lines.push(criterion_6(&res));
    lines.push(criterion_7(&mut rng));
    lines.push(criterion_8());
    lines.push(criterion_9(&mut rng));

    for l in &lines {
        let status = match (l.passed, l.enforced) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (not achievable as stated)",
        };
        println!("criterion {}: {status}: {}", l.id, l.text);
        if !l.passed && !l.enforced {
            println!(
                "    note: [f,f]_2 = -3c^2m^2 q^2m + ..., so the ratio equals -(t-rho)/P(t); the '+' form cannot hold at any rho"
            );
        }
    }
    let failed: Vec<u32> = lines.iter().filter(|l| l.enforced && !l.passed).map(|l| l.id).collect();
    if failed.is_empty() {
        println!("acceptance: all enforced criteria pass");
    } else {
        println!("acceptance: FAILED criteria {failed:?}");
        std::process::exit(1);
    }
}
