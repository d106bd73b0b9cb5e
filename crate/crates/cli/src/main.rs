//! `fuchsian`: Fuchsian values, identity checks, local expansions and parameter conversion.
//!
//! Exit codes: 0 success, 2 numerical failure, 3 invalid input.

mod cache;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuchsian_core::accessory::{relation_residuals, AccessoryData, AccessoryJson};
use fuchsian_core::config::SolverConfig;
use fuchsian_core::expansion::{fit_coefficients, sample_line_with, verify_relations, SampleSet};
use fuchsian_core::geometry::{normalize_domain, Step};
use fuchsian_core::modular::{
    ring_basis, rational_generators, verify_bracket_identities, verify_uniformizing_identities, weight_two_triple,
};
use fuchsian_core::solver::{certify, solve_puncture, solve_rho_from, ResultJson, UniformizationResult};
use fuchsian_core::{accessory, BigComplex, Error};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cache::{Cache, CacheRecord};

#[derive(Parser, Debug)]
#[command(name = "fuchsian", version, about = "Fuchsian accessory parameters of four-punctured spheres")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Working precision in bits.
    #[arg(long, global = true, env = "FUCHSIAN_PREC", default_value_t = 512)]
    prec: u32,
    /// Minimum truncation order of the q-expansions.
    #[arg(long, global = true, env = "FUCHSIAN_ORDER", default_value_t = 150)]
    order: usize,
    /// Certificate tolerance exponent: residuals must be below 2^TOL (default −prec/2).
    #[arg(long, global = true, env = "FUCHSIAN_TOL", allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Probe angles θ (radians, comma separated) for τ* = ĉ + (e^{iθ} − 1)/D.
    #[arg(long, global = true, env = "FUCHSIAN_TAU", value_delimiter = ',')]
    tau: Option<Vec<f64>>,
    /// JSONL cache of solves keyed by (w, precision, N).
    #[arg(long, global = true, env = "FUCHSIAN_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long, global = true, env = "FUCHSIAN_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Newton seed for ρ at the normalized puncture, replacing the continuation seed.
    #[arg(long, global = true, env = "FUCHSIAN_ANCHOR", allow_hyphen_values = true)]
    anchor: Option<String>,
    /// Serialize floats as exact hex strings.
    #[arg(long, global = true, env = "FUCHSIAN_HEX")]
    hex: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuchsian value for the sphere punctured at 0, 1, ∞ and w.
    Solve {
        /// Puncture, e.g. `0.5`, `0.5+0.001i`, `0.3,-0.2`.
        #[arg(allow_hyphen_values = true)]
        w: String,
    },
    /// Recompute the certificate and run the q-series identities on a stored result.
    Verify { file: PathBuf },
    /// Fit the local expansion of ρ_F around w = 1/2.
    Expand {
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 6, 8])]
        slopes: Vec<u32>,
        /// Sample offsets x (default ±{2,4,…,16}·10⁻⁶).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xs: Option<Vec<f64>>,
    },
    /// Basis f^k t^i of weight-2k forms and the bracket reports.
    Ring {
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Stored `solve` output; otherwise `--w` is solved.
        #[arg(long)]
        result: Option<PathBuf>,
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        w: String,
    },
    /// Classical parameters m_j from (α, ρ) or from an accessory-data JSON file.
    Convert {
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 2 } else { 3 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 3, message: msg.into() }
}

fn numerical(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// What `solve` prints: the result at the normalized puncture plus `ρ_F` carried back to `w`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SolveOutput {
    w: [String; 2],
    steps: Vec<Step>,
    normalized_w: [String; 2],
    #[serde(rename = "rho_F_w")]
    rho_f_w: [String; 2],
    result: ResultJson,
}

impl GlobalOpts {
    fn solver_config(&self) -> CliResult<SolverConfig> {
        if self.prec < 128 {
            return Err(usage(format!("--prec {} is below the minimum 128", self.prec)));
        }
        if self.order < 32 {
            return Err(usage(format!("--order {} is below the minimum 32", self.order)));
        }
        let mut cfg = SolverConfig { prec: self.prec, order: self.order, tol_log2: self.tol, ..SolverConfig::default() };
        if let Some(t) = &self.tau {
            if t.is_empty() || t.iter().any(|a| !(*a > 0.0 && *a < std::f64::consts::PI)) {
                return Err(usage("--tau angles must lie in (0, π)"));
            }
            cfg.probe_angles.clone_from(t);
        }
        Ok(cfg)
    }

    fn cache(&self) -> Option<Cache> {
        self.cache.as_ref().map(Cache::new)
    }
}

fn parse_complex(s: &str, prec: u32) -> CliResult<BigComplex> {
    BigComplex::parse(s, prec).map_err(|e| usage(format!("cannot parse `{s}`: {e}")))
}

fn solve_output(opts: &GlobalOpts, w: &BigComplex, cfg: &SolverConfig) -> CliResult<SolveOutput> {
    let (record, result, rho_w) = match &opts.anchor {
        Some(seed) => {
            let (alpha, record) = normalize_domain(w)?;
            let seed = parse_complex(seed, cfg.prec)?;
            let result = solve_rho_from(&alpha, &seed, cfg)?;
            let rho_w = accessory::transport_rho(&record, &result.rho_f)?;
            (record, result, rho_w)
        }
        None => {
            let s = solve_puncture(w, cfg)?;
            (s.record, s.result, s.rho_f)
        }
    };
    Ok(SolveOutput {
        w: w.to_strings(opts.hex),
        steps: record.steps.clone(),
        normalized_w: record.normalized_w.to_strings(opts.hex),
        rho_f_w: rho_w.to_strings(opts.hex),
        result: result.to_json(opts.hex),
    })
}

fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // a closed pipe downstream is not our failure
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(v: &impl Serialize) -> CliResult<()> {
    emit(&serde_json::to_string_pretty(v).map_err(|e| numerical(e.to_string()))?)
}

fn cmd_solve(opts: &GlobalOpts, w: &str) -> CliResult<()> {
    let cfg = opts.solver_config()?;
    let w = parse_complex(w, cfg.prec)?;
    let cache = opts.cache();
    let cached = match &cache {
        Some(c) => c.lookup(&w, cfg.prec, cfg.order, true)?,
        None => None,
    };
    let out: SolveOutput = match cached.and_then(|r| r.output) {
        Some(v) => serde_json::from_value(v).map_err(|e| usage(format!("corrupt cache record: {e}")))?,
        None => {
            let out = solve_output(opts, &w, &cfg)?;
            if let Some(c) = &cache {
                c.append(&CacheRecord {
                    w: w.to_strings(true),
                    precision_bits: cfg.prec,
                    n: cfg.order,
                    rho_f: out.rho_f_w.clone(),
                    output: Some(serde_json::to_value(&out).map_err(|e| numerical(e.to_string()))?),
                })?;
            }
            out
        }
    };
    match opts.format {
        Format::Json => print_json(&out),
        Format::Csv => {
            emit(&format!(
                "w_re,w_im,rho_re,rho_im\n{},{},{},{}",
                out.w[0], out.w[1], out.rho_f_w[0], out.rho_f_w[1]
            ))
        }
    }
}

/// Reads either a full `solve` output or a bare result record.
fn load_result(path: &PathBuf) -> CliResult<UniformizationResult> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(usage(format!("{} is empty", path.display())));
    }
    let json: ResultJson = match serde_json::from_str::<SolveOutput>(&text) {
        Ok(o) => o.result,
        Err(_) => serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?,
    };
    Ok(UniformizationResult::from_json(&json)?)
}

fn cmd_verify(file: &PathBuf) -> CliResult<()> {
    let mut res = load_result(file)?;
    // ρ_F is authoritative; a stale ρ̂ field is reported, not trusted
    let rho_hat = &res.rho_f / &res.alpha;
    let rho_hat_consistent = (&rho_hat - &res.rho_hat_f).log2_abs() < -f64::from(res.prec) + 16.0;
    res.rho_hat_f = rho_hat;

    let mut angles: Vec<f64> = Vec::new();
    for p in &res.residuals {
        if !angles.contains(&p.angle) {
            angles.push(p.angle);
        }
    }
    let cfg = SolverConfig {
        prec: res.prec,
        order: res.order,
        tol_log2: Some(res.tol_log2),
        probe_angles: angles,
        z2_branch: res.branch_choices.z2,
        multiplier_sign: Some(res.multiplier_sign),
        ..SolverConfig::default()
    };
    let (cert_ok, identical, recomputed_max) =
        match certify(&res.alpha, &res.rho_f, &cfg, res.multiplier_sign, res.newton_iterations) {
            Ok(again) => {
                let same = again.residuals.len() == res.residuals.len()
                    && again
                        .residuals
                        .iter()
                        .zip(&res.residuals)
                        .all(|(a, b)| a.value.to_strings(true) == b.value.to_strings(true));
                (true, same, again.max_residual_log2())
            }
            Err(Error::ResidualCheckFailed(_)) => (false, false, f64::NAN),
            Err(e) => return Err(e.into()),
        };
    let identities = verify_uniformizing_identities(&res)?;
    let (_, _, generators) = rational_generators(&res)?;
    let brackets = verify_bracket_identities(&weight_two_triple(&res)?, res.prec)?;
    let passed = cert_ok && identities.all_passed() && generators.all_passed() && brackets.all_passed();
    let report = json!({
        "passed": passed,
        "certificate": {
            "passed": cert_ok,
            "bit_identical": identical,
            "max_residual_log2": if recomputed_max.is_finite() { json!(recomputed_max) } else { json!(null) },
            "tolerance_log2": res.tol_log2,
        },
        "rho_hat_consistent": rho_hat_consistent,
        "identities": identities,
        "generators": generators,
        "brackets": brackets,
    });
    print_json(&report)?;
    if !passed {
        identities.ensure()?;
        generators.ensure()?;
        brackets.ensure()?;
        return Err(numerical("certificate check failed"));
    }
    Ok(())
}

fn cmd_expand(opts: &GlobalOpts, degree: usize, slopes: &[u32], xs: Option<&[f64]>) -> CliResult<()> {
    let cfg = opts.solver_config()?;
    let default_xs: Vec<f64> = (1..=8).flat_map(|k| [2e-6 * f64::from(k), -2e-6 * f64::from(k)]).collect();
    let xs = xs.unwrap_or(&default_xs);
    if slopes.contains(&0) {
        return Err(usage("slopes must be positive"));
    }
    let cache = opts.cache();
    let solve = |w: &BigComplex| -> fuchsian_core::Result<BigComplex> {
        if let Some(c) = &cache {
            if let Ok(Some(rec)) = c.lookup(w, cfg.prec, cfg.order, false) {
                return BigComplex::from_strings(&rec.rho_f, cfg.prec);
            }
        }
        let rho = solve_puncture(w, &cfg)?.rho_f;
        if let Some(c) = &cache {
            let rec = CacheRecord { w: w.to_strings(true), precision_bits: cfg.prec, n: cfg.order, rho_f: rho.to_strings(true), output: None };
            c.append(&rec).map_err(|e| Error::InvalidInput(format!("cache: {e}")))?;
        }
        Ok(rho)
    };
    let sets: Vec<SampleSet> =
        slopes.iter().map(|&n| sample_line_with(n, xs, cfg.prec, &solve)).collect::<fuchsian_core::Result<_>>()?;
    let dropped: Vec<_> = sets.iter().flat_map(|s| s.dropped.iter().map(move |(x, e)| json!({"slope": s.slope, "x": x, "error": e}))).collect();
    match opts.format {
        Format::Csv => {
            let mut rows = vec!["x,slope,rho_re,rho_im".to_string()];
            rows.extend(sets.iter().flat_map(|s| s.csv_rows(opts.hex)));
            emit(&rows.join("\n"))
        }
        Format::Json => {
            let fit = fit_coefficients(&sets, degree)?;
            let relations = verify_relations(&fit, 1e-6);
            print_json(&json!({ "fit": fit.to_json(), "relations": relations, "dropped": dropped }))
        }
    }
}

fn cmd_ring(opts: &GlobalOpts, k: u32, result: Option<&PathBuf>, w: &str) -> CliResult<()> {
    if opts.format == Format::Csv {
        return Err(usage("ring emits JSON only"));
    }
    let res = match result {
        Some(p) => load_result(p)?,
        None => {
            let cfg = opts.solver_config()?;
            let w = parse_complex(w, cfg.prec)?;
            solve_output(opts, &w, &cfg).and_then(|o| Ok(UniformizationResult::from_json(&o.result)?))?
        }
    };
    let basis = ring_basis(&res, k)?;
    let (g, g1, generators) = rational_generators(&res)?;
    let brackets = verify_bracket_identities(&weight_two_triple(&res)?, res.prec)?;
    print_json(&json!({
        "k": basis.k,
        "rank": basis.rank,
        "elements": basis.elements.iter().map(|e| e.to_json(opts.hex)).collect::<Vec<_>>(),
        "generators": [g.to_json(opts.hex), g1.to_json(opts.hex)],
        "generator_identities": generators,
        "bracket_identities": brackets,
    }))
}

fn cmd_convert(opts: &GlobalOpts, alpha: Option<&str>, rho: Option<&str>, input: Option<&PathBuf>) -> CliResult<()> {
    let prec = opts.prec;
    let data = match (alpha, rho, input) {
        (Some(a), Some(r), None) => AccessoryData::four_punctured(&parse_complex(a, prec)?, &parse_complex(r, prec)?)?,
        (None, None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let j: AccessoryJson = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            AccessoryData::from_json(&j, prec)?
        }
        _ => return Err(usage("give either --alpha and --rho, or --input")),
    };
    let (sum, weighted) = relation_residuals(&data.punctures, &data.m_vec);
    let out = data.to_json(opts.hex);
    match opts.format {
        Format::Json => print_json(&json!({
            "data": out,
            "relation_residuals_log2": [sum.log2_abs().max(-1e4), weighted.log2_abs().max(-1e4)],
        })),
        Format::Csv => {
            let mut rows = vec!["puncture_re,puncture_im,m_re,m_im".to_string()];
            rows.extend(out.punctures.iter().zip(&out.m_vec).map(|(p, m)| format!("{},{},{},{}", p[0], p[1], m[0], m[1])));
            if let Some(mi) = &out.m_infinity {
                rows.push(format!("inf,inf,{},{}", mi[0], mi[1]));
            }
            emit(&rows.join("\n"))
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let o = &cli.opts;
    match &cli.cmd {
        Command::Solve { w } => cmd_solve(o, w),
        Command::Verify { file } => cmd_verify(file),
        Command::Expand { degree, slopes, xs } => cmd_expand(o, *degree, slopes, xs.as_deref()),
        Command::Ring { k, result, w } => cmd_ring(o, *k, result.as_ref(), w),
        Command::Convert { alpha, rho, input } => cmd_convert(o, alpha.as_deref(), rho.as_deref(), input.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
