use serde::{Deserialize, Serialize};

use crate::frobenius::ContinuationConfig;
use crate::geometry::Z2Branch;

/// Numerical settings shared by the solver and the experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub prec: u32,
    /// Minimum truncation order of the reported q-expansions.
    pub order: usize,
    /// Certified tolerance is `2^tol_log2`; `None` means `−prec/2`.
    pub tol_log2: Option<f64>,
    /// Probe angles θ for `τ* = ĉ + (e^{iθ} − 1)/D`; the first drives Newton.
    pub probe_angles: Vec<f64>,
    /// Grow the q-expansion order until the probes converge to tolerance.
    pub auto_extend: bool,
    pub max_order: usize,
    pub max_newton_iters: usize,
    pub z2_branch: Z2Branch,
    /// Fixed weight-one multiplier sign; `None` tries `+1` then `−1`.
    pub multiplier_sign: Option<i8>,
    pub continuation: ContinuationConfigSerde,
}

/// Serializable mirror of [`ContinuationConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfigSerde {
    pub step_ratio: f64,
    pub clearance: f64,
    pub bulge: f64,
    pub start_fraction: f64,
}

impl From<&ContinuationConfigSerde> for ContinuationConfig {
    fn from(c: &ContinuationConfigSerde) -> Self {
        ContinuationConfig { step_ratio: c.step_ratio, clearance: c.clearance, bulge: c.bulge, start_fraction: c.start_fraction }
    }
}

impl Default for ContinuationConfigSerde {
    fn default() -> Self {
        let c = ContinuationConfig::default();
        ContinuationConfigSerde { step_ratio: c.step_ratio, clearance: c.clearance, bulge: c.bulge, start_fraction: c.start_fraction }
    }
}

pub const DEFAULT_PREC: u32 = 512;
pub const DEFAULT_ORDER: usize = 150;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            prec: DEFAULT_PREC,
            order: DEFAULT_ORDER,
            tol_log2: None,
            probe_angles: vec![std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_3],
            auto_extend: true,
            max_order: 4000,
            max_newton_iters: 40,
            z2_branch: Z2Branch::Negative,
            multiplier_sign: None,
            continuation: ContinuationConfigSerde::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_prec(prec: u32) -> Self {
        SolverConfig { prec, ..Self::default() }
    }

    pub fn tolerance_log2(&self) -> f64 {
        self.tol_log2.unwrap_or(-f64::from(self.prec) / 2.0)
    }

    pub fn continuation(&self) -> ContinuationConfig {
        (&self.continuation).into()
    }
}
