//! Run configuration: precision, tolerances, geometry, seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances derived from the working precision.
///
/// `elimination` is the threshold below which a normal-form coefficient
/// counts as absent: 2^-(p-16), leaving 16 bits of headroom over
/// accumulated rounding. `resonance` is the numeric root-of-unity band
/// 2^-(p/2); exact-angle multipliers bypass it entirely.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    pub elimination: f64,
    pub resonance: f64,
    pub multiplier_band: f64,
    pub root: f64,
}

impl Tolerances {
    pub fn for_precision(precision_bits: u32) -> Self {
        let p = precision_bits as i32;
        Tolerances {
            elimination: 2f64.powi(-(p - 16).max(8)),
            resonance: 2f64.powi(-(p / 2).max(8)),
            multiplier_band: 1e-10,
            root: 1e-9,
        }
    }
}

/// Output format for CLI reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    /// Working mantissa bits for coefficient arithmetic (>= 53).
    pub precision_bits: u32,
    /// Default truncation order for series work.
    pub truncation_order: usize,
    pub tolerances: Tolerances,
    /// Annulus modulus of the base elliptic curve, in (0,1).
    pub lambda: f64,
    /// Overlap half-width: lambda1 = 1-eps0, lambda2 = 1+eps0.
    pub eps0: f64,
    /// Optional override for the U0 radius; certified per germ when None.
    pub rho: Option<f64>,
    pub seed: u64,
    pub format: OutputFormat,
    /// Degree cap for f^m in the cycle search (d^m <= cap).
    pub cycle_degree_cap: u64,
    /// Largest period scanned by the cycle survey.
    pub survey_period_max: u32,
    /// Outer radius of the small-cycle survey ladder.
    pub survey_radius: f64,
    /// Number of halvings in the survey ladder (radii r0 * 2^-j, j=0..J).
    pub survey_halvings: u32,
    /// Denominator bound for resonance detection.
    pub resonance_qmax: u64,
    /// Index bound for the polynomial-growth condition scan.
    pub condition_i_nmax: u64,
    /// Index bound for the liminf condition scan.
    pub condition_ii_ellmax: u64,
    /// Growth bases tested by the liminf condition.
    pub condition_ii_bases: Vec<f64>,
    /// Bit cap for constructed Cremer-type angles.
    pub cremer_bit_cap: u64,
    /// Iteration budget for Green evaluations.
    pub green_iteration_max: u32,
    /// Stability gate on the fitted exponent for the Siegel-candidate branch.
    pub siegel_k_cap: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let precision_bits = 128;
        RunConfig {
            precision_bits,
            truncation_order: 12,
            tolerances: Tolerances::for_precision(precision_bits),
            lambda: 0.5,
            eps0: 0.05,
            rho: None,
            seed: 0x5eed_1eaf,
            format: OutputFormat::Json,
            cycle_degree_cap: 4096,
            survey_period_max: 6,
            survey_radius: 0.3,
            survey_halvings: 6,
            resonance_qmax: 1_000_000,
            condition_i_nmax: 10_000,
            condition_ii_ellmax: 30,
            condition_ii_bases: vec![2.0],
            cremer_bit_cap: 1 << 26,
            green_iteration_max: 4096,
            siegel_k_cap: 2.0,
        }
    }
}

impl RunConfig {
    pub fn with_precision(precision_bits: u32) -> Self {
        RunConfig {
            precision_bits,
            tolerances: Tolerances::for_precision(precision_bits),
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 53 {
            return Err(Error::Precondition(format!(
                "precision_bits must be >= 53, got {}",
                self.precision_bits
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Precondition(format!(
                "lambda must lie in (0,1), got {}",
                self.lambda
            )));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 1.0 - self.lambda) {
            return Err(Error::Precondition(format!(
                "eps0 must lie in (0, 1-lambda), got {}",
                self.eps0
            )));
        }
        let t = &self.tolerances;
        if !(t.elimination > 0.0 && t.resonance > 0.0 && t.multiplier_band > 0.0 && t.root > 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(())
    }
}
