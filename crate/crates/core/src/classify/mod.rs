//! The decision engine: combines the normal form, diophantine conditions,
//! cycle survey, and surface certificates into a typed verdict.

mod cluster;
mod survey;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diophantine::{
    condition_i, condition_ii, detect_resonance, DiophantineReport, LiminfTrend,
};
use crate::error::{Error, Result};
use crate::germ::{reduce_with_escalation, NormalFormReport, PolynomialGerm};
use crate::surface::{surface_check, ExponentMode, SurfaceCheckReport, SurfaceModel};

pub use cluster::{near_resonant_cluster, near_resonant_orders, ClusterWitness};
pub use survey::{small_cycle_survey, RadiusOutcome, SurveyReport, Witness};
pub use sweep::{example43_grid, run_sweep, GridSample, SweepRow, SweepTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Thm1-i-repelling")]
    RepellingFixedPoint,
    #[serde(rename = "Thm1-i-attracting")]
    AttractingFixedPoint,
    #[serde(rename = "Thm1-i-siegel-candidate")]
    SiegelCandidate,
    #[serde(rename = "Thm1-ii-parabolic")]
    Parabolic,
    #[serde(rename = "Thm1-iii-cremer-candidate")]
    CremerCandidate,
    #[serde(rename = "out-of-scope-finite-order")]
    OutOfScopeFiniteOrder,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorollaryStatus {
    #[serde(rename = "semi-positive")]
    SemiPositive,
    #[serde(rename = "not-semi-positive")]
    NotSemiPositive,
    #[serde(rename = "n/a")]
    NotApplicable,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Default)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diophantine: Option<DiophantineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_survey: Option<SurveyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_check: Option<SurfaceCheckReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub branch: Branch,
    pub corollary: CorollaryStatus,
    pub evidence: Evidence,
    pub notes: Vec<String>,
    /// Multiplier modulus and the tolerance band used on it.
    pub tau_modulus: f64,
    pub multiplier_band: f64,
    pub precision_bits: u32,
}

/// The Theorem-1 / Corollary decision tree.
///
/// (1) off the unit circle: repelling/attracting with a Phi gluing
/// certificate; (2) resonant: the normal-form obstruction decides the
/// parabolic branch (linear germs of finite order are out of scope);
/// (3) non-resonant circle: stable polynomial growth of the small
/// divisors is the Siegel-candidate gate, otherwise the liminf condition
/// plus the small-cycle survey decide the Cremer-candidate branch.
pub fn decide(f: &PolynomialGerm, cfg: &RunConfig) -> Result<Verdict> {
    cfg.validate()?;
    if f.tau().is_zero() {
        return Err(Error::Precondition(
            "classification needs a holonomy germ with tau != 0".into(),
        ));
    }
    let tols = &cfg.tolerances;
    let tau_modulus = f.multiplier().modulus_f64();
    let mut notes = Vec::new();
    let mut evidence = Evidence::default();

    // (1) Off the circle.
    if (tau_modulus - 1.0).abs() > tols.multiplier_band && !f.multiplier().on_circle(0.0) {
        let branch = if tau_modulus > 1.0 {
            Branch::RepellingFixedPoint
        } else {
            Branch::AttractingFixedPoint
        };
        match phi_certificate(f, cfg) {
            Ok(rep) => evidence.surface_check = Some(rep),
            Err(e) => notes.push(format!("phi certificate unavailable: {e}")),
        }
        return Ok(Verdict {
            branch,
            corollary: CorollaryStatus::NotApplicable,
            evidence,
            notes,
            tau_modulus,
            multiplier_band: tols.multiplier_band,
            precision_bits: cfg.precision_bits,
        });
    }

    // (2) Resonance.
    if let Some(found) = detect_resonance(f.multiplier(), cfg.resonance_qmax, tols) {
        let q = found.order;
        evidence.diophantine = Some(DiophantineReport {
            resonant: Some(found),
            condition_i: None,
            condition_ii: None,
            small_divisor_log: Vec::new(),
        });
        if f.degree() == 1 {
            notes.push(format!("linear germ with tau^{q} = 1: f^{q} is the identity"));
            return Ok(Verdict {
                branch: Branch::OutOfScopeFiniteOrder,
                corollary: CorollaryStatus::NotApplicable,
                evidence,
                notes,
                tau_modulus,
                multiplier_band: tols.multiplier_band,
                precision_bits: cfg.precision_bits,
            });
        }
        // Obstruction search cap: 4q before declaring inconclusive. The
        // first resonant order q almost always carries it, so the
        // expansion order grows on demand.
        let n_cap = (4 * q as usize + 1).max(cfg.truncation_order);
        let mut rep = None;
        for cap in [q as usize + 1, 2 * q as usize + 1, n_cap] {
            if cap > n_cap {
                break;
            }
            let r = reduce_with_escalation(
                f,
                cap.max(2),
                tols.elimination,
                tols,
                cfg.precision_bits.max(256) * 16,
            )?;
            let found = r.obstruction.is_some();
            rep = Some(r);
            if found {
                break;
            }
        }
        let rep = rep.expect("at least one reduce ran");
        let obstructed = rep.obstruction.is_some();
        evidence.normal_form = Some(rep);
        if obstructed {
            return Ok(Verdict {
                branch: Branch::Parabolic,
                corollary: CorollaryStatus::NotApplicable,
                evidence,
                notes,
                tau_modulus,
                multiplier_band: tols.multiplier_band,
                precision_bits: cfg.precision_bits,
            });
        }
        notes.push(format!(
            "no obstruction up to order {n_cap} (cap 4q); undecided at this depth"
        ));
        return Ok(Verdict {
            branch: Branch::Inconclusive,
            corollary: CorollaryStatus::Inconclusive,
            evidence,
            notes,
            tau_modulus,
            multiplier_band: tols.multiplier_band,
            precision_bits: cfg.precision_bits,
        });
    }

    // (3) On the circle, not resonant.
    let ci = match condition_i(f.multiplier(), cfg.condition_i_nmax) {
        Ok(r) => r,
        Err(e) => return precision_inconclusive(e, "condition_i", f, cfg, evidence, notes),
    };
    let stable_polynomial = ci.stable && ci.fitted_k <= cfg.siegel_k_cap;
    if stable_polynomial {
        evidence.diophantine = Some(DiophantineReport {
            resonant: None,
            condition_i: Some(ci),
            condition_ii: None,
            small_divisor_log: small_divisor_prefix(f, 64),
        });
        match phi_certificate(f, cfg) {
            Ok(rep) => evidence.surface_check = Some(rep),
            Err(e) => notes.push(format!(
                "phi certificate (truncation-bounded) unavailable: {e}"
            )),
        }
        notes.push("Siegel linearizability is sampled arithmetic evidence, not a proof".into());
        return Ok(Verdict {
            branch: Branch::SiegelCandidate,
            corollary: CorollaryStatus::SemiPositive,
            evidence,
            notes,
            tau_modulus,
            multiplier_band: tols.multiplier_band,
            precision_bits: cfg.precision_bits,
        });
    }

    let cii = match condition_ii(
        f.multiplier(),
        f.degree() as u64,
        &cfg.condition_ii_bases,
        cfg.condition_ii_ellmax,
        tols,
    ) {
        Ok(r) => r,
        Err(e) => return precision_inconclusive(e, "condition_ii", f, cfg, evidence, notes),
    };
    let survey = small_cycle_survey(f, cfg)?;
    let trending = cii.verdict == LiminfTrend::TrendingToMinusInfinity;
    let cycles_everywhere = survey.all_nonempty;
    evidence.diophantine = Some(DiophantineReport {
        resonant: None,
        condition_i: Some(ci),
        condition_ii: Some(cii),
        small_divisor_log: small_divisor_prefix(f, 64),
    });
    evidence.cycle_survey = Some(survey);

    if trending && cycles_everywhere {
        notes.push(
            "minimal singular metric evidence: |f_C|^{-2} extremal per Corollary (ii)".into(),
        );
        return Ok(Verdict {
            branch: Branch::CremerCandidate,
            corollary: CorollaryStatus::NotSemiPositive,
            evidence,
            notes,
            tau_modulus,
            multiplier_band: tols.multiplier_band,
            precision_bits: cfg.precision_bits,
        });
    }
    if !trending {
        notes.push("liminf condition not witnessed at this depth".into());
    }
    if !cycles_everywhere {
        notes.push("small-cycle survey found an empty punctured disk".into());
    }
    Ok(Verdict {
        branch: Branch::Inconclusive,
        corollary: CorollaryStatus::Inconclusive,
        evidence,
        notes,
        tau_modulus,
        multiplier_band: tols.multiplier_band,
        precision_bits: cfg.precision_bits,
    })
}

fn precision_inconclusive(
    e: Error,
    stage: &str,
    f: &PolynomialGerm,
    cfg: &RunConfig,
    evidence: Evidence,
    mut notes: Vec<String>,
) -> Result<Verdict> {
    match e {
        Error::PrecisionExhausted { .. } | Error::InsufficientPrecision { .. } => {
            notes.push(format!("precision exhausted in {stage}: {e}"));
            Ok(Verdict {
                branch: Branch::Inconclusive,
                corollary: CorollaryStatus::Inconclusive,
                evidence,
                notes,
                tau_modulus: f.multiplier().modulus_f64(),
                multiplier_band: cfg.tolerances.multiplier_band,
                precision_bits: cfg.precision_bits,
            })
        }
        other => Err(other),
    }
}

fn small_divisor_prefix(f: &PolynomialGerm, n: u64) -> Vec<f64> {
    (1..=n)
        .map(|k| crate::diophantine::small_divisor_log(f.multiplier(), k).neg_log)
        .collect()
}

/// Phi gluing certificate for branch (1) and the Siegel-candidate
/// branch; truncation-bounded for nonlinear germs.
fn phi_certificate(f: &PolynomialGerm, cfg: &RunConfig) -> Result<SurfaceCheckReport> {
    let model = SurfaceModel::new(f.clone(), cfg, ExponentMode::Phi, cfg.truncation_order)?;
    let xi_radius = (model.cert_radius * 0.5).clamp(1e-6, 1e-3);
    surface_check(&model, 200, xi_radius, 1e-8, cfg.seed)
}
