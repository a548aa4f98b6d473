//! Small-cycle survey over a shrinking ladder of punctured disks.
//!
//! Theorem (iii)'s hypothesis quantifies over every neighborhood of 0;
//! the survey approximates it by the radii r_j = r0 2^-j, j = 0..J,
//! asking for a cycle (excluding the fixed point 0 itself) inside each.
//! The generic route is the simultaneous root finder; when it comes up
//! empty and the multiplier is near-resonant in exact angle form, the
//! cluster construction supplies witnesses at scales no floating grid
//! reaches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dynamics::periodic_cycles;
use crate::error::Result;
use crate::germ::PolynomialGerm;

use super::cluster::{near_resonant_cluster, near_resonant_orders, ClusterWitness};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleSummary {
    pub period: u32,
    pub max_radius: f64,
    pub multiplier_norm: f64,
    pub class: crate::dynamics::StabilityClass,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Cycle(CycleSummary),
    Cluster(ClusterWitness),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusOutcome {
    pub radius: f64,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurveyReport {
    pub ladder: Vec<RadiusOutcome>,
    pub all_nonempty: bool,
    pub period_cap: u32,
}

pub fn small_cycle_survey(f: &PolynomialGerm, cfg: &RunConfig) -> Result<SurveyReport> {
    let r0 = cfg.survey_radius;
    let origin = Complex64::new(0.0, 0.0);
    let puncture = 1e-13;

    // One root-finding pass over the widest disk; per-radius filtering
    // afterwards.
    let cycles = periodic_cycles(
        f,
        cfg.survey_period_max,
        origin,
        r0 * (1.0 + 1e-9),
        cfg.cycle_degree_cap,
        cfg.tolerances.root,
        cfg.tolerances.multiplier_band,
        cfg.seed,
    )?;

    // Deep cluster witnesses, shared by every radius above their scale.
    let mut cluster: Option<ClusterWitness> = None;
    for q in near_resonant_orders(f.multiplier(), cfg.survey_period_max as u64 * 2, 1e-4) {
        if let Some(w) = near_resonant_cluster(f, q, cfg.precision_bits)? {
            cluster = Some(w);
            break;
        }
    }

    let mut ladder = Vec::new();
    let mut all_nonempty = true;
    for j in 0..=cfg.survey_halvings {
        let r = r0 * 2f64.powi(-(j as i32));
        let found = cycles
            .iter()
            .filter(|c| {
                c.max_radius() < r && c.points.iter().all(|p| p.norm() > puncture)
            })
            .min_by(|a, b| a.max_radius().total_cmp(&b.max_radius()))
            .map(|c| {
                Witness::Cycle(CycleSummary {
                    period: c.period,
                    max_radius: c.max_radius(),
                    multiplier_norm: c.multiplier.norm(),
                    class: c.class,
                })
            })
            .or_else(|| {
                cluster.as_ref().and_then(|w| {
                    (w.log2_radius < r.log2() - 2.0).then(|| Witness::Cluster(w.clone()))
                })
            });
        all_nonempty &= found.is_some();
        ladder.push(RadiusOutcome { radius: r, witness: found });
    }

    Ok(SurveyReport {
        ladder,
        all_nonempty,
        period_cap: cfg.survey_period_max,
    })
}
