//! Parameter sweep over the family tau xi + xi^2.

use rug::Float;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::diophantine::{cremer_angle, Angle, Multiplier};
use crate::error::Result;
use crate::germ::PolynomialGerm;
use crate::num::unit_from_angle;

use super::{decide, Branch, CorollaryStatus};

#[derive(Clone, Debug)]
pub struct GridSample {
    pub label: String,
    pub multiplier: Multiplier,
    pub on_circle_exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub tau: String,
    pub branch: Branch,
    pub corollary: CorollaryStatus,
    pub obstruction_order: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub branch_counts: BTreeMap<String, usize>,
}

/// The qualitative grid: off-circle rings, exact rational angles,
/// golden-shifted angles, and one constructed Cremer-type angle.
pub fn example43_grid(
    off_circle: u32,
    rational_qmax: u64,
    golden_shifted: u32,
    cremer_depth: u32,
    cfg: &RunConfig,
) -> Result<Vec<GridSample>> {
    let mut grid = Vec::new();
    let prec = cfg.precision_bits;

    // Off-circle ring samples at |tau| in {0.9, 1.1}.
    let per_ring = (off_circle / 2).max(1);
    for (ring, radius) in [(0u32, 0.9f64), (1, 1.1)] {
        for j in 0..per_ring {
            if grid.len() as u32 >= off_circle {
                break;
            }
            let theta = Float::with_val(prec, j as f64 + 0.5) / Float::with_val(prec, per_ring);
            let mut z = unit_from_angle(prec, &theta);
            z *= Float::with_val(prec, radius);
            grid.push(GridSample {
                label: format!("off-circle-{}-{j}", if ring == 0 { "in" } else { "out" }),
                multiplier: Multiplier::Numeric(z),
                on_circle_exact: false,
            });
        }
    }

    // Exact rational angles p/q, lowest terms, q ascending.
    let mut count = 0;
    'outer: for q in 1..=rational_qmax {
        for p in 0..q.max(1) {
            if q > 1 && gcd(p, q) != 1 {
                continue;
            }
            if q == 1 && p != 0 {
                continue;
            }
            grid.push(GridSample {
                label: format!("rational-{p}-{q}"),
                multiplier: Multiplier::Circle(Angle::rational(p as i64, q)?),
                on_circle_exact: true,
            });
            count += 1;
            if count >= 24 {
                break 'outer;
            }
        }
    }

    // Golden-shifted angles: the noble numbers 1/(j + 1/phi), i.e. the
    // golden continued fraction shifted by an integer head. All partial
    // quotients stay bounded, so these are Siegel-grade samples.
    let gp = prec.max(512);
    for j in 1..=golden_shifted {
        let mut theta = Float::with_val(gp, 5).sqrt();
        theta -= 1;
        theta /= 2;
        theta += Float::with_val(gp, j);
        theta.recip_mut();
        grid.push(GridSample {
            label: format!("golden-shift-{j}"),
            multiplier: Multiplier::Circle(Angle::real(theta)),
            on_circle_exact: true,
        });
    }

    // One constructed Cremer-type angle.
    let cremer = cremer_angle(2, cremer_depth, 2.0, cfg.cremer_bit_cap)?;
    grid.push(GridSample {
        label: format!("cremer-depth-{cremer_depth}"),
        multiplier: cremer.multiplier,
        on_circle_exact: true,
    });

    Ok(grid)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// decide() per grid point over the quadratic family; per-sample
/// failures become inconclusive rows rather than errors.
pub fn run_sweep(grid: &[GridSample], cfg: &RunConfig) -> SweepTable {
    let mut rows = Vec::with_capacity(grid.len());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for sample in grid {
        let row = match PolynomialGerm::quadratic_family(sample.multiplier.clone(), cfg.precision_bits)
            .and_then(|f| decide(&f, cfg))
        {
            Ok(v) => SweepRow {
                label: sample.label.clone(),
                tau: sample.multiplier.describe(),
                branch: v.branch,
                corollary: v.corollary,
                obstruction_order: v
                    .evidence
                    .normal_form
                    .as_ref()
                    .and_then(|nf| nf.obstruction.as_ref().map(|o| o.order)),
                notes: v.notes,
            },
            Err(e) => SweepRow {
                label: sample.label.clone(),
                tau: sample.multiplier.describe(),
                branch: Branch::Inconclusive,
                corollary: CorollaryStatus::Inconclusive,
                obstruction_order: None,
                notes: vec![format!("decide failed: {e}")],
            },
        };
        let key = serde_json::to_value(row.branch)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_else(|| format!("{:?}", row.branch));
        *counts.entry(key).or_insert(0) += 1;
        rows.push(row);
    }
    SweepTable {
        rows,
        branch_counts: counts,
    }
}

impl SweepTable {
    /// CSV summary (label, tau, branch, corollary, obstruction order).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,tau,branch,corollary,obstruction_order\n");
        for r in &self.rows {
            let branch = serde_json::to_value(r.branch)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            let cor = serde_json::to_value(r.corollary)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.label,
                r.tau.replace(',', ";"),
                branch,
                cor,
                r.obstruction_order.map(|o| o.to_string()).unwrap_or_default()
            ));
        }
        out
    }
}
