//! Independent oracles for the cycle machinery: a brute-force grid
//! search with local Newton polishing, compared point-set against the
//! simultaneous root finder.

use num_complex::Complex64;

use holodyn::config::RunConfig;
use holodyn::diophantine::{Angle, Multiplier};
use holodyn::dynamics::periodic_cycles;
use holodyn::germ::PolynomialGerm;
use holodyn::num::unit_from_angle;

fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        p = p * z + c;
    }
    p * z
}

fn f_pow(coeffs: &[Complex64], m: u32, z: Complex64) -> Complex64 {
    let mut w = z;
    for _ in 0..m {
        w = eval(coeffs, w);
        if !w.is_finite() {
            return w;
        }
    }
    w
}

/// Grid over the disk, keep local minima of |f^m(z) - z|, polish each by
/// Newton, dedupe; returns the distinct periodic points of period
/// dividing m inside the disk.
fn grid_polish_oracle(
    coeffs: &[Complex64],
    m: u32,
    center: Complex64,
    radius: f64,
    steps: usize,
) -> Vec<Complex64> {
    let mut candidates = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            let z = center
                + Complex64::new(
                    (2.0 * i as f64 / (steps - 1) as f64 - 1.0) * radius,
                    (2.0 * j as f64 / (steps - 1) as f64 - 1.0) * radius,
                );
            if (z - center).norm() > radius {
                continue;
            }
            let v = f_pow(coeffs, m, z) - z;
            if v.is_finite() && v.norm() < radius * 0.5 {
                candidates.push(z);
            }
        }
    }
    // Newton polish f^m(z) - z.
    let mut roots: Vec<Complex64> = Vec::new();
    'cand: for mut z in candidates {
        for _ in 0..80 {
            let mut w = z;
            let mut dw = Complex64::new(1.0, 0.0);
            for _ in 0..m {
                let mut p = Complex64::new(0.0, 0.0);
                let mut dp = Complex64::new(0.0, 0.0);
                for (k, c) in coeffs.iter().enumerate().rev() {
                    p = p * w + c;
                    dp = dp * w + c * ((k + 1) as f64);
                }
                dw *= dp;
                w = p * w;
                if !w.is_finite() {
                    continue 'cand;
                }
            }
            let num = w - z;
            let den = dw - Complex64::new(1.0, 0.0);
            if den.norm() < 1e-14 {
                continue 'cand;
            }
            let step = num / den;
            z -= step;
            if step.norm() < 1e-14 * (1.0 + z.norm()) {
                break;
            }
        }
        let resid = (f_pow(coeffs, m, z) - z).norm();
        if resid > 1e-8 * (1.0 + z.norm()) || (z - center).norm() > radius {
            continue;
        }
        if !roots.iter().any(|r| (r - z).norm() < 1e-6) {
            roots.push(z);
        }
    }
    roots
}

#[test]
fn aberth_matches_grid_oracle_for_siegel_like_family() {
    // tau = e^{2 pi i 0.618...}: cycles compared against the grid+polish
    // oracle in the punctured disk 0 < |xi| < 0.3 (which is empty of
    // small cycles for this golden-like angle) and in |xi| < 1.0, where
    // genuine cycles live.
    let cfg = RunConfig::default();
    let prec = 128;
    let theta = rug::Float::with_val(prec, 0.6180339887498949);
    let tau = unit_from_angle(prec, &theta);
    let f = PolynomialGerm::with_multiplier(
        Multiplier::Numeric(tau),
        vec![rug::Complex::with_val(prec, (1.0, 0.0))],
        prec,
    )
    .unwrap();
    let coeffs = f.coeffs_f64();

    for (radius, m_max) in [(0.3f64, 6u32), (1.0, 4)] {
        let found = periodic_cycles(
            &f,
            m_max,
            Complex64::new(0.0, 0.0),
            radius,
            cfg.cycle_degree_cap,
            cfg.tolerances.root,
            cfg.tolerances.multiplier_band,
            cfg.seed,
        )
        .unwrap();
        // Flatten the found cycles into period-marked points, excluding
        // the fixed point at the origin when testing the puncture.
        for m in 1..=m_max {
            let oracle = grid_polish_oracle(&coeffs, m, Complex64::new(0.0, 0.0), radius, 161);
            // points of exact period m from the finder
            let mine: Vec<Complex64> = found
                .iter()
                .filter(|c| c.period == m)
                .flat_map(|c| c.points.iter().copied())
                .collect();
            // every found point is in the oracle set
            for p in &mine {
                assert!(
                    oracle.iter().any(|o| (o - p).norm() < 1e-6),
                    "finder point {p} missing from oracle (m = {m}, radius {radius})"
                );
            }
            // every oracle root of exact period m (and full orbit inside
            // the disk) appears among the finder's points
            for o in &oracle {
                let exact = (1..m).filter(|k| m % k == 0).all(|k| {
                    (f_pow(&coeffs, k, *o) - o).norm() > 1e-6
                });
                if !exact {
                    continue;
                }
                let orbit_inside = (0..m).all(|k| f_pow(&coeffs, k, *o).norm() < radius);
                if !orbit_inside {
                    continue;
                }
                assert!(
                    mine.iter().any(|p| (o - p).norm() < 1e-6),
                    "oracle point {o} missing from finder (m = {m}, radius {radius})"
                );
            }
        }
    }
}

#[test]
fn punctured_small_disk_is_empty_for_golden_angle() {
    // Golden-type multipliers have no small cycles: the punctured disk
    // 0 < |xi| < 0.3 contains none up to period 6.
    let cfg = RunConfig::default();
    let tau = Multiplier::Circle(Angle::golden(256));
    let f = PolynomialGerm::quadratic_family(tau, 128).unwrap();
    let found = periodic_cycles(
        &f,
        6,
        Complex64::new(0.0, 0.0),
        0.3,
        cfg.cycle_degree_cap,
        cfg.tolerances.root,
        cfg.tolerances.multiplier_band,
        cfg.seed,
    )
    .unwrap();
    let nonzero: Vec<_> = found
        .iter()
        .filter(|c| c.points.iter().all(|p| p.norm() > 1e-9))
        .collect();
    assert!(
        nonzero.is_empty(),
        "unexpected small cycles: {:?}",
        nonzero
    );
}
