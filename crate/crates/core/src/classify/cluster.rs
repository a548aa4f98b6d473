//! Small-cycle witnesses near a close resonance.
//!
//! When tau is within delta = tau^q - 1 of a primitive q-th root of
//! unity tau_0, and the parabolic limit germ satisfies f_0^q(xi) =
//! xi + B xi^{q+1} + O(xi^{q+2}) with B != 0, the period-q points of f
//! cluster at the q-th roots of -delta/B. For constructed Cremer-type
//! multipliers |delta| is 2^{-millions}, so the cluster lives at a
//! scale no grid or double-precision root finder reaches; here it is
//! located from the angle structure and verified by direct evaluation
//! in MPFR, whose huge exponent range holds such points at moderate
//! mantissa size.

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::diophantine::{power_minus_one, Angle, Multiplier};
use crate::error::{Error, Result};
use crate::germ::{compose_power, PolynomialGerm};
use crate::num::{cabs, cabs_f64, Prec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterWitness {
    pub period: u32,
    /// log2 of the cluster radius |(-delta/B)^{1/q}|.
    pub log2_radius: f64,
    /// log2 of |tau^q - 1|.
    pub log2_delta: f64,
    /// Certified bound on max_l |f^q(xi_l) - xi_l| / |xi_l|.
    pub log2_rel_residual: f64,
    /// Mantissa bits of the verification pass.
    pub verified_bits: u32,
    /// log2 of | |mu| - 1 | for the cycle multiplier (indifferent to
    /// every representable tolerance).
    pub log2_multiplier_gap: f64,
}

/// Candidate near-resonant orders: denominators q of angle convergents
/// with |tau^q - 1| below the threshold.
pub fn near_resonant_orders(tau: &Multiplier, q_cap: u64, delta_cap: f64) -> Vec<u64> {
    let mut out = Vec::new();
    match tau {
        Multiplier::Circle(Angle::DyadicSum { exponents }) => {
            if let Some(&a0) = exponents.iter().min() {
                if a0 < 32 && (1u64 << a0) <= q_cap {
                    out.push(1u64 << a0);
                }
            }
        }
        Multiplier::Circle(Angle::Rational { .. }) => {}
        _ => {
            let prec = crate::diophantine::angle_precision(tau);
            let theta = tau.angle(prec);
            for (_, q) in crate::diophantine::convergents(&theta, q_cap) {
                let delta = power_minus_one(tau, q, 128);
                if cabs_f64(&delta) < delta_cap && !delta.is_zero() {
                    out.push(q);
                }
            }
        }
    }
    out
}

/// Locate and verify the period-q cluster. Returns None when the
/// parabolic limit is degenerate (B = 0 at this order) or tau is exactly
/// resonant.
pub fn near_resonant_cluster(
    f: &PolynomialGerm,
    q: u64,
    prec: Prec,
) -> Result<Option<ClusterWitness>> {
    let Multiplier::Circle(angle) = f.multiplier() else {
        return Ok(None);
    };
    let work: Prec = prec.max(320);
    let delta = power_minus_one(f.multiplier(), q, work);
    if delta.is_zero() {
        return Ok(None);
    }
    let log2_delta = log2_abs(&delta);
    if log2_delta > -20.0 {
        // Not meaningfully resonant; the generic root finder handles it.
        return Ok(None);
    }

    // Parabolic limit germ f_0 with tau_0 the exact root of unity given
    // by the angle's convergent at q.
    let p_num = nearest_numerator(angle, q, work);
    let tau0 = Multiplier::Circle(Angle::rational(p_num, q).map_err(|_| Error::Precondition("bad convergent".into()))?);
    let higher: Vec<Complex> = (2..=f.degree())
        .map(|k| Complex::with_val(work, &f.coeff(k)))
        .collect();
    let f0 = PolynomialGerm::with_multiplier(tau0, higher.clone(), work)?;
    let order = q as usize + 1;
    let g0 = compose_power(&f0.to_series(order), q as u32)?;
    // Intermediate orders vanish in the exact parabolic limit.
    for k in 2..=q as usize {
        if cabs_f64(&g0.coeff(k)) > 2f64.powi(-(work as i32) / 2) {
            return Err(Error::NonConvergence(format!(
                "parabolic normal form not clean at order {k}"
            )));
        }
    }
    let b = g0.coeff(order);
    if cabs_f64(&b) < 1e-12 {
        return Ok(None);
    }

    // Principal q-th root of -delta/B via logarithms (exponents far
    // beyond f64 range survive this route).
    let ratio = Complex::with_val(work, -delta.clone() / &b);
    let ln_ratio = Complex::with_val(work, ratio.ln_ref());
    let s = Complex::with_val(work, ln_ratio / Float::with_val(work, q)).exp();
    let log2_radius = log2_abs(&s);

    // Verify: evaluate f^q at each cluster point at working precision.
    // tau materialized at `work` bits rounds onto tau_0 whenever
    // |delta| << 2^-work; the deviation contributes |delta| |xi| to the
    // residual, the same scale the certificate already carries.
    let f_ver = PolynomialGerm::with_multiplier(f.multiplier().clone(), higher, work)?;
    // With |delta| resolvable at working precision the leading-order
    // points polish to full accuracy. Deep clusters (|delta| below the
    // mantissa) must not be polished: tau rounds onto tau_0 and Newton
    // against the exactly parabolic map would drag the points into 0.
    let polish = log2_delta > -((work as f64) / 2.0);
    let two_pi = crate::num::two_pi(work);
    let mut worst_rel = f64::NEG_INFINITY;
    let mut mu = Complex::with_val(work, (1.0, 0.0));
    for l in 0..q {
        let arg = Float::with_val(work, l) / Float::with_val(work, q) * &two_pi;
        let (sin, cos) = arg.sin_cos(Float::new(work));
        let mut xi = Complex::with_val(work, &s * &Complex::with_val(work, (cos, sin)));
        if polish {
            for _ in 0..64 {
                let mut w = xi.clone();
                let mut dw = Complex::with_val(work, (1.0, 0.0));
                for _ in 0..q {
                    dw *= f_ver.eval_derivative(&w);
                    w = f_ver.eval(&w);
                }
                let p = Complex::with_val(work, &w - &xi);
                let dp = dw - Complex::with_val(work, (1.0, 0.0));
                if dp.is_zero() {
                    break;
                }
                let step = p / dp;
                let done = log2_abs(&step) < log2_abs(&xi) - (work as f64) + 24.0;
                xi -= step;
                if done {
                    break;
                }
            }
        }
        let mut w = xi.clone();
        for _ in 0..q {
            mu *= f_ver.eval_derivative(&w);
            w = f_ver.eval(&w);
        }
        let resid = Complex::with_val(work, &w - &xi);
        let rel = log2_abs(&resid) - log2_abs(&xi);
        // Rounding floor of the verification pass.
        let floor = -(work as f64) + 16.0 + (q as f64).log2();
        worst_rel = worst_rel.max(rel.max(floor));
    }
    if worst_rel > -64.0 {
        return Err(Error::NonConvergence(format!(
            "cluster verification too loose: 2^{worst_rel:.1}"
        )));
    }
    let mu_gap = {
        let m = cabs(&mu);
        let gap = Float::with_val(work, m - Float::with_val(work, 1));
        let a = gap.abs();
        if a.is_zero() {
            f64::NEG_INFINITY
        } else {
            Float::with_val(64, a.log2_ref()).to_f64()
        }
    };

    Ok(Some(ClusterWitness {
        period: q as u32,
        log2_radius,
        log2_delta,
        log2_rel_residual: worst_rel,
        verified_bits: work,
        log2_multiplier_gap: mu_gap,
    }))
}

fn log2_abs(z: &Complex) -> f64 {
    let a = cabs(z);
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    let prec = a.prec();
    Float::with_val(prec.max(64), a.log2_ref()).to_f64()
}

/// Numerator p of the convergent p/q nearest the angle.
fn nearest_numerator(angle: &Angle, q: u64, prec: Prec) -> i64 {
    let theta = angle.to_float(prec);
    let qt = theta * Float::with_val(prec, q);
    qt.round().to_f64() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::cremer_angle;

    #[test]
    fn moderate_near_resonance_cluster_is_found_and_verified() {
        // theta = 1/4 + 2^-40: delta ~ 2^-35, cluster at ~ 2^-11.
        let tau = Multiplier::Circle(Angle::DyadicSum {
            exponents: vec![2, 40],
        });
        let f = PolynomialGerm::quadratic_family(tau, 256).unwrap();
        let w = near_resonant_cluster(&f, 4, 256).unwrap().unwrap();
        assert_eq!(w.period, 4);
        assert!(w.log2_rel_residual < -64.0);
        assert!(w.log2_radius < -5.0 && w.log2_radius > -20.0);
    }

    #[test]
    fn cremer_multiplier_cluster_is_deep() {
        let c = cremer_angle(2, 3, 2.0, 1 << 26).unwrap();
        let f = PolynomialGerm::quadratic_family(c.multiplier.clone(), 256).unwrap();
        let w = near_resonant_cluster(&f, 4, 256).unwrap().unwrap();
        // Radius is about 2^(-T/4) with T the tail exponent: far below
        // any representable f64, inside every punctured disk.
        assert!(w.log2_radius < -100_000.0);
        assert!(w.log2_rel_residual < -64.0);
    }

    #[test]
    fn exact_resonance_yields_no_cluster() {
        let tau = Multiplier::Circle(Angle::rational(1, 4).unwrap());
        let f = PolynomialGerm::quadratic_family(tau, 128).unwrap();
        assert!(near_resonant_cluster(&f, 4, 128).unwrap().is_none());
    }
}
