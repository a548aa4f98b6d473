//! Green function of the filled Julia set.
//!
//! g(xi) = lim d^{-n} log|f^n(xi)|, zero on K(f), with f*g = d g. The
//! evaluator iterates to the certified escape radius and then closes the
//! telescoping sum d^{-(k+1)} log(|f^{k+1}|/|f^k|^d) analytically: each
//! term tends to log|c_d|, and the deviation is bounded by the tail
//! weight S/|f^k| which at least halves per step.

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::PolynomialGerm;
use crate::num::Prec;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GreenEvaluation {
    /// g(xi) >= 0; exactly 0 when the orbit never escaped the budget.
    pub value: f64,
    pub escape_iterations: Option<u32>,
    pub certified_error: f64,
    /// Set when the budget ran out without escape: membership in K(f)
    /// is indeterminate, not established.
    pub indeterminate: bool,
}

/// R with |xi| >= R implying |f(xi)| >= 2|xi| (so the orbit is certified
/// escaping): R = max(1, (2 + sum_{i<d} |c_i|) / |c_d|).
pub fn escape_radius(f: &PolynomialGerm) -> Result<f64> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall { needed: 2, got: d });
    }
    let coeffs = f.coeffs_f64();
    let lead = coeffs[d - 1].norm();
    let lower: f64 = coeffs[..d - 1].iter().map(|c| c.norm()).sum();
    Ok(((2.0 + lower) / lead).max(1.0))
}

fn eval_f64(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc * z
}

const FAR: f64 = 1e60;

pub fn green(f: &PolynomialGerm, xi: Complex64, n_max: u32) -> Result<GreenEvaluation> {
    let d = f.degree();
    if d < 2 {
        return Err(Error::DegreeTooSmall { needed: 2, got: d });
    }
    let coeffs = f.coeffs_f64();
    let r = escape_radius(f)?;
    let df = d as f64;
    let lead = coeffs[d - 1].norm();
    let tail_weight: f64 = coeffs[..d - 1].iter().map(|c| c.norm()).sum::<f64>() / lead;

    let mut z = xi;
    let mut escaped_at = None;
    for n in 0..=n_max {
        if z.norm() >= r {
            escaped_at = Some(n);
            break;
        }
        z = eval_f64(&coeffs, z);
        if !z.is_finite() {
            // One application past the radius cannot overflow from
            // inside |z| < r, so this is an escape recorded late.
            escaped_at = Some(n + 1);
            z = Complex64::new(FAR, 0.0);
            break;
        }
    }
    let Some(n0) = escaped_at else {
        return Ok(GreenEvaluation {
            value: 0.0,
            escape_iterations: None,
            certified_error: f64::INFINITY,
            indeterminate: true,
        });
    };

    // g = d^{-n} ln|z_n| + sum_{k>=n} d^{-(k+1)} (ln|z_{k+1}| - d ln|z_k|)
    let mut n = n0;
    let mut scale = df.powi(-(n as i32));
    let mut g = scale * z.norm().ln();
    let mut ops = n as f64;
    while z.norm() < FAR && n < n_max + 64 {
        let next = eval_f64(&coeffs, z);
        let term = next.norm().ln() - df * z.norm().ln();
        scale /= df;
        g += scale * term;
        z = next;
        n += 1;
        ops += 1.0;
    }
    // Analytic tail: remaining terms are ln|c_d| + O(S/|z|).
    let u = tail_weight / z.norm().max(1.0);
    scale /= df;
    g += scale * lead.ln() / (1.0 - 1.0 / df);
    let tail_err = scale * 4.0 * u;
    let rounding = (ops + 8.0) * f64::EPSILON * (g.abs() + 1.0);
    Ok(GreenEvaluation {
        value: g.max(0.0),
        escape_iterations: Some(n0),
        certified_error: tail_err + rounding,
        indeterminate: false,
    })
}

/// High-precision Green value, used where points sit exponentially close
/// to K(f) and f64 cannot hold the gap. MPFR's huge exponent range means
/// no overflow cutoff is needed below exponent 2^40.
pub fn green_hp(f: &PolynomialGerm, xi: &Complex, n_max: u32, prec: Prec) -> GreenEvaluation {
    let d = f.degree() as u32;
    let df = Float::with_val(prec, d);
    let r = escape_radius(f).unwrap_or(2.0);
    let lead = crate::num::cabs(&f.coeff(f.degree()));
    let mut tail_weight = Float::with_val(prec, 0);
    for k in 1..f.degree() {
        tail_weight += crate::num::cabs(&f.coeff(k));
    }
    tail_weight /= &lead;

    let mut z = Complex::with_val(prec, xi);
    let mut escaped_at = None;
    for n in 0..=n_max {
        if crate::num::cabs(&z).to_f64() >= r {
            escaped_at = Some(n);
            break;
        }
        z = f.eval(&z);
    }
    let Some(n0) = escaped_at else {
        return GreenEvaluation {
            value: 0.0,
            escape_iterations: None,
            certified_error: f64::INFINITY,
            indeterminate: true,
        };
    };

    let far = Float::with_val(prec, Float::i_exp(1, 1 << 24));
    let mut n = n0;
    let mut scale = Float::with_val(prec, 1);
    for _ in 0..n0 {
        scale /= &df;
    }
    let zn = crate::num::cabs(&z);
    let mut g = Float::with_val(prec, zn.ln_ref()) * &scale;
    while crate::num::cabs(&z) < far && n < n_max + (1 << 25) {
        let next = f.eval(&z);
        let ln_next = Float::with_val(prec, crate::num::cabs(&next).ln_ref());
        let ln_cur = Float::with_val(prec, crate::num::cabs(&z).ln_ref());
        let term = ln_next - ln_cur * &df;
        scale /= &df;
        g += term * &scale;
        z = next;
        n += 1;
    }
    let u = (tail_weight / crate::num::cabs(&z)).to_f64();
    scale /= &df;
    let mut tail = Float::with_val(prec, lead.ln_ref());
    tail /= Float::with_val(prec, 1.0 - 1.0 / d as f64);
    g += tail * &scale;
    let tail_err = scale.to_f64() * 4.0 * u;
    GreenEvaluation {
        value: g.to_f64(),
        escape_iterations: Some(n0),
        certified_error: tail_err + 2f64.powi(-(prec as i32) + 8) * (g.to_f64().abs() + 1.0),
        indeterminate: false,
    }
}

/// Same as `green_hp` but returns the value as a Float (callers that
/// multiply by d^n need the headroom).
pub fn green_hp_float(f: &PolynomialGerm, xi: &Complex, n_max: u32, prec: Prec) -> Option<Float> {
    let d = f.degree() as u32;
    let df = Float::with_val(prec, d);
    let r = escape_radius(f).ok()?;
    let lead = crate::num::cabs(&f.coeff(f.degree()));

    let mut z = Complex::with_val(prec, xi);
    let mut escaped_at = None;
    for n in 0..=n_max {
        if crate::num::cabs(&z).to_f64() >= r {
            escaped_at = Some(n);
            break;
        }
        z = f.eval(&z);
    }
    escaped_at?;
    let n0 = escaped_at.unwrap();
    let far = Float::with_val(prec, Float::i_exp(1, 1 << 24));
    let mut scale = Float::with_val(prec, 1);
    for _ in 0..n0 {
        scale /= &df;
    }
    let mut g = Float::with_val(prec, crate::num::cabs(&z).ln_ref()) * &scale;
    let mut n = n0;
    while crate::num::cabs(&z) < far && n < n_max + (1 << 25) {
        let next = f.eval(&z);
        let ln_next = Float::with_val(prec, crate::num::cabs(&next).ln_ref());
        let ln_cur = Float::with_val(prec, crate::num::cabs(&z).ln_ref());
        let term = ln_next - ln_cur * &df;
        scale /= &df;
        g += term * &scale;
        z = next;
        n += 1;
    }
    scale /= &df;
    let mut tail = Float::with_val(prec, lead.ln_ref());
    tail /= Float::with_val(prec, 1.0 - 1.0 / d as f64);
    g += tail * &scale;
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx_f64;

    fn poly(coeffs: &[f64]) -> PolynomialGerm {
        PolynomialGerm::new(coeffs.iter().map(|&c| cplx_f64(128, c, 0.0)).collect()).unwrap()
    }

    #[test]
    fn squaring_map_green_is_log_plus() {
        // Boettcher coordinate of xi^2 is the identity: g = log^+ |xi|.
        let f = poly(&[0.0, 1.0]);
        let g = green(&f, Complex64::new(2.0, 0.0), 1000).unwrap();
        assert!(!g.indeterminate);
        assert!((g.value - 2f64.ln()).abs() < 1e-14);
        let inside = green(&f, Complex64::new(0.5, 0.0), 1000).unwrap();
        assert_eq!(inside.value, 0.0);
        assert!(inside.indeterminate);
    }

    #[test]
    fn escape_radius_doubles() {
        let f = poly(&[0.0, 1.0]);
        let r = escape_radius(&f).unwrap();
        let z = Complex64::new(r, 0.0);
        assert!((z * z).norm() >= 2.0 * z.norm());
        // tau xi + xi^2 with |tau| <= 2 certifies within R <= 4.
        let g = poly(&[1.5, 1.0]);
        let rg = escape_radius(&g).unwrap();
        assert!(rg <= 4.0);
        let w = Complex64::new(0.0, rg);
        assert!((Complex64::new(1.5, 0.0) * w + w * w).norm() >= 2.0 * w.norm());
        // cubic: any certified radius is accepted, doubling must hold.
        let c = poly(&[0.0, 0.0, 1.0]);
        let rc = escape_radius(&c).unwrap();
        let u = Complex64::from_polar(rc, 1.1);
        assert!((u * u * u).norm() >= 2.0 * u.norm());
    }

    #[test]
    fn certified_error_is_small_after_escape() {
        let g1 = green(&poly(&[0.0, 1.0]), Complex64::new(1.1, 0.3), 2000).unwrap();
        assert!(g1.certified_error < 1e-12);
        assert!(g1.value > 0.0);
    }

    #[test]
    fn linear_map_rejected() {
        let f = poly(&[2.0]);
        assert!(matches!(
            green(&f, Complex64::new(1.0, 0.0), 100),
            Err(Error::DegreeTooSmall { .. })
        ));
    }

    #[test]
    fn hp_and_f64_agree_on_escaping_point() {
        let f = poly(&[0.0, 1.0]);
        let xi = Complex::with_val(192, (1.7, 0.4));
        let hp = green_hp(&f, &xi, 4096, 192);
        let lo = green(&f, Complex64::new(1.7, 0.4), 4096).unwrap();
        assert!((hp.value - lo.value).abs() < 1e-12);
    }
}
