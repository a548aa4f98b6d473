//! Koenigs linearization at a hyperbolic cycle.
//!
//! For g = f^m at a cycle point eta with multiplier |mu| != 1, builds
//! the truncated series phi with phi(g(eta + zeta)) = mu phi(zeta),
//! phi'(0) = 1, by the order-by-order recursion; the divisors mu^n - mu
//! never vanish off the unit circle.

use rug::Complex;

use crate::error::{Error, Result};
use crate::germ::{compose, PolynomialGerm, TruncatedSeries};
use crate::num::{cabs, cabs_f64, cplx_zero, cpow, Prec};

use super::cycles::CycleRecord;

/// Newton-polish a period-m point to working precision.
pub fn polish_periodic_point(
    f: &PolynomialGerm,
    start: &Complex,
    m: u32,
    prec: Prec,
) -> Result<Complex> {
    let mut z = Complex::with_val(prec, start);
    for _ in 0..prec / 8 + 16 {
        // p = f^m(z) - z, dp = (f^m)'(z) - 1
        let mut w = z.clone();
        let mut dw = Complex::with_val(prec, (1.0, 0.0));
        for _ in 0..m {
            dw *= f.eval_derivative(&w);
            w = f.eval(&w);
        }
        let p = Complex::with_val(prec, &w - &z);
        let dp = dw - Complex::with_val(prec, (1.0, 0.0));
        if cabs(&dp).is_zero() {
            return Err(Error::NonConvergence(
                "degenerate Newton step at periodic point".into(),
            ));
        }
        let step = p / dp;
        let small = cabs_f64(&step) < 2f64.powi(-(prec as i32) + 8) * (1.0 + cabs_f64(&z));
        z -= step;
        if small {
            return Ok(z);
        }
    }
    Ok(z)
}

/// The local return map f^m around the orbit of eta as a truncated
/// series in zeta = xi - eta: composes the per-point shifted maps
/// g_i(zeta) = f(eta_i + zeta) - eta_{i+1}, with the orbit regenerated
/// by exact forward evaluation from the polished base point.
pub fn cycle_return_series(
    f: &PolynomialGerm,
    eta0: &Complex,
    m: u32,
    order: usize,
    prec: Prec,
) -> Result<TruncatedSeries> {
    let mut orbit = vec![Complex::with_val(prec, eta0)];
    for _ in 1..m {
        let last = orbit.last().unwrap();
        orbit.push(f.eval(last));
    }
    let mut total: Option<TruncatedSeries> = None;
    for i in 0..m as usize {
        let target = if i + 1 < m as usize {
            orbit[i + 1].clone()
        } else {
            orbit[0].clone()
        };
        let shifted = shift_series(f, &orbit[i], &target, order, prec)?;
        total = Some(match total {
            None => shifted,
            Some(acc) => compose(&shifted, &acc, order)?,
        });
    }
    Ok(total.unwrap())
}

/// f(eta + zeta) - target as a series in zeta. The constant term
/// f(eta) - target must vanish to rounding (the orbit is exact by
/// construction); it is checked and dropped.
fn shift_series(
    f: &PolynomialGerm,
    eta: &Complex,
    target: &Complex,
    order: usize,
    prec: Prec,
) -> Result<TruncatedSeries> {
    let d = f.degree();
    // binomial expansion: coeff of zeta^j is sum_k c_k C(k,j) eta^{k-j}
    let mut out = vec![cplx_zero(prec); order + 1];
    #[allow(clippy::needless_range_loop)]
    for k in 1..=d {
        let ck = f.coeff(k);
        let mut binom = Complex::with_val(prec, (1.0, 0.0));
        for j in 0..=k.min(order) {
            // binom = C(k, j)
            let mut term = Complex::with_val(prec, &ck * &binom);
            term *= cpow(eta, (k - j) as u64);
            out[j] += term;
            let next = rug::Float::with_val(prec, (k - j) as f64 / (j + 1) as f64);
            binom *= Complex::with_val(prec, (next, rug::Float::with_val(prec, 0)));
        }
    }
    out[0] -= target;
    let resid = cabs_f64(&out[0]);
    let scale = 1.0 + cabs_f64(eta);
    if resid > scale * 2f64.powi(-(prec as i32 / 2)) {
        return Err(Error::NonConvergence(format!(
            "orbit does not close: residual {resid:.3e}"
        )));
    }
    Ok(TruncatedSeries::from_coeffs(prec, out[1..].to_vec()))
}

/// Koenigs series phi of order N at the cycle's base point.
pub fn koenigs(
    f: &PolynomialGerm,
    cycle: &CycleRecord,
    order: usize,
    multiplier_band: f64,
    prec: Prec,
) -> Result<TruncatedSeries> {
    let mu_norm = cycle.multiplier.norm();
    if (mu_norm - 1.0).abs() <= multiplier_band {
        return Err(Error::NotHyperbolic);
    }
    let eta0 = polish_periodic_point(
        f,
        &Complex::with_val(prec, (cycle.points[0].re, cycle.points[0].im)),
        cycle.period,
        prec,
    )?;
    let g = cycle_return_series(f, &eta0, cycle.period, order, prec)?;
    koenigs_of_series(&g, order)
}

/// Solve phi o g = mu phi coefficient-by-coefficient, phi_1 = 1.
pub fn koenigs_of_series(g: &TruncatedSeries, order: usize) -> Result<TruncatedSeries> {
    let prec = g.prec();
    let mu = g.multiplier();
    let mut phi = vec![cplx_zero(prec); order];
    phi[0] = Complex::with_val(prec, (1.0, 0.0));

    // powers of g in raw layout for coefficient extraction
    let mut powers: Vec<TruncatedSeries> = vec![g.clone()];
    for _ in 2..=order {
        let next = compose_mul(powers.last().unwrap(), g, order);
        powers.push(next);
    }
    for n in 2..=order {
        // [zeta^n] sum_k phi_k g^k = mu phi_n
        let mut acc = cplx_zero(prec);
        for k in 1..n {
            acc += Complex::with_val(prec, &phi[k - 1] * &powers[k - 1].coeff(n));
        }
        let mu_n = cpow(&mu, n as u64);
        let divisor = Complex::with_val(prec, &mu_n - &mu);
        if divisor.is_zero() {
            return Err(Error::NotHyperbolic);
        }
        phi[n - 1] = Complex::with_val(prec, -acc / divisor);
    }
    Ok(TruncatedSeries::from_coeffs(prec, phi))
}

/// Truncated product of two zero-constant series.
fn compose_mul(a: &TruncatedSeries, b: &TruncatedSeries, order: usize) -> TruncatedSeries {
    let prec = a.prec().max(b.prec());
    let mut out = vec![cplx_zero(prec); order];
    for i in 1..=order {
        let ai = a.coeff(i);
        if ai.is_zero() {
            continue;
        }
        for j in 1..=order.saturating_sub(i) {
            let prod = Complex::with_val(prec, &ai * &b.coeff(j));
            out[i + j - 1] += prod;
        }
    }
    TruncatedSeries::from_coeffs(prec, out)
}
