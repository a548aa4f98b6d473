//! Backward orbits accumulating on a repelling cycle.
//!
//! Block points eta_{j m} come from inverting the Koenigs coordinate at
//! tau_eta^{-j} phi(xi_0), polished by Newton on the local branch of
//! f^m; intermediate indices are forward images, eta_{m j - n} =
//! f^n(eta_{m j}). Points crowd exponentially close to the cycle, so
//! everything runs at extended precision (about n_steps + guard bits for
//! the Green decay diagnostic to survive).

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::germ::{invert, PolynomialGerm};
use crate::num::{cabs, cabs_f64, to_c64, ComplexDec, Prec};

use super::cycles::{CycleRecord, StabilityClass};
use super::green::{green, green_hp_float};
use super::koenigs::{cycle_return_series, koenigs_of_series, polish_periodic_point};

#[derive(Clone, Debug)]
pub struct BackwardOrbit {
    pub seed: Complex64,
    /// eta_0 = xi_0, eta_1, ..., high precision.
    pub points: Vec<Complex>,
    pub target_cycle: CycleRecord,
    /// max over n of |f(eta_{n+1}) - eta_n|.
    pub max_step_residual: f64,
    /// g(eta_n) * d^n per index (constant along the orbit up to the
    /// Green evaluation error).
    pub green_decay: Vec<f64>,
    /// Distance from eta_n to the cycle point set.
    pub cycle_distance: Vec<f64>,
    /// First index past which the cycle distance is non-increasing.
    pub monotone_from: usize,
    /// Koenigs injectivity radius used for seed admission.
    pub admissible_radius: f64,
}

impl Serialize for BackwardOrbit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BackwardOrbit", 8)?;
        st.serialize_field("seed", &(self.seed.re, self.seed.im))?;
        let pts: Vec<ComplexDec> = self.points.iter().map(ComplexDec::of).collect();
        st.serialize_field("points", &pts)?;
        st.serialize_field("target_cycle", &self.target_cycle)?;
        st.serialize_field("max_step_residual", &self.max_step_residual)?;
        st.serialize_field("green_decay", &self.green_decay)?;
        st.serialize_field("cycle_distance", &self.cycle_distance)?;
        st.serialize_field("monotone_from", &self.monotone_from)?;
        st.serialize_field("admissible_radius", &self.admissible_radius)?;
        st.end()
    }
}

impl BackwardOrbit {
    pub fn points_f64(&self) -> Vec<Complex64> {
        self.points.iter().map(to_c64).collect()
    }
}

/// Critical points of f^m: the union of pullbacks f^{-j}(crit f),
/// j = 0..m-1, each level solved by Newton from many starts (degrees
/// here are tiny).
fn critical_points_of_iterate(f: &PolynomialGerm, m: u32) -> Vec<Complex64> {
    let coeffs = f.coeffs_f64();
    let d = f.degree();
    // crit(f): roots of f' (degree d-1) by the companion-free route:
    // Newton from a ring of starts, deduped.
    let dcoeffs: Vec<Complex64> = (1..=d)
        .map(|k| coeffs[k - 1] * (k as f64))
        .collect();
    let mut crit = small_poly_roots(&dcoeffs);
    let mut all = crit.clone();
    for _ in 1..m {
        let mut next_level = Vec::new();
        for target in &crit {
            // f(w) = target: roots of f(w) - target, degree d
            let mut shifted = vec![-target];
            shifted.extend(coeffs.iter().copied());
            next_level.extend(small_poly_roots_with_constant(&shifted));
        }
        crit = next_level;
        all.extend(crit.iter().copied());
    }
    all
}

/// Roots of a polynomial given by coefficients of z^1.. (derivative
/// layout: value at z is sum c_k z^{k-1}).
fn small_poly_roots(coeffs_high: &[Complex64]) -> Vec<Complex64> {
    // p(z) = sum_{k>=1} c_k z^{k-1}
    let mut c = vec![Complex64::new(0.0, 0.0); coeffs_high.len()];
    c.copy_from_slice(coeffs_high);
    small_poly_roots_with_constant(&c)
}

/// Roots of p(z) = sum_j c_j z^j (constant-first layout), by
/// Durand-Kerner; meant for small degrees (critical points, fixed
/// points, affine shifts).
pub fn small_poly_roots_with_constant(c: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = c.to_vec();
    while coeffs.len() > 1 && coeffs.last().map(|x| x.norm() < 1e-300).unwrap_or(false) {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|x| (x / lead).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(radius * 0.8, 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / n as f64))
        .collect();
    let eval = |zz: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ck in coeffs.iter().rev() {
            acc = acc * zz + ck;
        }
        acc
    };
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = lead;
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    z
}

#[allow(clippy::too_many_arguments)]
pub fn backward_orbit(
    f: &PolynomialGerm,
    cycle: &CycleRecord,
    xi0: Complex64,
    n_steps: u32,
    series_order: usize,
    green_budget: u32,
    base_prec: Prec,
    multiplier_band: f64,
) -> Result<BackwardOrbit> {
    if cycle.class != StabilityClass::Repelling {
        return Err(Error::NotRepelling);
    }
    let m = cycle.period;

    // Koenigs injectivity radius: distance from eta to the nearest
    // critical point of f^m, halved.
    let crit = critical_points_of_iterate(f, m);
    let eta_f64 = cycle.points[0];
    let admissible_radius = crit
        .iter()
        .map(|c| (c - eta_f64).norm())
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    if (xi0 - eta_f64).norm() >= admissible_radius {
        return Err(Error::SeedRejected { admissible_radius });
    }
    // Seed must be escaping.
    let g0 = green(f, xi0, green_budget)?;
    if g0.indeterminate || g0.value <= 0.0 {
        return Err(Error::SeedRejected { admissible_radius });
    }

    let prec = base_prec.max(n_steps + 96);
    let eta0 = polish_periodic_point(
        f,
        &Complex::with_val(prec, (eta_f64.re, eta_f64.im)),
        m,
        prec,
    )?;
    let g_series = cycle_return_series(f, &eta0, m, series_order, prec)?;
    let mu = g_series.multiplier();
    if (cabs_f64(&mu) - 1.0).abs() <= multiplier_band {
        return Err(Error::NotHyperbolic);
    }
    let phi = koenigs_of_series(&g_series, series_order)?;
    let phi_inv = invert(&phi, series_order)?;

    let xi0_hp = Complex::with_val(prec, (xi0.re, xi0.im));
    let zeta0 = Complex::with_val(prec, &xi0_hp - &eta0);
    let w0 = phi.eval(&zeta0);

    let blocks = (n_steps as usize).div_ceil(m as usize);
    // Backward block points: solve f^m(x) = previous from the series
    // guess, Newton-polished so errors do not accumulate.
    let mut block_pts = Vec::with_capacity(blocks + 1);
    block_pts.push(xi0_hp.clone());
    let mut mu_inv_pow = Complex::with_val(prec, (1.0, 0.0));
    let mu_inv = Complex::with_val(prec, mu.recip_ref());
    for _ in 1..=blocks {
        mu_inv_pow *= &mu_inv;
        let w = Complex::with_val(prec, &w0 * &mu_inv_pow);
        let guess = Complex::with_val(prec, &eta0 + &phi_inv.eval(&w));
        let prev = block_pts.last().unwrap().clone();
        let refined = newton_branch(f, m, &guess, &prev, prec)?;
        block_pts.push(refined);
    }

    // Fill: eta_{mj - n} = f^n(eta_{mj}).
    let total = n_steps as usize;
    let mut points: Vec<Complex> = vec![Complex::with_val(prec, 0); total + 1];
    points[0] = block_pts[0].clone();
    for (j, base) in block_pts.iter().enumerate().skip(1) {
        let mut w = base.clone();
        for n_off in 0..m as usize {
            let idx = j * m as usize - n_off;
            if n_off > 0 {
                w = f.eval(&w);
            }
            if idx <= total {
                points[idx] = w.clone();
            }
        }
    }

    // Diagnostics.
    let mut max_step_residual = 0.0f64;
    for n in 0..total {
        let fwd = f.eval(&points[n + 1]);
        let resid = cabs_f64(&Complex::with_val(prec, &fwd - &points[n]));
        max_step_residual = max_step_residual.max(resid);
    }
    let cycle_pts_hp: Vec<Complex> = {
        let mut v = vec![eta0.clone()];
        for _ in 1..m {
            let last = v.last().unwrap();
            v.push(f.eval(last));
        }
        v
    };
    let cycle_distance: Vec<f64> = points
        .iter()
        .map(|p| {
            cycle_pts_hp
                .iter()
                .map(|c| cabs_f64(&Complex::with_val(prec, p - c)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut monotone_from = 0;
    for n in (1..cycle_distance.len()).rev() {
        if cycle_distance[n] > cycle_distance[n - 1] {
            monotone_from = n;
            break;
        }
    }

    let d = Float::with_val(prec, f.degree() as f64);
    let mut green_decay = Vec::with_capacity(total + 1);
    let mut dn = Float::with_val(prec, 1);
    for p in points.iter() {
        let g = green_hp_float(f, p, green_budget, prec);
        match g {
            Some(val) => green_decay.push((val * &dn).to_f64()),
            None => green_decay.push(f64::NAN),
        }
        dn *= &d;
    }

    Ok(BackwardOrbit {
        seed: xi0,
        points,
        target_cycle: cycle.clone(),
        max_step_residual,
        green_decay,
        cycle_distance,
        monotone_from,
        admissible_radius,
    })
}

/// Newton on f^m(x) = target from a series-quality initial guess (the
/// local inverse branch of f^m near the cycle).
fn newton_branch(
    f: &PolynomialGerm,
    m: u32,
    guess: &Complex,
    target: &Complex,
    prec: Prec,
) -> Result<Complex> {
    let mut x = guess.clone();
    for _ in 0..prec / 4 + 20 {
        let mut w = x.clone();
        let mut dw = Complex::with_val(prec, (1.0, 0.0));
        for _ in 0..m {
            dw *= f.eval_derivative(&w);
            w = f.eval(&w);
        }
        let p = Complex::with_val(prec, &w - target);
        if cabs(&dw).is_zero() {
            return Err(Error::NonConvergence("critical point in Newton branch".into()));
        }
        let step = p / dw;
        let done = cabs_f64(&step) < 2f64.powi(-(prec as i32) + 12) * (1.0 + cabs_f64(&x));
        x -= step;
        if done {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Closed-form check point for the squaring map: eta_n = xi_0^{2^-n}.
pub fn principal_root_orbit(xi0: f64, n: u32, prec: Prec) -> Vec<Complex> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let ln = Float::with_val(prec, xi0).ln();
    let mut scale = Float::with_val(prec, 1);
    for _ in 0..=n {
        let v = Float::with_val(prec, &ln * &scale).exp();
        out.push(Complex::with_val(prec, (v, Float::with_val(prec, 0))));
        scale /= 2u32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx_f64;

    const P: Prec = 256;

    fn sq() -> PolynomialGerm {
        PolynomialGerm::new(vec![cplx_f64(P, 0.0, 0.0), cplx_f64(P, 1.0, 0.0)]).unwrap()
    }

    fn unit_cycle() -> CycleRecord {
        CycleRecord {
            points: vec![Complex64::new(1.0, 0.0)],
            period: 1,
            multiplier: Complex64::new(2.0, 0.0),
            class: StabilityClass::Repelling,
            residual: 0.0,
            partial: false,
        }
    }

    #[test]
    fn squaring_backward_orbit_matches_principal_roots() {
        let f = sq();
        let orbit = backward_orbit(&f, &unit_cycle(), Complex64::new(1.2, 0.0), 24, 16, 4096, P, 1e-10)
            .unwrap();
        let oracle = principal_root_orbit(1.2, 24, P);
        for (n, (got, want)) in orbit.points.iter().zip(oracle.iter()).enumerate() {
            let d = cabs_f64(&Complex::with_val(P, got - want));
            assert!(d < 1e-40, "index {n}: off by {d:e}");
        }
        assert!(orbit.max_step_residual < 1e-50);
        // g(eta_n) 2^n = g(eta_0) = ln 1.2
        for v in &orbit.green_decay {
            assert!((v - 1.2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn non_escaping_seed_rejected() {
        let f = sq();
        match backward_orbit(&f, &unit_cycle(), Complex64::new(0.8, 0.0), 10, 16, 2048, P, 1e-10) {
            Err(Error::SeedRejected { admissible_radius }) => {
                assert!(admissible_radius > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_repelling_cycle_rejected() {
        let f = sq();
        let mut c = unit_cycle();
        c.class = StabilityClass::Attracting;
        assert!(matches!(
            backward_orbit(&f, &c, Complex64::new(1.2, 0.0), 4, 8, 512, P, 1e-10),
            Err(Error::NotRepelling)
        ));
    }
}
