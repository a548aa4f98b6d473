//! Periodic cycles of a polynomial: simultaneous root finding on
//! f^m(xi) - xi, exact-period grouping, multipliers, stability classes.
//!
//! The Aberth-Ehrlich iteration works coefficient-free: p and p' are
//! evaluated by iterating f, so f^m never has to be expanded (its
//! coefficients overflow f64 long before the degree cap). Explicit
//! coefficients are only formed for the small-degree eigenvalue
//! fallback.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::PolynomialGerm;

use super::green::escape_radius;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Repelling,
    Attracting,
    /// |multiplier| within the numeric band around 1; exact circle
    /// membership is undecidable in floats.
    Indifferent,
}

pub fn classify_multiplier(mu: Complex64, band: f64) -> StabilityClass {
    let m = mu.norm();
    if m > 1.0 + band {
        StabilityClass::Repelling
    } else if m < 1.0 - band {
        StabilityClass::Attracting
    } else {
        StabilityClass::Indifferent
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleRecord {
    pub points: Vec<Complex64>,
    pub period: u32,
    pub multiplier: Complex64,
    pub class: StabilityClass,
    /// max_i |f(eta_i) - eta_{i+1}|.
    pub residual: f64,
    /// Set when the root finder flagged unresolved roots at this period.
    pub partial: bool,
}

impl CycleRecord {
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn contained_in(&self, center: Complex64, radius: f64) -> bool {
        self.points.iter().all(|p| (p - center).norm() < radius)
    }
}

/// f^m(z) and d/dz f^m(z) by iteration; None when the orbit leaves the
/// working range (such z are far from every root of f^m - z).
fn eval_iter(coeffs: &[Complex64], m: u32, z: Complex64) -> Option<(Complex64, Complex64)> {
    let mut w = z;
    let mut dw = Complex64::new(1.0, 0.0);
    for _ in 0..m {
        let (fw, dfw) = horner_both(coeffs, w);
        dw *= dfw;
        w = fw;
        if !w.is_finite() || w.norm() > 1e18 {
            return None;
        }
    }
    Some((w - z, dw - Complex64::new(1.0, 0.0)))
}

fn horner_both(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate().rev() {
        p = p * z + c;
        dp = dp * z + c * ((k + 1) as f64);
    }
    (p * z, dp)
}

pub(crate) fn eval_f(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut p = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        p = p * z + c;
    }
    p * z
}

fn f_pow(coeffs: &[Complex64], m: u32, z: Complex64) -> Complex64 {
    let mut w = z;
    for _ in 0..m {
        w = eval_f(coeffs, w);
        if !w.is_finite() {
            return w;
        }
    }
    w
}

/// All roots of f^m(z) - z by Aberth-Ehrlich simultaneous iteration with
/// seeded perturbation restarts.
fn aberth_roots(
    f: &PolynomialGerm,
    m: u32,
    seed: u64,
    tol: f64,
) -> std::result::Result<Vec<Complex64>, Vec<Complex64>> {
    let coeffs = f.coeffs_f64();
    let deg_u64 = (f.degree() as u64).pow(m);
    let deg = deg_u64 as usize;
    let r = escape_radius(f).unwrap_or(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64) << 32);

    for restart in 0..4 {
        let mut z: Vec<Complex64> = (0..deg)
            .map(|i| {
                let angle = 2.0 * std::f64::consts::PI * (i as f64 + 0.37) / deg as f64
                    + rng.gen_range(-0.02..0.02) * (restart + 1) as f64;
                let radius = r * 0.7 * (0.4 + 0.6 * rng.gen::<f64>());
                Complex64::from_polar(radius, angle)
            })
            .collect();
        let mut converged = false;
        for _sweep in 0..220 {
            let mut max_step = 0.0f64;
            for i in 0..deg {
                let Some((p, dp)) = eval_iter(&coeffs, m, z[i]) else {
                    let angle = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                    z[i] = Complex64::from_polar(r * rng.gen_range(0.2..0.9), angle);
                    max_step = f64::INFINITY;
                    continue;
                };
                if p.norm() == 0.0 {
                    continue;
                }
                let newton = if dp.norm() > 0.0 { p / dp } else { p };
                let mut repulse = Complex64::new(0.0, 0.0);
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        let diff = z[i] - zj;
                        if diff.norm() > 1e-300 {
                            repulse += diff.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * repulse;
                let step = if denom.norm() > 1e-300 {
                    newton / denom
                } else {
                    newton
                };
                z[i] -= step;
                if !z[i].is_finite() {
                    z[i] = Complex64::from_polar(
                        r * rng.gen_range(0.2..0.9),
                        rng.gen_range(0.0..2.0 * std::f64::consts::PI),
                    );
                    max_step = f64::INFINITY;
                    continue;
                }
                max_step = max_step.max(step.norm());
            }
            if max_step < tol * 1e-3 {
                converged = true;
                break;
            }
        }
        // Newton polish, then accept if every root closes.
        for zi in z.iter_mut() {
            for _ in 0..40 {
                let Some((p, dp)) = eval_iter(&coeffs, m, *zi) else {
                    break;
                };
                if dp.norm() < 1e-300 || p.norm() < 1e-306 {
                    break;
                }
                let step = p / dp;
                *zi -= step;
                if step.norm() < (1.0 + zi.norm()) * 1e-16 {
                    break;
                }
            }
        }
        let all_close = z.iter().all(|&zi| {
            eval_iter(&coeffs, m, zi)
                .map(|(p, _)| p.norm() <= tol * (1.0 + zi.norm()))
                .unwrap_or(false)
        });
        if all_close {
            return Ok(z);
        }
        if converged && restart == 3 {
            return Err(z);
        }
    }
    Err(Vec::new())
}

/// Eigenvalue fallback for degree <= 64: expand f^m - z, realify the
/// companion matrix (eigenvalues of [[A,-B],[B,A]] are those of A+iB and
/// their conjugates) and keep the candidates that actually satisfy the
/// polynomial.
fn eigenvalue_roots(f: &PolynomialGerm, m: u32, tol: f64) -> Option<Vec<Complex64>> {
    let coeffs = f.coeffs_f64();
    let deg = (f.degree() as u64).pow(m);
    if !(1..=64).contains(&deg) {
        return None;
    }
    // Expand f^m as coefficients 0..=deg (constant first).
    let mut p: Vec<Complex64> = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for _ in 0..m {
        // compose f with p: result = sum_k c_k p^k
        let mut acc = vec![Complex64::new(0.0, 0.0)];
        for ck in coeffs.iter().rev() {
            acc = poly_mul(&acc, &p);
            if acc.is_empty() {
                acc = vec![Complex64::new(0.0, 0.0)];
            }
            acc[0] += ck;
        }
        acc = poly_mul(&acc, &p);
        p = acc;
    }
    // p(z) - z
    if p.len() < 2 {
        p.resize(2, Complex64::new(0.0, 0.0));
    }
    p[1] -= Complex64::new(1.0, 0.0);
    while p.len() > 1 && p.last().map(|c| c.norm() < 1e-300).unwrap_or(false) {
        p.pop();
    }
    let n = p.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let lead = p[n];
    let mut comp = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let val = if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else if j == n - 1 {
                -p[i] / lead
            } else {
                Complex64::new(0.0, 0.0)
            };
            comp[(i, j)] = val.re;
            comp[(i, j + n)] = -val.im;
            comp[(i + n, j)] = val.im;
            comp[(i + n, j + n)] = val.re;
        }
    }
    let eig = comp.complex_eigenvalues();
    let coeffs_f = f.coeffs_f64();
    let mut out: Vec<Complex64> = Vec::new();
    for e in eig.iter() {
        let z = Complex64::new(e.re, e.im);
        if let Some((pv, dp)) = eval_iter(&coeffs_f, m, z) {
            // one polish step then residual filter
            let z2 = if dp.norm() > 1e-300 { z - pv / dp } else { z };
            if let Some((pv2, _)) = eval_iter(&coeffs_f, m, z2) {
                if pv2.norm() <= tol * (1.0 + z2.norm()) {
                    out.push(z2);
                }
            }
        }
    }
    // The realification doubles the spectrum; dedupe to deg roots.
    let mut dedup: Vec<Complex64> = Vec::new();
    for z in out {
        if !dedup.iter().any(|w| (w - z).norm() < tol.sqrt() * 1e-2) {
            dedup.push(z);
        }
    }
    Some(dedup)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Find all cycles of exact period m <= m_max whose points lie in the
/// given disk, deduplicating divisor-period roots and computing the
/// multiplier as the product of f' along the orbit.
#[allow(clippy::too_many_arguments)]
pub fn periodic_cycles(
    f: &PolynomialGerm,
    m_max: u32,
    center: Complex64,
    radius: f64,
    degree_cap: u64,
    root_tol: f64,
    multiplier_band: f64,
    seed: u64,
) -> Result<Vec<CycleRecord>> {
    if f.degree() < 2 {
        return Err(Error::DegreeTooSmall {
            needed: 2,
            got: f.degree(),
        });
    }
    let d = f.degree() as u64;
    let required = d
        .checked_pow(m_max)
        .ok_or(Error::CapExceeded {
            required: u64::MAX,
            cap: degree_cap,
        })?;
    if required > degree_cap {
        return Err(Error::CapExceeded {
            required,
            cap: degree_cap,
        });
    }

    let coeffs = f.coeffs_f64();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    for m in 1..=m_max {
        let (roots, partial) = match aberth_roots(f, m, seed, root_tol) {
            Ok(r) => (r, false),
            Err(fallback) => match eigenvalue_roots(f, m, root_tol) {
                Some(r) if !r.is_empty() => (r, false),
                _ => (fallback, true),
            },
        };
        let mut visited = vec![false; roots.len()];
        for i in 0..roots.len() {
            if visited[i] {
                continue;
            }
            let eta = roots[i];
            if eval_iter(&coeffs, m, eta)
                .map(|(p, _)| p.norm() > root_tol * (1.0 + eta.norm()))
                .unwrap_or(true)
            {
                visited[i] = true;
                continue;
            }
            // Exact period: no proper divisor period may close.
            let exact = (1..m).filter(|k| m % k == 0).all(|k| {
                let w = f_pow(&coeffs, k, eta);
                let cond = 1.0 + eta.norm();
                !w.is_finite() || (w - eta).norm() > root_tol * cond * 10.0
            });
            visited[i] = true;
            if !exact {
                continue;
            }
            // Walk the orbit, matching iterates to the root list.
            let mut points = vec![eta];
            let mut w = eta;
            let mut residual = 0.0f64;
            let mut ok = true;
            for _ in 1..m {
                w = eval_f(&coeffs, w);
                let Some((j, _)) = roots
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| !visited[*j])
                    .map(|(j, rj)| (j, (rj - w).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                else {
                    ok = false;
                    break;
                };
                let dist = (roots[j] - w).norm();
                if dist > (1.0 + w.norm()) * root_tol.sqrt() {
                    // orbit left the resolved root set
                    ok = false;
                    break;
                }
                residual = residual.max(dist);
                visited[j] = true;
                points.push(roots[j]);
                w = roots[j];
            }
            if !ok {
                continue;
            }
            let close = (eval_f(&coeffs, *points.last().unwrap()) - eta).norm();
            residual = residual.max(close);
            if residual > root_tol * (1.0 + eta.norm()) * 100.0 {
                continue;
            }
            let mut mu = Complex64::new(1.0, 0.0);
            for p in &points {
                let (_, dfp) = horner_both(&coeffs, *p);
                mu *= dfp;
            }
            let record = CycleRecord {
                class: classify_multiplier(mu, multiplier_band),
                multiplier: mu,
                period: m,
                residual,
                partial,
                points,
            };
            if record.contained_in(center, radius) {
                cycles.push(record);
            }
        }
    }
    Ok(cycles)
}

/// Iteration with an escape sentinel instead of raw infinities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IterateOutcome {
    Finite(Complex64),
    Escaped { at_step: u32 },
}

pub fn iterate(f: &PolynomialGerm, xi: Complex64, n: u32) -> IterateOutcome {
    let coeffs = f.coeffs_f64();
    let mut z = xi;
    for k in 0..n {
        z = eval_f(&coeffs, z);
        if !z.is_finite() || z.norm() > 1e150 {
            return IterateOutcome::Escaped { at_step: k + 1 };
        }
    }
    IterateOutcome::Finite(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx_f64;

    fn poly(coeffs: &[f64]) -> PolynomialGerm {
        PolynomialGerm::new(coeffs.iter().map(|&c| cplx_f64(64, c, 0.0)).collect()).unwrap()
    }

    #[test]
    fn iterate_squares() {
        let f = poly(&[0.0, 1.0]);
        match iterate(&f, Complex64::new(2.0, 0.0), 3) {
            IterateOutcome::Finite(z) => assert!((z.re - 256.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            iterate(&f, Complex64::new(3.0, 0.0), 0),
            IterateOutcome::Finite(Complex64::new(3.0, 0.0))
        );
    }

    #[test]
    fn iterate_escapes_with_sentinel() {
        let f = poly(&[0.0, 1.0]);
        match iterate(&f, Complex64::new(10.0, 0.0), 500) {
            IterateOutcome::Escaped { at_step } => assert!(at_step < 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn squaring_map_cycles_match_theory() {
        // m=1: {0}, {1}. m=2: primitive cube roots, multiplier 4.
        // m=3: two 3-cycles among 7th roots of unity, multiplier 8.
        let f = poly(&[0.0, 1.0]);
        let cycles = periodic_cycles(
            &f,
            3,
            Complex64::new(0.0, 0.0),
            1e9,
            4096,
            1e-9,
            1e-10,
            7,
        )
        .unwrap();
        let fixed: Vec<_> = cycles.iter().filter(|c| c.period == 1).collect();
        assert_eq!(fixed.len(), 2);
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert_eq!(two.len(), 1);
        assert!((two[0].multiplier - Complex64::new(4.0, 0.0)).norm() < 1e-7);
        assert_eq!(two[0].class, StabilityClass::Repelling);
        let three: Vec<_> = cycles.iter().filter(|c| c.period == 3).collect();
        assert_eq!(three.len(), 2);
        for c in three {
            assert!((c.multiplier - Complex64::new(8.0, 0.0)).norm() < 1e-6);
        }
        // Root count d^m as a multiset: sum over m'|m of m' * #cycles(m').
        let count_m = |m: u32| -> usize {
            cycles
                .iter()
                .filter(|c| c.period == m)
                .map(|c| c.points.len())
                .sum()
        };
        assert_eq!(count_m(1), 2);
        assert_eq!(count_m(1) + count_m(2), 4);
        assert_eq!(count_m(1) + count_m(3), 8);
    }

    #[test]
    fn disk_filter_keeps_origin_only() {
        let f = poly(&[0.0, 1.0]);
        let cycles = periodic_cycles(
            &f,
            1,
            Complex64::new(0.0, 0.0),
            0.5,
            4096,
            1e-9,
            1e-10,
            7,
        )
        .unwrap();
        assert_eq!(cycles.len(), 1);
        assert!(cycles[0].points[0].norm() < 1e-9);
    }

    #[test]
    fn eigenvalue_fallback_agrees_with_theory() {
        // Complex coefficients exercise the realified companion matrix:
        // f = i xi + xi^2 has fixed points 0 and 1 - i.
        let f = PolynomialGerm::new(vec![cplx_f64(64, 0.0, 1.0), cplx_f64(64, 1.0, 0.0)]).unwrap();
        let mut roots = eigenvalue_roots(&f, 1, 1e-9).unwrap();
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert_eq!(roots.len(), 2);
        assert!(roots[0].norm() < 1e-8);
        assert!((roots[1] - Complex64::new(1.0, -1.0)).norm() < 1e-8);

        // Squaring map, m = 2: roots of z^4 - z.
        let sq = poly(&[0.0, 1.0]);
        let r2 = eigenvalue_roots(&sq, 2, 1e-9).unwrap();
        assert_eq!(r2.len(), 4);
        for z in &r2 {
            let q = z.powu(4) - z;
            assert!(q.norm() < 1e-7);
        }
        // Degree cap: 2^7 = 128 > 64.
        assert!(eigenvalue_roots(&sq, 7, 1e-9).is_none());
    }

    #[test]
    fn cap_refusal_names_requirement() {
        let f = poly(&[0.0, 1.0]);
        match periodic_cycles(
            &f,
            13,
            Complex64::new(0.0, 0.0),
            1.0,
            4096,
            1e-9,
            1e-10,
            7,
        ) {
            Err(Error::CapExceeded { required, cap }) => {
                assert_eq!(required, 8192);
                assert_eq!(cap, 4096);
            }
            other => panic!("{other:?}"),
        }
    }
}
