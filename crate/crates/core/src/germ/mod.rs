//! Holonomy germs and the normal-form recursion.
//!
//! `PolynomialGerm` holds the holonomy f as exact/high-precision
//! coefficients c_1..c_d with f(0) = 0 and tau = c_1 != 0. `reduce`
//! conjugates away non-resonant orders one at a time; at a resonant
//! order with a surviving coefficient it halts and reports the
//! obstruction representative tau^{-1} A.

mod series;

use rug::Complex;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::config::Tolerances;
use crate::diophantine::{power_minus_one, Multiplier};
use crate::error::{Error, Result};
use crate::num::{cabs_f64, cplx_zero, ComplexDec, Prec};

pub use series::{compose, compose_power, conjugate, invert, TruncatedSeries};

/// A polynomial fixing the origin, stored as coefficients c_1..c_d with
/// c_d != 0 (degree exact) and c_0 = 0 not stored.
///
/// Holonomy germs additionally have tau = c_1 != 0; `holonomy` enforces
/// that, while `new` admits general dynamical polynomials such as xi^2.
/// Operations that need an invertible germ check tau themselves.
#[derive(Clone, Debug)]
pub struct PolynomialGerm {
    coeffs: Vec<Complex>,
    multiplier: Multiplier,
}

impl PolynomialGerm {
    /// Build from coefficients c_1..c_d. Trailing zero coefficients are
    /// dropped so the stored degree is exact.
    pub fn new(mut coeffs: Vec<Complex>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::Precondition("germ must be a nonzero polynomial".into()));
        }
        let multiplier = Multiplier::Numeric(coeffs[0].clone());
        Ok(PolynomialGerm {
            coeffs,
            multiplier,
        })
    }

    /// Build a holonomy germ: like `new` but requires tau = c_1 != 0.
    pub fn holonomy(coeffs: Vec<Complex>) -> Result<Self> {
        let g = Self::new(coeffs)?;
        if g.tau().is_zero() {
            return Err(Error::Precondition(
                "holonomy germ needs multiplier c_1 = tau != 0".into(),
            ));
        }
        Ok(g)
    }

    /// Build with a multiplier given in exact angle form; c_1 is
    /// materialized from the angle at `prec` bits, higher coefficients
    /// are taken as given.
    pub fn with_multiplier(
        multiplier: Multiplier,
        higher: Vec<Complex>,
        prec: Prec,
    ) -> Result<Self> {
        let c1 = multiplier.to_complex(prec);
        if c1.is_zero() {
            return Err(Error::Precondition("multiplier is zero".into()));
        }
        let mut coeffs = vec![c1];
        coeffs.extend(higher);
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Ok(PolynomialGerm {
            coeffs,
            multiplier,
        })
    }

    /// The quadratic family tau xi + xi^2.
    pub fn quadratic_family(multiplier: Multiplier, prec: Prec) -> Result<Self> {
        Self::with_multiplier(
            multiplier,
            vec![Complex::with_val(prec, (1.0, 0.0))],
            prec,
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn tau(&self) -> &Complex {
        &self.coeffs[0]
    }

    pub fn multiplier(&self) -> &Multiplier {
        &self.multiplier
    }

    pub fn prec(&self) -> Prec {
        self.coeffs[0].prec().0.max(self.coeffs[0].prec().1)
    }

    /// Coefficient c_k (1-based); zero above the degree.
    pub fn coeff(&self, k: usize) -> Complex {
        assert!(k >= 1);
        self.coeffs
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| cplx_zero(self.prec()))
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> Vec<num_complex::Complex64> {
        self.coeffs.iter().map(crate::num::to_c64).collect()
    }

    pub fn eval(&self, xi: &Complex) -> Complex {
        let prec = self.prec().max(xi.prec().0.max(xi.prec().1));
        let mut acc = Complex::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= xi;
            acc += c;
        }
        acc * xi
    }

    /// f'(xi).
    pub fn eval_derivative(&self, xi: &Complex) -> Complex {
        let prec = self.prec().max(xi.prec().0.max(xi.prec().1));
        let mut acc = Complex::with_val(prec, 0);
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            acc *= xi;
            acc += Complex::with_val(prec, c * ((k + 1) as u32));
        }
        acc
    }

    /// The germ as a truncated series at order n (zero-padded past the
    /// degree, truncated below it).
    pub fn to_series(&self, n: usize) -> TruncatedSeries {
        let prec = self.prec();
        let mut coeffs: Vec<Complex> = self.coeffs.iter().take(n).cloned().collect();
        while coeffs.len() < n {
            coeffs.push(cplx_zero(prec));
        }
        TruncatedSeries::from_coeffs(prec, coeffs)
    }

    /// The same germ with coefficients embedded at a higher working
    /// precision (exact: dyadic values carry over bit-for-bit; exact
    /// angle multipliers re-materialize at the new precision).
    pub fn at_precision(&self, prec: Prec) -> Result<Self> {
        match &self.multiplier {
            Multiplier::Numeric(_) => PolynomialGerm::new(
                self.coeffs
                    .iter()
                    .map(|c| Complex::with_val(prec, c))
                    .collect(),
            ),
            mult @ Multiplier::Circle(_) => PolynomialGerm::with_multiplier(
                mult.clone(),
                self.coeffs[1..]
                    .iter()
                    .map(|c| Complex::with_val(prec, c))
                    .collect(),
                prec,
            ),
        }
    }

    /// JSON form: {"order": d, "coeffs": [[re, im], ...]}, decimal
    /// strings at full precision.
    pub fn to_series_json(&self) -> serde_json::Value {
        serde_json::json!({
            "order": self.degree(),
            "coeffs": self.coeffs.iter().map(ComplexDec::of).collect::<Vec<_>>(),
        })
    }

    /// The rescaled germ c^{-1} f(c xi): coefficient c_k picks up c^{k-1}.
    pub fn rescale(&self, c: &Complex) -> Result<Self> {
        let prec = self.prec();
        let mut pow = Complex::with_val(prec, (1.0, 0.0));
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for ck in &self.coeffs {
            coeffs.push(Complex::with_val(prec, ck * &pow));
            pow *= c;
        }
        PolynomialGerm::new(coeffs)
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub order: usize,
    /// Coefficient A at order n+1 before this step acted.
    pub coeff_before: Complex,
    /// tau^n - 1; absent at resonant orders.
    pub divisor: Option<Complex>,
    pub resonant: bool,
    /// The eliminating coefficient h_1 = tau^{-1} A / (tau^n - 1).
    pub h1: Option<Complex>,
    /// Set at resonant orders where |A| <= tol: the class u_n vanished.
    pub u_zero_recorded: bool,
}

impl StepRecord {
    pub fn small_divisor_log(&self) -> Option<f64> {
        self.divisor.as_ref().map(|d| -cabs_f64(d).ln())
    }
}

#[derive(Clone, Debug)]
pub struct Obstruction {
    pub order: usize,
    /// The representative tau^{-1} A of the class u_n.
    pub value: Complex,
}

#[derive(Clone, Debug)]
pub struct NormalFormReport {
    pub conjugator: TruncatedSeries,
    pub residual: TruncatedSeries,
    pub steps: Vec<StepRecord>,
    pub obstruction: Option<Obstruction>,
    pub tolerance: f64,
}

impl Serialize for StepRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("StepRecord", 7)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("coeff_before", &ComplexDec::of(&self.coeff_before))?;
        st.serialize_field("divisor", &self.divisor.as_ref().map(ComplexDec::of))?;
        st.serialize_field("small_divisor_log", &self.small_divisor_log())?;
        st.serialize_field("resonant", &self.resonant)?;
        st.serialize_field("h1", &self.h1.as_ref().map(ComplexDec::of))?;
        st.serialize_field("u_zero_recorded", &self.u_zero_recorded)?;
        st.end()
    }
}

impl Serialize for Obstruction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Obstruction", 2)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("value", &ComplexDec::of(&self.value))?;
        st.end()
    }
}

impl Serialize for NormalFormReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NormalFormReport", 5)?;
        st.serialize_field("conjugator", &self.conjugator)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("steps", &self.steps)?;
        st.serialize_field("obstruction", &self.obstruction)?;
        st.serialize_field("tolerance", &self.tolerance)?;
        st.end()
    }
}

/// One elimination step at order n: for f = tau xi + A xi^{n+1} + ...,
/// conjugate by h = xi + h_1 xi^{n+1} with h_1 = tau^{-1} A / (tau^n - 1)
/// so the order-(n+1) coefficient of h^{-1} o f o h vanishes.
///
/// Resonance here is the numeric band |tau^n - 1| < tol_resonance;
/// `reduce` substitutes the exact test when the germ's multiplier has an
/// exact angle form.
pub fn normal_form_step(
    f: &TruncatedSeries,
    n: usize,
    tols: &Tolerances,
) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let tau = f.multiplier();
    let mult = Multiplier::Numeric(tau.clone());
    let resonant = mult.is_resonant_at(n as u64, tols.resonance);
    step_inner(f, n, &mult, resonant, tols.elimination)
}

fn step_inner(
    f: &TruncatedSeries,
    n: usize,
    mult: &Multiplier,
    resonant: bool,
    tol: f64,
) -> Result<(TruncatedSeries, TruncatedSeries)> {
    let order = f.order();
    if n + 1 > order {
        return Err(Error::OrderMismatch {
            requested: n + 1,
            available: order,
        });
    }
    for k in 2..=n {
        if cabs_f64(&f.coeff(k)) > tol {
            return Err(Error::Precondition(format!(
                "coefficient at order {k} not yet eliminated"
            )));
        }
    }
    if resonant {
        return Err(Error::Resonant { order: n });
    }
    let prec = f.prec();
    let tau = f.multiplier();
    let a = f.coeff(n + 1);
    let divisor = power_minus_one(mult, n as u64, prec);
    if divisor.is_zero() {
        return Err(Error::Resonant { order: n });
    }
    let h1 = Complex::with_val(prec, &a / &(divisor * tau));
    let mut h = TruncatedSeries::identity(prec, order);
    if a.is_zero() {
        return Ok((h, f.clone()));
    }
    h = {
        let mut coeffs = h.coeffs().to_vec();
        coeffs[n] = h1;
        TruncatedSeries::from_coeffs(prec, coeffs)
    };
    let f_next = conjugate(f, &h, order)?;
    Ok((h, f_next))
}

/// Iterate normal-form steps for n = 1..N-1.
///
/// At a resonant order with |A| <= tol the vanished class u_n = 0 is
/// recorded and the recursion continues; with |A| > tol it halts and
/// reports the obstruction (n, tau^{-1} A). Non-resonant multipliers
/// come out formally linearized to order N, with the small divisors
/// logged per step.
pub fn reduce(
    germ: &PolynomialGerm,
    n_order: usize,
    tol: f64,
    tols: &Tolerances,
) -> Result<NormalFormReport> {
    if n_order < 2 {
        return Err(Error::Precondition("reduce needs order N >= 2".into()));
    }
    if germ.tau().is_zero() {
        return Err(Error::Precondition(
            "normal form needs an invertible germ (tau != 0)".into(),
        ));
    }
    let prec = germ.prec();
    let mult = germ.multiplier().clone();
    let tau = germ.tau().clone();
    let mut f = germ.to_series(n_order);
    let mut h_total = TruncatedSeries::identity(prec, n_order);
    let mut steps = Vec::new();
    let mut obstruction = None;

    for n in 1..n_order {
        let a = f.coeff(n + 1);
        let resonant = mult.is_resonant_at(n as u64, tols.resonance);
        if resonant {
            if cabs_f64(&a) <= tol {
                steps.push(StepRecord {
                    order: n,
                    coeff_before: a,
                    divisor: None,
                    resonant: true,
                    h1: None,
                    u_zero_recorded: true,
                });
                continue;
            }
            let value = Complex::with_val(prec, &a / &tau);
            steps.push(StepRecord {
                order: n,
                coeff_before: a.clone(),
                divisor: None,
                resonant: true,
                h1: None,
                u_zero_recorded: false,
            });
            obstruction = Some(Obstruction { order: n, value });
            break;
        }

        let divisor = power_minus_one(&mult, n as u64, prec);
        if divisor.is_zero() {
            return Err(Error::PrecisionExhausted {
                stage: format!("divisor tau^{n} - 1 underflowed"),
                needed_bits: (prec as u64) * 2,
            });
        }
        if cabs_f64(&a) <= tol {
            steps.push(StepRecord {
                order: n,
                coeff_before: a,
                divisor: Some(divisor),
                resonant: false,
                h1: None,
                u_zero_recorded: false,
            });
            continue;
        }
        let h1 = Complex::with_val(prec, &a / &(divisor.clone() * &tau));
        let mut coeffs = TruncatedSeries::identity(prec, n_order).coeffs().to_vec();
        coeffs[n] = h1.clone();
        let h_step = TruncatedSeries::from_coeffs(prec, coeffs);
        f = conjugate(&f, &h_step, n_order)?;
        h_total = compose(&h_total, &h_step, n_order)?;
        steps.push(StepRecord {
            order: n,
            coeff_before: a,
            divisor: Some(divisor),
            resonant: false,
            h1: Some(h1),
            u_zero_recorded: false,
        });
    }

    // Contract check: below the halt order every coefficient must sit
    // under the tolerance. Deep small divisors amplify rounding past
    // any fixed headroom; that is reported, not silently absorbed, and
    // the caller can rerun with a tolerance matched to the depth.
    let checked_to = obstruction
        .as_ref()
        .map(|o| o.order)
        .unwrap_or(n_order);
    let mut worst = 0.0f64;
    for k in 2..=checked_to.min(f.order()) {
        worst = worst.max(cabs_f64(&f.coeff(k)));
    }
    if worst > tol {
        let excess = (worst / tol).log2().ceil().max(1.0) as u64;
        return Err(Error::PrecisionExhausted {
            stage: format!(
                "residual coefficient {worst:.3e} above tolerance {tol:.3e} after elimination"
            ),
            needed_bits: prec as u64 + excess + 16,
        });
    }

    Ok(NormalFormReport {
        conjugator: h_total,
        residual: f,
        steps,
        obstruction,
        tolerance: tol,
    })
}

/// reduce, escalating the working precision when the residual contract
/// cannot be met at the caller's tolerance (small divisors amplify
/// rounding; the input values embed exactly at the higher precision).
pub fn reduce_with_escalation(
    germ: &PolynomialGerm,
    n_order: usize,
    tol: f64,
    tols: &Tolerances,
    max_precision: Prec,
) -> Result<NormalFormReport> {
    let mut current = germ.clone();
    loop {
        match reduce(&current, n_order, tol, tols) {
            Err(Error::PrecisionExhausted { needed_bits, stage }) => {
                let next = (needed_bits as Prec + 32).max(current.prec() * 2);
                if next > max_precision {
                    return Err(Error::PrecisionExhausted {
                        stage,
                        needed_bits,
                    });
                }
                current = current.at_precision(next)?;
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx_f64;

    const P: Prec = 128;

    fn tols() -> Tolerances {
        Tolerances::for_precision(P)
    }

    fn germ(coeffs: &[f64]) -> PolynomialGerm {
        PolynomialGerm::new(coeffs.iter().map(|&c| cplx_f64(P, c, 0.0)).collect()).unwrap()
    }

    #[test]
    fn germ_invariants_enforced() {
        assert!(PolynomialGerm::new(vec![cplx_f64(P, 0.0, 0.0)]).is_err());
        let g = PolynomialGerm::new(vec![
            cplx_f64(P, 2.0, 0.0),
            cplx_f64(P, 1.0, 0.0),
            cplx_f64(P, 0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(g.degree(), 2);
        // xi^2 is a valid dynamical polynomial but not a holonomy germ.
        let sq = vec![cplx_f64(P, 0.0, 0.0), cplx_f64(P, 1.0, 0.0)];
        assert!(PolynomialGerm::new(sq.clone()).is_ok());
        assert!(PolynomialGerm::holonomy(sq).is_err());
    }

    #[test]
    fn step_eliminates_order_two() {
        // f = 2 xi + xi^2, n = 1: h_1 = 1/2.
        let f = germ(&[2.0, 1.0]).to_series(3);
        let (h, f1) = normal_form_step(&f, 1, &tols()).unwrap();
        assert!((cabs_f64(&h.coeff(2)) - 0.5).abs() < 1e-30);
        assert!(cabs_f64(&f1.coeff(2)) < 1e-30);
    }

    #[test]
    fn step_on_linear_is_identity() {
        let f = TruncatedSeries::linear(cplx_f64(P, 0.37, 0.8), 4);
        let (h, f1) = normal_form_step(&f, 2, &tols()).unwrap();
        assert_eq!(h, TruncatedSeries::identity(P, 4));
        assert_eq!(f1, f);
    }

    #[test]
    fn step_rejects_resonance() {
        let f = germ(&[1.0, 1.0]).to_series(3);
        assert!(matches!(
            normal_form_step(&f, 1, &tols()),
            Err(Error::Resonant { order: 1 })
        ));
    }

    #[test]
    fn reduce_parabolic_example() {
        // xi/(1+xi) ~ xi - xi^2 + xi^3 - xi^4: obstruction (1, -1).
        let g = germ(&[1.0, -1.0, 1.0, -1.0]);
        let rep = reduce(&g, 4, tols().elimination, &tols()).unwrap();
        let obs = rep.obstruction.expect("parabolic germ must obstruct");
        assert_eq!(obs.order, 1);
        let diff = cabs_f64(&Complex::with_val(P, &obs.value - &cplx_f64(P, -1.0, 0.0)));
        assert!(diff < 1e-30);
    }

    #[test]
    fn reduce_koenigs_linearizes() {
        let g = germ(&[2.0, 1.0]);
        let rep = reduce(&g, 6, tols().elimination, &tols()).unwrap();
        assert!(rep.obstruction.is_none());
        assert!(rep.residual.max_tail_norm() <= tols().elimination);
        // Multiplier preserved bit-for-bit.
        assert_eq!(rep.residual.multiplier(), g.tau().clone());
        // Independent re-check through compose/invert.
        let direct = conjugate(&g.to_series(6), &rep.conjugator, 6).unwrap();
        for k in 2..=6 {
            assert!(cabs_f64(&direct.coeff(k)) <= tols().elimination * 10.0);
        }
    }

    #[test]
    fn reduce_tau_minus_one_obstructs_at_two() {
        // f = -xi + xi^2: order 1 is non-resonant ((-1)^1 != 1), the
        // eliminated series is -xi + xi^3 + O(xi^4), and the first
        // resonant order n = 2 carries A = 1, u_2 = -1.
        let g = germ(&[-1.0, 1.0]);
        let rep = reduce(&g, 4, tols().elimination, &tols()).unwrap();
        let obs = rep.obstruction.expect("tau = -1 must obstruct");
        assert_eq!(obs.order, 2);
        let diff = cabs_f64(&Complex::with_val(P, &obs.value - &cplx_f64(P, -1.0, 0.0)));
        assert!(diff < 1e-25);
        // The step-1 elimination produced the frozen oracle series.
        let step1 = &rep.steps[0];
        assert!(!step1.resonant);
        let a3 = rep.residual.coeff(3);
        assert!(cabs_f64(&Complex::with_val(P, &a3 - &cplx_f64(P, 1.0, 0.0))) < 1e-25);
    }

    #[test]
    fn reduce_skips_vanished_resonant_class() {
        // tau = -1 with no odd-order terms: u_1 (non-resonant) and the
        // resonant order 2 coefficient is zero, so reduction proceeds.
        let g = germ(&[-1.0, 0.0, 0.0, 0.0, 1.0]);
        let rep = reduce(&g, 4, tols().elimination, &tols()).unwrap();
        assert!(rep.obstruction.is_none());
        assert!(rep.steps.iter().any(|s| s.resonant && s.u_zero_recorded));
    }

    #[test]
    fn iterate_consistency_for_parabolic() {
        // Both routes to h^{-1} o f^m o h agree order by order:
        // composing the reduced residual m times, and conjugating the
        // m-th iterate of f by the same h.
        let g = germ(&[-1.0, 1.0]);
        let n = 6;
        let rep = reduce(&g, n, tols().elimination, &tols()).unwrap();
        let residual_sq = compose_power(&rep.residual, 2).unwrap();
        let f_sq = compose_power(&g.to_series(n), 2).unwrap();
        let conj = conjugate(&f_sq, &rep.conjugator, n).unwrap();
        for k in 1..=n {
            let d = cabs_f64(&Complex::with_val(P, &residual_sq.coeff(k) - &conj.coeff(k)));
            assert!(d < 1e-25, "order {k} differs by {d}");
        }
    }

    #[test]
    fn rescale_preserves_multiplier() {
        let g = germ(&[2.0, 1.0, 0.5]);
        let c = cplx_f64(P, 0.0, 2.0);
        let r = g.rescale(&c).unwrap();
        assert_eq!(r.tau().clone(), g.tau().clone());
        assert_eq!(r.degree(), 3);
    }
}
