//! Dense truncated power-series arithmetic over rug complex coefficients.
//!
//! A `TruncatedSeries` is a germ known to order N: coefficients a_1..a_N,
//! constant term identically zero. Arithmetic never reads or writes
//! above order N. Orders stay small (a few hundred at most), so the
//! dense representation and the O(N^3) composition are the right trade.

use rug::Complex;

use crate::error::{Error, Result};
use crate::num::{cabs_f64, cplx_zero, ComplexDec, Prec};

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    /// coeffs[k] is the coefficient of xi^{k+1}.
    coeffs: Vec<Complex>,
    prec: Prec,
}

impl TruncatedSeries {
    pub fn from_coeffs(prec: Prec, coeffs: Vec<Complex>) -> Self {
        assert!(!coeffs.is_empty(), "series needs order >= 1");
        TruncatedSeries { coeffs, prec }
    }

    pub fn zero(prec: Prec, order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![cplx_zero(prec); order.max(1)],
            prec,
        }
    }

    /// The identity germ xi to the given order.
    pub fn identity(prec: Prec, order: usize) -> Self {
        let mut s = Self::zero(prec, order);
        s.coeffs[0] = Complex::with_val(prec, (1.0, 0.0));
        s
    }

    /// The linear germ tau * xi.
    pub fn linear(tau: Complex, order: usize) -> Self {
        let prec = tau.prec().0.max(tau.prec().1);
        let mut s = Self::zero(prec, order);
        s.coeffs[0] = tau;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn prec(&self) -> Prec {
        self.prec
    }

    /// Coefficient of xi^k, 1-based; zero above the order.
    pub fn coeff(&self, k: usize) -> Complex {
        assert!(k >= 1, "series have no constant term");
        self.coeffs
            .get(k - 1)
            .cloned()
            .unwrap_or_else(|| cplx_zero(self.prec))
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn multiplier(&self) -> Complex {
        self.coeffs[0].clone()
    }

    pub fn truncate(&self, order: usize) -> Result<TruncatedSeries> {
        if order > self.order() {
            return Err(Error::OrderMismatch {
                requested: order,
                available: self.order(),
            });
        }
        Ok(TruncatedSeries {
            coeffs: self.coeffs[..order].to_vec(),
            prec: self.prec,
        })
    }

    /// Extend with zero coefficients up to `order`.
    pub fn pad(&self, order: usize) -> TruncatedSeries {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() < order {
            coeffs.push(cplx_zero(self.prec));
        }
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(other.order());
        let coeffs = (0..n)
            .map(|i| Complex::with_val(self.prec, &self.coeffs[i] + &other.coeffs[i]))
            .collect();
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let n = self.order().min(other.order());
        let coeffs = (0..n)
            .map(|i| Complex::with_val(self.prec, &self.coeffs[i] - &other.coeffs[i]))
            .collect();
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    pub fn scale(&self, c: &Complex) -> TruncatedSeries {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| Complex::with_val(self.prec, a * c))
            .collect();
        TruncatedSeries {
            coeffs,
            prec: self.prec,
        }
    }

    /// Horner evaluation at a point (the series as a polynomial).
    pub fn eval(&self, xi: &Complex) -> Complex {
        let prec = self.prec.max(xi.prec().0.max(xi.prec().1));
        let mut acc = Complex::with_val(prec, 0);
        for a in self.coeffs.iter().rev() {
            acc *= xi;
            acc += a;
        }
        acc * xi
    }

    /// Largest |a_k| over 2 <= k <= order.
    pub fn max_tail_norm(&self) -> f64 {
        self.coeffs[1..]
            .iter()
            .map(cabs_f64)
            .fold(0.0, f64::max)
    }

    pub fn to_dec_pairs(&self) -> Vec<ComplexDec> {
        self.coeffs.iter().map(ComplexDec::of).collect()
    }

    /// Parse back from the serialized form.
    pub fn from_dec_pairs(prec: Prec, pairs: &[ComplexDec]) -> Option<Self> {
        let coeffs: Option<Vec<Complex>> = pairs.iter().map(|p| p.to_complex(prec)).collect();
        Some(TruncatedSeries {
            coeffs: coeffs?,
            prec,
        })
    }
}

/// Series serialize as {"order": N, "coeffs": [[re, im], ...]} with
/// decimal-string coefficients, precision preserved.
impl serde::Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TruncatedSeries", 2)?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("coeffs", &self.to_dec_pairs())?;
        st.end()
    }
}

/// Raw truncated product of coefficient slices that include a constant
/// slot at index 0, to `len` slots.
fn mul_raw(prec: Prec, a: &[Complex], b: &[Complex], len: usize) -> Vec<Complex> {
    let mut out = vec![cplx_zero(prec); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] += Complex::with_val(prec, ai * bj);
        }
    }
    out
}

/// outer(inner(xi)) truncated at order n.
///
/// Horner over the outer coefficients; the first output coefficient is
/// the plain product outer_1 * inner_1, so conjugation by a
/// tangent-to-identity germ preserves the multiplier bit-for-bit.
pub fn compose(outer: &TruncatedSeries, inner: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    for s in [outer, inner] {
        if n > s.order() {
            return Err(Error::OrderMismatch {
                requested: n,
                available: s.order(),
            });
        }
    }
    let prec = outer.prec.max(inner.prec);
    // Raw layout with a constant slot: inner_raw[0] = 0.
    let mut inner_raw = vec![cplx_zero(prec)];
    inner_raw.extend(inner.coeffs[..n].iter().cloned());

    let mut acc = vec![cplx_zero(prec); n + 1];
    acc[0] = outer.coeffs[n - 1].clone();
    for k in (1..n).rev() {
        acc = mul_raw(prec, &acc, &inner_raw, n + 1);
        acc[0] += &outer.coeffs[k - 1];
    }
    acc = mul_raw(prec, &acc, &inner_raw, n + 1);
    Ok(TruncatedSeries {
        coeffs: acc[1..].to_vec(),
        prec,
    })
}

/// Compositional inverse to order n: compose(invert(s), s) = identity.
pub fn invert(s: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    if n > s.order() {
        return Err(Error::OrderMismatch {
            requested: n,
            available: s.order(),
        });
    }
    let prec = s.prec;
    let a1 = &s.coeffs[0];
    if a1.is_zero() {
        return Err(Error::NonInvertible);
    }
    // Triangular solve: [xi^m](B o s) = delta_{m,1}, maintaining the
    // powers s^k truncated at n.
    let mut b = vec![cplx_zero(prec); n];
    b[0] = Complex::with_val(prec, a1.recip_ref());
    let mut s_pow = vec![cplx_zero(prec); n + 1]; // s^1 in raw layout
    s_pow[1..=n].clone_from_slice(&s.coeffs[..n]);
    let mut s_raw = vec![cplx_zero(prec)];
    s_raw.extend(s.coeffs[..n].iter().cloned());

    let mut powers = vec![s_pow.clone()]; // powers[k-1] = raw s^k
    for _ in 2..=n {
        let next = mul_raw(prec, powers.last().unwrap(), &s_raw, n + 1);
        powers.push(next);
    }
    for m in 2..=n {
        // b_m * a1^m + sum_{k<m} b_k [xi^m] s^k = 0
        let mut acc = Complex::with_val(prec, 0);
        for k in 1..m {
            acc += Complex::with_val(prec, &b[k - 1] * &powers[k - 1][m]);
        }
        let a1_m = crate::num::cpow(a1, m as u64);
        b[m - 1] = Complex::with_val(prec, -acc / a1_m);
    }
    Ok(TruncatedSeries { coeffs: b, prec })
}

/// h^{-1} o f o h truncated at order n.
pub fn conjugate(f: &TruncatedSeries, h: &TruncatedSeries, n: usize) -> Result<TruncatedSeries> {
    let h_inv = invert(h, n)?;
    let inner = compose(f, h, n)?;
    compose(&h_inv, &inner, n)
}

/// m-th compositional power of f, truncated at the order of f.
pub fn compose_power(f: &TruncatedSeries, m: u32) -> Result<TruncatedSeries> {
    let n = f.order();
    let mut acc = TruncatedSeries::identity(f.prec, n);
    for _ in 0..m {
        acc = compose(f, &acc, n)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cplx_f64;

    const P: Prec = 128;

    fn series(coeffs: &[(f64, f64)]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(
            P,
            coeffs.iter().map(|&(re, im)| cplx_f64(P, re, im)).collect(),
        )
    }

    fn coeff_close(s: &TruncatedSeries, k: usize, re: f64, im: f64) {
        let c = s.coeff(k);
        let d = cabs_f64(&Complex::with_val(P, &c - &cplx_f64(P, re, im)));
        assert!(d < 1e-30, "coeff {k} = {c:?}, wanted {re}+{im}i");
    }

    #[test]
    fn compose_with_identity_is_f() {
        let f = series(&[(2.0, 0.0), (1.0, 0.0), (0.5, 0.0)]);
        let id = TruncatedSeries::identity(P, 3);
        let g = compose(&f, &id, 3).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn compose_hand_expansion() {
        // (xi + xi^2) o (xi + xi^2) = xi + 2 xi^2 + 2 xi^3 + O(xi^4)
        let s = series(&[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let g = compose(&s, &s, 3).unwrap();
        coeff_close(&g, 1, 1.0, 0.0);
        coeff_close(&g, 2, 2.0, 0.0);
        coeff_close(&g, 3, 2.0, 0.0);
    }

    #[test]
    fn compose_linear_multiplies() {
        let f = series(&[(3.0, 0.0)]);
        let g = series(&[(0.5, 0.5)]);
        let h = compose(&f, &g, 1).unwrap();
        coeff_close(&h, 1, 1.5, 1.5);
    }

    #[test]
    fn compose_rejects_order_mismatch() {
        let f = series(&[(1.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(
            compose(&f, &f, 3),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn invert_identity_and_linear() {
        let id = TruncatedSeries::identity(P, 5);
        assert_eq!(invert(&id, 5).unwrap(), id);
        let two = series(&[(2.0, 0.0), (0.0, 0.0)]);
        let inv = invert(&two, 2).unwrap();
        coeff_close(&inv, 1, 0.5, 0.0);
        coeff_close(&inv, 2, 0.0, 0.0);
    }

    #[test]
    fn invert_lagrange_oracle() {
        // (xi + xi^2)^{-1} = xi - xi^2 + 2 xi^3 + O(xi^4)
        let s = series(&[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let inv = invert(&s, 3).unwrap();
        coeff_close(&inv, 1, 1.0, 0.0);
        coeff_close(&inv, 2, -1.0, 0.0);
        coeff_close(&inv, 3, 2.0, 0.0);
    }

    #[test]
    fn invert_rejects_zero_multiplier() {
        let s = series(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(invert(&s, 2), Err(Error::NonInvertible)));
    }

    #[test]
    fn conjugate_kills_quadratic_term() {
        // h = xi + 1/2 xi^2 conjugates 2 xi + xi^2 to 2 xi + O(xi^3).
        let f = series(&[(2.0, 0.0), (1.0, 0.0)]);
        let h = series(&[(1.0, 0.0), (0.5, 0.0)]);
        let g = conjugate(&f, &h, 2).unwrap();
        coeff_close(&g, 1, 2.0, 0.0);
        coeff_close(&g, 2, 0.0, 0.0);
    }

    #[test]
    fn conjugate_by_identity_is_f() {
        let f = series(&[(2.0, 0.0), (1.0, 0.0), (-0.5, 0.25)]);
        let id = TruncatedSeries::identity(P, 3);
        assert_eq!(conjugate(&f, &id, 3).unwrap(), f);
    }

    #[test]
    fn linear_germ_fixed_at_order_one() {
        // tau xi keeps its multiplier under any tangent-to-identity
        // conjugation; the full conjugate is re-verified against an
        // independent assembly order of the same composition.
        let tau = cplx_f64(P, 0.3, 0.71);
        let f = TruncatedSeries::linear(tau.clone(), 4);
        let h = series(&[(1.0, 0.0), (0.4, -0.2), (0.0, 0.3), (0.1, 0.0)]);
        let g = conjugate(&f, &h, 4).unwrap();
        assert_eq!(g.coeff(1), tau);
        let oracle = compose(&compose(&invert(&h, 4).unwrap(), &f, 4).unwrap(), &h, 4).unwrap();
        for k in 1..=4 {
            let d = cabs_f64(&Complex::with_val(P, &g.coeff(k) - &oracle.coeff(k)));
            assert!(d < 1e-30, "order {k}: {d:e}");
        }
    }

    #[test]
    fn conjugation_preserves_multiplier_exactly() {
        let tau = cplx_f64(P, 0.83, -0.41);
        let f = TruncatedSeries::from_coeffs(
            P,
            vec![tau.clone(), cplx_f64(P, 0.2, 0.1), cplx_f64(P, -0.3, 0.0)],
        );
        let h = series(&[(1.0, 0.0), (0.7, -0.2), (0.1, 0.4)]);
        let g = conjugate(&f, &h, 3).unwrap();
        assert_eq!(g.multiplier(), tau);
    }

    #[test]
    fn eval_is_horner() {
        let s = series(&[(2.0, 0.0), (1.0, 0.0)]);
        let x = cplx_f64(P, 0.25, 0.0);
        let v = s.eval(&x);
        coeff_close(
            &TruncatedSeries::from_coeffs(P, vec![v]),
            1,
            2.0 * 0.25 + 0.0625,
            0.0,
        );
    }
}
