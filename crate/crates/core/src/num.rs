//! Shared numeric helpers over rug (MPFR/MPC) values.
//!
//! Coefficients and high-precision scalars are `rug::Complex`/`rug::Float`
//! with per-value precision. Values serialize as decimal strings so
//! reports survive a JSON round trip without losing precision.

use num_complex::Complex64;
use rug::float::Special;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

pub type Prec = u32;

pub fn real_f64(prec: Prec, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn cplx_f64(prec: Prec, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn cplx_zero(prec: Prec) -> Complex {
    Complex::with_val(prec, (0.0, 0.0))
}

pub fn cplx_one(prec: Prec) -> Complex {
    Complex::with_val(prec, (1.0, 0.0))
}

pub fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

pub fn from_c64(prec: Prec, z: Complex64) -> Complex {
    Complex::with_val(prec, (z.re, z.im))
}

/// |z| as a Float at the value's own precision.
pub fn cabs(z: &Complex) -> Float {
    z.real().clone().hypot(z.imag())
}

pub fn cabs_f64(z: &Complex) -> f64 {
    cabs(z).to_f64()
}

/// Complex integer power by binary exponentiation.
pub fn cpow(z: &Complex, mut n: u64) -> Complex {
    let prec = z.prec().0.max(z.prec().1);
    let mut result = cplx_one(prec);
    let mut base = z.clone();
    while n > 0 {
        if n & 1 == 1 {
            result *= &base;
        }
        base.square_mut();
        n >>= 1;
    }
    result
}

pub fn two_pi(prec: Prec) -> Float {
    let mut pi = Float::with_val(prec, rug::float::Constant::Pi);
    pi *= 2;
    pi
}

/// e^{2 pi i theta} at the given precision.
pub fn unit_from_angle(prec: Prec, theta: &Float) -> Complex {
    let arg = Float::with_val(prec, theta * &two_pi(prec));
    let (sin, cos) = arg.sin_cos(Float::new(prec));
    Complex::with_val(prec, (cos, sin))
}

/// Distance from x to the nearest integer, in [0, 1/2].
pub fn dist_to_int(x: &Float) -> Float {
    let prec = x.prec();
    let fr = x.clone().fract().abs();
    let one_minus = Float::with_val(prec, 1.0 - fr.clone());
    if fr < one_minus {
        fr
    } else {
        one_minus
    }
}

/// Distance from a rational to the nearest integer, exact.
pub fn dist_to_int_rational(x: &Rational) -> Rational {
    let fr = x.clone().fract_floor(rug::Integer::new()).0;
    let fr = if fr < 0 {
        fr + Rational::from(1)
    } else {
        fr
    };
    let one_minus = Rational::from(1) - fr.clone();
    if fr < one_minus {
        fr
    } else {
        one_minus
    }
}

pub fn is_finite(z: &Complex) -> bool {
    z.real().is_finite() && z.imag().is_finite()
}

pub fn nan_float(prec: Prec) -> Float {
    Float::with_val(prec, Special::Nan)
}

/// Decimal string carrying enough digits to reproduce the value exactly
/// at its own precision.
pub fn float_to_dec(x: &Float) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf" } else { "inf" }.to_string();
    }
    x.to_string_radix(10, None)
}

pub fn float_from_dec(prec: Prec, s: &str) -> Option<Float> {
    match s {
        "nan" => Some(nan_float(prec)),
        "inf" => Some(Float::with_val(prec, Special::Infinity)),
        "-inf" => Some(Float::with_val(prec, Special::NegInfinity)),
        _ => Float::parse(s).ok().map(|p| Float::with_val(prec, p)),
    }
}

/// JSON form of a complex coefficient: a `[re, im]` pair of decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexDec(pub String, pub String);

impl ComplexDec {
    pub fn of(z: &Complex) -> Self {
        ComplexDec(float_to_dec(z.real()), float_to_dec(z.imag()))
    }

    pub fn to_complex(&self, prec: Prec) -> Option<Complex> {
        let re = float_from_dec(prec, &self.0)?;
        let im = float_from_dec(prec, &self.1)?;
        Some(Complex::with_val(prec, (re, im)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip_is_exact() {
        let x = Float::with_val(192, 1.0) / 3u32;
        let s = float_to_dec(&x);
        let y = float_from_dec(192, &s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn dist_to_int_reflects() {
        let x = Float::with_val(64, 2.75);
        assert_eq!(dist_to_int(&x).to_f64(), 0.25);
        let y = Float::with_val(64, -0.1);
        assert!((dist_to_int(&y).to_f64() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unit_angle_is_on_circle() {
        let theta = Float::with_val(128, 0.37);
        let z = unit_from_angle(128, &theta);
        assert!((cabs_f64(&z) - 1.0).abs() < 1e-30);
    }
}
