//! Germ and multiplier parsing for the CLI surfaces.
//!
//! Germ grammar: a polynomial in x with complex coefficients, e.g.
//! "2x+x^2", "x-x^2+x^3-x^4", "(1/3-2/5i)x^2+1.5ix". Coefficients may be
//! integers, decimals, exact rationals p/q, pure imaginary multiples of
//! i, or parenthesized a+bi combinations; exact rationals stay exact at
//! the working precision. Multiplier shortcuts: "p/q" (exact rational
//! turns), "golden", "cremer:d=2,depth=3,a=2", a decimal angle
//! "theta@bits", or a raw complex number "0.3-0.7i".

use rug::{Complex, Float, Rational};

use crate::diophantine::{cremer_angle, Angle, Multiplier};
use crate::error::{Error, Result};
use crate::germ::PolynomialGerm;
use crate::num::{cplx_zero, float_to_dec, Prec};

/// Parse a polynomial germ. Anything non-polynomial (for instance the
/// rational map "x/(1+x)") is rejected at this surface.
pub fn parse_germ(input: &str, prec: Prec) -> Result<PolynomialGerm> {
    let cleaned: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty germ string".into()));
    }
    if cleaned.contains('/') {
        // A slash is only legal inside a coefficient (rational p/q), so
        // "x/(...)" and similar rational maps must be refused. Detect a
        // slash immediately following the variable or ')'.
        let bytes = cleaned.as_bytes();
        for i in 0..bytes.len() {
            if bytes[i] == b'/' && i > 0 && (bytes[i - 1] == b'x' || bytes[i - 1] == b')') {
                return Err(Error::Parse(
                    "germs must be polynomial in x (rational maps are not accepted)".into(),
                ));
            }
        }
    }

    let mut coeffs: Vec<Complex> = Vec::new();
    let mut max_deg = 0usize;
    for (sign, term) in split_terms(&cleaned)? {
        let (deg, coeff) = parse_term(&term, prec)?;
        if deg == 0 && !coeff.is_zero() {
            return Err(Error::Parse(
                "germ must fix the origin: constant terms are not allowed".into(),
            ));
        }
        if deg == 0 {
            continue;
        }
        max_deg = max_deg.max(deg);
        if coeffs.len() < max_deg {
            coeffs.resize(max_deg, cplx_zero(prec));
        }
        let signed = if sign < 0 {
            Complex::with_val(prec, -coeff)
        } else {
            coeff
        };
        coeffs[deg - 1] += signed;
    }
    if coeffs.is_empty() {
        return Err(Error::Parse("germ has no terms in x".into()));
    }
    PolynomialGerm::new(coeffs)
}

/// Parse an affine polynomial (constant term allowed), constant-first
/// coefficient layout. Dynamics-only surfaces like the Green raster use
/// this; holonomy germs must still fix the origin.
pub fn parse_affine_polynomial(input: &str, prec: Prec) -> Result<Vec<Complex>> {
    let cleaned: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Parse("empty polynomial string".into()));
    }
    let mut coeffs: Vec<Complex> = vec![cplx_zero(prec)];
    for (sign, term) in split_terms(&cleaned)? {
        let (deg, coeff) = parse_term(&term, prec)?;
        if coeffs.len() < deg + 1 {
            coeffs.resize(deg + 1, cplx_zero(prec));
        }
        let signed = if sign < 0 {
            Complex::with_val(prec, -coeff)
        } else {
            coeff
        };
        coeffs[deg] += signed;
    }
    while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// Canonical printing; `parse_germ` of the output returns identical
/// coefficients at the same precision.
pub fn print_germ(f: &PolynomialGerm) -> String {
    let mut parts = Vec::new();
    for (i, c) in f.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let re = float_to_dec(c.real());
        let im = float_to_dec(c.imag());
        let coeff = format!("({re}+{im}i)");
        let var = match i {
            0 => "x".to_string(),
            _ => format!("x^{}", i + 1),
        };
        parts.push(format!("{coeff}{var}"));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

/// Split into (+1/-1, term) pieces at top-level +/- signs.
fn split_terms(s: &str) -> Result<Vec<(i32, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = 1i32;
    let mut seen_any = false;
    for (idx, ch) in s.char_indices() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse("unbalanced parentheses".into()));
                }
                cur.push(ch);
            }
            '+' | '-' if depth == 0 => {
                // Exponent signs like 1e-3 stay inside the term.
                let prev = s.as_bytes().get(idx.wrapping_sub(1)).copied();
                if matches!(prev, Some(b'e') | Some(b'E'))
                    && cur.chars().next().map(|c| c.is_ascii_digit() || c == '.').unwrap_or(false)
                {
                    cur.push(ch);
                    continue;
                }
                if cur.is_empty() && !seen_any {
                    sign = if ch == '-' { -sign } else { sign };
                } else if cur.is_empty() {
                    return Err(Error::Parse("dangling sign".into()));
                } else {
                    out.push((sign, std::mem::take(&mut cur)));
                    sign = if ch == '-' { -1 } else { 1 };
                }
                seen_any = true;
            }
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced parentheses".into()));
    }
    if cur.is_empty() {
        return Err(Error::Parse("empty trailing term".into()));
    }
    out.push((sign, cur));
    Ok(out)
}

/// One term: [coefficient][*][x[^k]].
fn parse_term(term: &str, prec: Prec) -> Result<(usize, Complex)> {
    let (coeff_str, deg) = match term.find('x') {
        None => (term, 0usize),
        Some(pos) => {
            let after = &term[pos + 1..];
            let deg = if after.is_empty() {
                1
            } else if let Some(stripped) = after.strip_prefix('^') {
                stripped
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad exponent in '{term}'")))?
            } else {
                return Err(Error::Parse(format!("unexpected suffix in '{term}'")));
            };
            let mut head = &term[..pos];
            if let Some(stripped) = head.strip_suffix('*') {
                head = stripped;
            }
            (head, deg)
        }
    };
    if deg == 0 {
        return Ok((0, parse_coefficient(coeff_str, prec)?));
    }
    if coeff_str.is_empty() {
        return Ok((deg, Complex::with_val(prec, (1.0, 0.0))));
    }
    Ok((deg, parse_coefficient(coeff_str, prec)?))
}

/// Coefficient forms: "2", "-0.5", "1/3", "i", "2i", "1/3i",
/// "(a+bi)" with a, b in any real form above.
pub fn parse_coefficient(s: &str, prec: Prec) -> Result<Complex> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let mut re = Float::with_val(prec, 0);
        let mut im = Float::with_val(prec, 0);
        for (sign, part) in split_terms(inner)? {
            let sgn = Float::with_val(prec, sign);
            if let Some(imag_part) = part.strip_suffix('i') {
                let v = if imag_part.is_empty() {
                    Float::with_val(prec, 1)
                } else {
                    parse_real(imag_part, prec)?
                };
                im += v * sgn;
            } else {
                re += parse_real(&part, prec)? * sgn;
            }
        }
        return Ok(Complex::with_val(prec, (re, im)));
    }
    if let Some(imag_part) = s.strip_suffix('i') {
        let v = if imag_part.is_empty() || imag_part == "+" {
            Float::with_val(prec, 1)
        } else if imag_part == "-" {
            Float::with_val(prec, -1)
        } else {
            parse_real(imag_part, prec)?
        };
        return Ok(Complex::with_val(prec, (Float::with_val(prec, 0), v)));
    }
    Ok(Complex::with_val(prec, (parse_real(s, prec)?, Float::with_val(prec, 0))))
}

fn parse_real(s: &str, prec: Prec) -> Result<Float> {
    if let Some((num, den)) = s.split_once('/') {
        let r = num
            .parse::<i128>()
            .ok()
            .zip(den.parse::<i128>().ok())
            .and_then(|(n, d)| {
                if d == 0 {
                    None
                } else {
                    Some(Rational::from((rug::Integer::from(n), rug::Integer::from(d))))
                }
            })
            .ok_or_else(|| Error::Parse(format!("bad rational '{s}'")))?;
        return Ok(Float::with_val(prec, &r));
    }
    Float::parse(s)
        .map(|p| Float::with_val(prec, p))
        .map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

/// Multiplier shortcuts for --tau.
pub fn parse_multiplier(s: &str, prec: Prec, cremer_bit_cap: u64) -> Result<Multiplier> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("golden") {
        return Ok(Multiplier::Circle(Angle::golden(prec.max(512))));
    }
    if let Some(rest) = s.strip_prefix("cremer:") {
        let mut d = 2u64;
        let mut depth = 3u32;
        let mut a = 2.0f64;
        for kv in rest.split(',') {
            let Some((k, v)) = kv.split_once('=') else {
                return Err(Error::Parse(format!("bad cremer parameter '{kv}'")));
            };
            match k {
                "d" => d = v.parse().map_err(|_| Error::Parse("bad d".into()))?,
                "depth" => depth = v.parse().map_err(|_| Error::Parse("bad depth".into()))?,
                "a" | "A" => a = v.parse().map_err(|_| Error::Parse("bad A".into()))?,
                other => return Err(Error::Parse(format!("unknown cremer key '{other}'"))),
            }
        }
        return Ok(cremer_angle(d, depth, a, cremer_bit_cap)?.multiplier);
    }
    // Exact rational turns p/q (integers only).
    if let Some((p, q)) = s.split_once('/') {
        if let (Ok(p), Ok(q)) = (p.parse::<i64>(), q.parse::<u64>()) {
            return Ok(Multiplier::Circle(Angle::rational(p, q)?));
        }
    }
    // Decimal angle with explicit precision: "0.6180339887@512".
    if let Some((theta, bits)) = s.split_once('@') {
        let bits: u32 = bits
            .parse()
            .map_err(|_| Error::Parse(format!("bad precision '{bits}'")))?;
        let t = parse_real(theta, bits)?;
        return Ok(Multiplier::Circle(Angle::real(t)));
    }
    // Raw complex number, with or without parentheses.
    let z = parse_coefficient(s, prec)
        .or_else(|_| parse_coefficient(&format!("({s})"), prec))?;
    Ok(Multiplier::Numeric(z))
}
