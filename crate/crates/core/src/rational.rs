//! Exact rational scalars used for times, levels and vertex values.

use alloc::string::{String, ToString};

use num_bigint::BigInt;
use num_traits::Zero;

/// Arbitrary precision rational number.
pub type Rational = num_rational::BigRational;

/// Number of decimal digits kept when an `f64` is snapped to a rational.
pub const ROUNDING_DIGITS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational number")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `"3"`, `"-1/2"`, `"0.125"`, `".5"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(err)?;
        let den = parse_decimal(den.trim()).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut numer = BigInt::zero();
    let ten = BigInt::from(10u32);
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer * &ten + BigInt::from(b - b'0');
    }
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let power = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        Rational::from_integer(numer * power)
    } else {
        Rational::new(numer, power)
    })
}

/// Canonical `"p/q"` (lowest terms, positive denominator) or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Rounds a finite float to the nearest multiple of `10^-ROUNDING_DIGITS`.
///
/// Returns `None` for NaN or infinities.
pub fn round_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let scale = 10f64.powi(ROUNDING_DIGITS as i32);
    let scaled = libm::round(x * scale);
    if scaled.abs() >= 1.0e36 {
        return None;
    }
    let numer = BigInt::from(scaled as i128);
    Some(Rational::new(
        numer,
        num_traits::pow(BigInt::from(10u32), ROUNDING_DIGITS as usize),
    ))
}

/// Lossy conversion used for plotting and kernel evaluation only.
pub fn to_f64(value: &Rational) -> f64 {
    let (n, d) = (value.numer(), value.denom());
    // Scale both parts down so the division does not overflow f64.
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = n >> shift;
    let d = d >> shift;
    bigint_to_f64(&n) / bigint_to_f64(&d)
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    let (sign, digits) = x.to_u64_digits();
    let mut acc = 0.0f64;
    for d in digits.iter().rev() {
        acc = acc * 18446744073709551616.0 + *d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -acc,
        _ => acc,
    }
}

/// Midpoint of two rationals.
pub fn midpoint(a: &Rational, b: &Rational) -> Rational {
    (a + b) / Rational::from_integer(BigInt::from(2))
}

/// Convenience constructor for `n / d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Convenience constructor for an integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
