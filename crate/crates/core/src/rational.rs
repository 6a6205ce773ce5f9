//! Exact-rational helpers shared by the oracle and PGF modules.

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses a rational literal: `"3/10"`, `"0.3"`, `"7"`, or `"-1.25e-2"`.
///
/// Decimal strings convert exactly (base-10 digits over a power of ten), so
/// `"0.3"` becomes `3/10` rather than the nearest double.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    // Decimal form, optional exponent.
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let e: i64 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (m, e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(Error::Parse(format!("bad rational literal {s:?}")));
    }
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal {s:?}")))?;
    let shift = frac_part.len() as i64 - exp10;
    let ten = BigInt::from(10);
    let value = if shift >= 0 {
        BigRational::new(n, ten.pow(shift as u32))
    } else {
        BigRational::from_integer(n * ten.pow((-shift) as u32))
    };
    Ok(value)
}

/// Converts an `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::domain(format!("{x} is not finite")))
}

/// Renders `r` as `"num/den"` (or just `"num"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `r` as a double. Exact conversion via `to_f64` when possible, with a
/// log-scaled fallback for ratios whose parts overflow the double range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() || r.numer().is_zero() {
            return v;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * log_of_rational_abs(r).exp()
}

/// Natural log of `|r|`, computed from the bit lengths of numerator and
/// denominator so it stays accurate far outside the double range.
/// Returns `-inf` for zero.
pub fn log_of_rational_abs(r: &BigRational) -> f64 {
    if r.numer().is_zero() {
        return f64::NEG_INFINITY;
    }
    log_of_bigint_abs(r.numer()) - log_of_bigint_abs(r.denom())
}

/// Natural log of `|r|` for a strictly positive rational; `-inf` at zero,
/// error if negative.
pub fn log_of_rational(r: &BigRational) -> Result<f64> {
    if r.is_negative() {
        return Err(Error::domain("log of negative rational".to_string()));
    }
    Ok(log_of_rational_abs(r))
}

fn log_of_bigint_abs(x: &BigInt) -> f64 {
    let (sign, mag) = x.clone().into_parts();
    if sign == Sign::NoSign {
        return f64::NEG_INFINITY;
    }
    let bits = mag.bits();
    if bits <= 64 {
        return (mag.to_f64().unwrap()).ln();
    }
    // Keep the top 64 bits as the mantissa, account for the shift.
    let shift = bits - 64;
    let top = (mag >> shift).to_f64().unwrap();
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Exact `r^k` for integer `k >= 0`.
pub fn rational_pow(r: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = r.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial_coefficient(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}
