use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::AlgebraError;

/// Arbitrary-precision exact fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Shorthand for `n/d` with small integer parts.
///
/// Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-5/12"`, `"+7/4"`, `"0.25"`, `"-.5"` or `"1e-3"` into an
/// exact rational. Decimal literals are converted without rounding.
pub fn parse_rational(text: &str) -> Result<Rational, AlgebraError> {
    let err = || AlgebraError::ParseRational(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_integer(num.trim()).ok_or_else(err)?;
        let d = parse_unsigned(den.trim()).ok_or_else(err)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_unsigned(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let (neg, digits) = split_sign(s);
    let v = parse_unsigned(digits)?;
    Some(if neg { -v } else { v })
}

fn split_sign(s: &str) -> (bool, &str) {
    match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, rest) = split_sign(s);
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = rest[i + 1..].parse().ok()?;
            (&rest[..i], e)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Renders `r` with `sig` significant digits, rounding half to even on the
/// exact value. Positional notation is used for moderate magnitudes,
/// otherwise `d.dddE±n`.
pub fn format_decimal(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Find e with 10^e <= a < 10^(e+1).
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let mut digits = round_half_even(&scaled);
    if digits.to_string().len() > sig {
        // Rounded up to the next power of ten.
        e += 1;
        digits = round_half_even(&(&a * pow10(sig as i64 - 1 - e)));
    }
    let digit_str = digits.to_string();
    let body = if (-7..15).contains(&e) {
        positional(&digit_str, e)
    } else {
        let (head, tail) = digit_str.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}E{e:+}")
        } else {
            format!("{head}.{tail}E{e:+}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn positional(digits: &str, e: i64) -> String {
    let n = digits.len() as i64;
    let s = if e < 0 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    } else if e + 1 >= n {
        format!("{}{}", digits, "0".repeat((e + 1 - n) as usize))
    } else {
        let (i, f) = digits.split_at((e + 1) as usize);
        format!("{i}.{f}")
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn pow10(e: i64) -> Rational {
    let p = Rational::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

fn round_half_even(x: &Rational) -> BigInt {
    let (q, r) = x.numer().div_mod_floor(x.denom());
    let twice: BigInt = r * 2;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a scaled division for huge numerators/denominators.
        let n = r.numer();
        let d = r.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = n >> shift;
        let d = d >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}
