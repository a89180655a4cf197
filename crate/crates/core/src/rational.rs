//! Exact rational scalars and the few helpers the rest of the crate needs on top of
//! [`num_rational::BigRational`]: canonical text form, decimal rendering, and certified
//! rational bounds on `exp(t)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Number of Taylor terms used by [`exp_lower`] and [`exp_upper`].
const EXP_TERMS: u32 = 40;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or an integer string into a reduced rational.
pub fn parse(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{text}`")));
            }
            Ok(Rational::new(p, q))
        }
        None => {
            let p: BigInt = t.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(p))
        }
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Renders `r` with exactly `digits` fractional digits, rounding half to even.
pub fn to_decimal(r: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = &scaled - Rational::from_integer(floor.clone());
    let half = ratio(1, 2);
    let rounded = if frac > half || (frac == half && floor.is_odd()) {
        floor + 1
    } else {
        floor
    };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if r.is_negative() && !rounded_is_zero(&int_part, &frac_part) {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part, width = digits)
    }
}

fn rounded_is_zero(a: &BigInt, b: &BigInt) -> bool {
    a.is_zero() && b.is_zero()
}

pub fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

/// Approximate bit length of a rational (numerator bits + denominator bits).
pub fn bit_length(r: &Rational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Lossy conversion for display and statistics only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn taylor(t: &Rational, terms: u32) -> Rational {
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for k in 1..=terms + 1 {
        sum += &term;
        term = term * t / int(k as i64);
    }
    sum
}

/// A rational `L` with `L <= exp(t)`.
pub fn exp_lower(t: &Rational) -> Rational {
    if t.is_negative() {
        return exp_upper(&-t).recip();
    }
    // Every dropped term is nonnegative.
    taylor(t, EXP_TERMS)
}

/// A rational `U` with `exp(t) <= U`.
pub fn exp_upper(t: &Rational) -> Rational {
    if t.is_negative() {
        return exp_lower(&-t).recip();
    }
    // Lagrange remainder: exp(t) t^(K+1) / (K+1)!, with exp(t) <= 3^ceil(t).
    let k = EXP_TERMS + 1;
    let mut rem = pow(t, k as usize);
    for i in 1..=k {
        rem /= int(i as i64);
    }
    let ceil = t.ceil().to_integer();
    let three_pow = num_traits::pow(BigInt::from(3), usize::try_from(ceil).unwrap_or(usize::MAX));
    taylor(t, EXP_TERMS) + rem * Rational::from_integer(three_pow)
}

/// Certified check `reference * exp(-t_low) <= value <= reference * exp(t_high)`.
///
/// Uses inner rational bounds on the exponentials, so a `true` answer is always sound; a
/// value within about 1e-30 relative of a band edge may be rejected.
pub fn within_exp_band(value: &Rational, reference: &Rational, t_low: &Rational, t_high: &Rational) -> bool {
    let lower = reference * exp_upper(&-t_low);
    let upper = reference * exp_lower(t_high);
    &lower <= value && value <= &upper
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_are_canonical() {
        assert_eq!(format(&parse("6/4").unwrap()), "3/2");
        assert_eq!(format(&parse("-10/5").unwrap()), "-2");
        assert_eq!(format(&parse("7").unwrap()), "7");
        assert_eq!(parse(" 3 / -6 ").unwrap(), ratio(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.5").is_err());
    }

    #[test]
    fn decimal_rounds_half_even() {
        assert_eq!(to_decimal(&ratio(1, 8), 2), "0.12");
        assert_eq!(to_decimal(&ratio(3, 8), 2), "0.38");
        assert_eq!(to_decimal(&ratio(5, 2), 0), "2");
        assert_eq!(to_decimal(&ratio(7, 2), 0), "4");
        assert_eq!(to_decimal(&ratio(-1, 3), 4), "-0.3333");
        assert_eq!(to_decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&int(12), 3), "12.000");
    }

    #[test]
    fn exp_bounds_bracket_the_float() {
        for (p, q) in [(0, 1), (1, 8), (1, 4), (1, 2), (1, 1), (-1, 2), (5, 2)] {
            let t = ratio(p, q);
            let e = (p as f64 / q as f64).exp();
            let lo = to_f64(&exp_lower(&t));
            let hi = to_f64(&exp_upper(&t));
            assert!(lo <= hi);
            assert!((lo - e).abs() < 1e-12 && (hi - e).abs() < 1e-12, "{p}/{q}");
        }
        assert!(exp_lower(&ratio(1, 2)) < exp_upper(&ratio(1, 2)));
    }

    #[test]
    fn exp_band_is_sound() {
        let d = int(2);
        assert!(within_exp_band(&d, &d, &ratio(1, 4), &ratio(1, 4)));
        // 2 * 1.29 > 2 * e^(1/4) ~ 2.568
        assert!(!within_exp_band(&ratio(258, 100), &d, &ratio(1, 4), &ratio(1, 4)));
        assert!(within_exp_band(&ratio(256, 100), &d, &ratio(1, 4), &ratio(1, 4)));
        assert!(!within_exp_band(&ratio(155, 100), &d, &ratio(1, 4), &ratio(1, 4)));
    }
}
