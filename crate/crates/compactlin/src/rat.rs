//! Exact rational scalars used throughout the solver core.
//!
//! Everything downstream of instance parsing works in arbitrary-precision
//! rationals; there are no tolerances anywhere. `Rat` is a thin alias over
//! a reduced-form big rational.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

/// Integer literal as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as a reduced rational. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses an integer (`3`, `-7`), a fraction (`5/4`), or a decimal (`1.25`)
/// into an exact rational. Decimals are exact: `0.1` is `1/10`, not a float.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".to_string());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_val = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(int_part).map_err(|e| format!("bad number {s:?}: {e}"))?
        };
        let frac_val = BigInt::from_str(frac_part).map_err(|e| format!("bad number {s:?}: {e}"))?;
        let scale = num::pow::pow(BigInt::from(10), frac_part.len());
        let mag = int_val.abs() * &scale + frac_val;
        let mag = if negative { -mag } else { mag };
        return Ok(Rat::new(mag, scale));
    }
    let n = BigInt::from_str(s).map_err(|e| format!("bad number {s:?}: {e}"))?;
    Ok(Rat::from_integer(n))
}

/// Canonical text form: integer when the denominator is 1, else `p/q`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact finite decimal expansion when the denominator is of the form
/// `2^a * 5^b`; `None` otherwise.
pub fn decimal_exact(r: &Rat) -> Option<String> {
    if r.denom().is_one() {
        return Some(r.numer().to_string());
    }
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let mut a = 0usize;
    let mut b = 0usize;
    while (&d % &two).is_zero() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    if !d.is_one() {
        return None;
    }
    let digits = a.max(b);
    let scale = num::pow::pow(BigInt::from(10), digits);
    let scaled = r.numer() * &scale / r.denom();
    let neg = scaled.is_negative();
    let mag = scaled.abs().to_string();
    let mag = if mag.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - mag.len()), mag)
    } else {
        mag
    };
    let (int_part, frac_part) = mag.split_at(mag.len() - digits);
    let out = if digits == 0 {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac_part}")
    };
    Some(if neg { format!("-{out}") } else { out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_fractions_decimals() {
        assert_eq!(parse_rat("3").unwrap(), rat(3));
        assert_eq!(parse_rat("-7").unwrap(), rat(-7));
        assert_eq!(parse_rat("5/4").unwrap(), ratio(5, 4));
        assert_eq!(parse_rat("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_rat("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rat("-0.1").unwrap(), ratio(-1, 10));
        assert_eq!(parse_rat(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("1.2e3").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn decimal_expansion() {
        assert_eq!(decimal_exact(&ratio(5, 4)).unwrap(), "1.25");
        assert_eq!(decimal_exact(&ratio(-1, 10)).unwrap(), "-0.1");
        assert_eq!(decimal_exact(&rat(42)).unwrap(), "42");
        assert_eq!(decimal_exact(&ratio(1, 3)), None);
        assert_eq!(decimal_exact(&ratio(1, 200)).unwrap(), "0.005");
    }

    #[test]
    fn format_round_trips() {
        for r in [rat(0), rat(-3), ratio(7, 2), ratio(-9, 14)] {
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }
}
