//! Exact rational scalars and the few conversions the rest of the crate
//! leans on: canonical `p/q` text form, floor/ceil/nearest, denominator
//! lcms, and exact square roots.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use num::Integer;

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(big(v))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(big(num), big(den))
}

/// Canonical text form: `p` for integers, otherwise `p/q` with q > 0 and
/// gcd(p, q) = 1. `BigRational` keeps the sign on the numerator already.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::BadInput(format!("bad rational literal: {s:?}")))
    };
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::BadInput(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(parse_int(n)?, den))
        }
    }
}

pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// Nearest integer, halves rounded up.
pub fn rat_round(r: &Rat) -> BigInt {
    (r + Rat::new(big(1), big(2))).floor().to_integer()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Least common multiple of the denominators in `items`, at least 1.
pub fn denom_lcm<'a>(items: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    let mut l = BigInt::one();
    for r in items {
        l = l.lcm(r.denom());
    }
    l
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative value");
    n.sqrt()
}

/// Exact square root of a nonnegative rational, if one exists.
pub fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let sn = isqrt(r.numer());
    let sd = isqrt(r.denom());
    if &sn * &sn == *r.numer() && &sd * &sd == *r.denom() {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("rational out of f64 range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for (n, d, s) in [(1, 2, "1/2"), (-3, 4, "-3/4"), (5, 1, "5"), (0, 7, "0")] {
            let r = rat(n, d);
            assert_eq!(rat_to_string(&r), s);
            assert_eq!(rat_from_str(s).unwrap(), r);
        }
        assert_eq!(rat_from_str("6/4").unwrap(), rat(3, 2));
        assert_eq!(rat_from_str("-2/-4").unwrap(), rat(1, 2));
        assert!(rat_from_str("1/0").is_err());
        assert!(rat_from_str("x").is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(rat_round(&rat(3, 2)), big(2));
        assert_eq!(rat_round(&rat(-3, 2)), big(-1));
        assert_eq!(rat_round(&rat(1, 3)), big(0));
        assert_eq!(rat_floor(&rat(-1, 3)), big(-1));
    }

    #[test]
    fn sqrt_exact() {
        assert_eq!(rat_sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt_exact(&rat(2, 1)), None);
        assert_eq!(rat_sqrt_exact(&rat(0, 1)), Some(rat(0, 1)));
        assert_eq!(rat_sqrt_exact(&rat(-4, 1)), None);
    }

    #[test]
    fn denom_lcms() {
        let xs = [rat(1, 6), rat(3, 4), rat(2, 1)];
        assert_eq!(denom_lcm(xs.iter()), big(12));
    }
}
