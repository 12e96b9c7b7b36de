use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Sign of an exact or approximate quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SignClass {
    Negative,
    Zero,
    Positive,
}

impl SignClass {
    pub fn of_ordering(ord: Ordering) -> Self {
        match ord {
            Ordering::Less => SignClass::Negative,
            Ordering::Equal => SignClass::Zero,
            Ordering::Greater => SignClass::Positive,
        }
    }

    pub fn of_bigint(v: &BigInt) -> Self {
        match v.sign() {
            Sign::Minus => SignClass::Negative,
            Sign::NoSign => SignClass::Zero,
            Sign::Plus => SignClass::Positive,
        }
    }

    pub fn is_zero(self) -> bool {
        self == SignClass::Zero
    }
}

/// Exact rational number in canonical reduced form.
///
/// The denominator is always positive and coprime to the numerator; zero is
/// stored as `0/1`. Structural equality is therefore numeric equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer / denom`, reducing to canonical form.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact value of a finite float. Every finite `f64` is a dyadic rational.
    pub fn from_f64_exact(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Rational)
            .ok_or_else(|| Error::InvalidInput(format!("non-finite value {v}")))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn signum(&self) -> SignClass {
        SignClass::of_bigint(self.0.numer())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// `self / rhs`, or `None` when `rhs` is zero.
    pub fn checked_div(&self, rhs: &Rational) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational(&self.0 / &rhs.0))
        }
    }

    pub fn recip(&self) -> Option<Self> {
        Rational::one().checked_div(self)
    }

    /// Nearest `f64`; huge magnitudes saturate to infinity.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.0.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    pub fn from_big(v: BigRational) -> Self {
        Rational(v)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_integer(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn parse_integer(text: &str, whole: &str) -> Result<BigInt> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::InvalidInput(format!("malformed rational `{whole}`")));
    }
    BigInt::from_str(text).map_err(|_| Error::InvalidInput(format!("malformed rational `{whole}`")))
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `p/q`, and decimals such as `-0.25` or `1.5e-3`, all parsed exactly.
    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p = parse_integer(p.trim(), text)?;
            let q = parse_integer(q.trim(), text)?;
            return Rational::new(p, q);
        }

        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(pos) => {
                let exp_text = &text[pos + 1..];
                let exp = parse_integer(exp_text, text)?
                    .to_i32()
                    .filter(|e| e.abs() <= 4096)
                    .ok_or_else(|| Error::InvalidInput(format!("exponent out of range in `{text}`")))?;
                (&text[..pos], exp)
            }
            None => (text, 0),
        };

        let (negative, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty()) || !all_digits(int_part) || !all_digits(frac_part) {
            return Err(Error::InvalidInput(format!("malformed rational `{text}`")));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer = BigInt::from_str(&digits).unwrap_or_default();
        if negative {
            numer = -numer;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rational(value))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let a = Rational::new(6, -4).unwrap();
        assert_eq!(a.numer(), &BigInt::from(-3));
        assert_eq!(a.denom(), &BigInt::from(2));
        let z = Rational::new(0, -7).unwrap();
        assert_eq!(z.denom(), &BigInt::from(1));
        assert_eq!(z, Rational::zero());
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn parses_text_forms() {
        assert_eq!(r("3/4"), Rational::new(3, 4).unwrap());
        assert_eq!(r("-6/8"), Rational::new(-3, 4).unwrap());
        assert_eq!(r("0.25"), Rational::new(1, 4).unwrap());
        assert_eq!(r("-.5"), Rational::new(-1, 2).unwrap());
        assert_eq!(r("7"), Rational::from_integer(7));
        assert_eq!(r("1.5e-3"), Rational::new(3, 2000).unwrap());
        assert_eq!(r("2E2"), Rational::from_integer(200));
        for bad in ["", "1/0", "abc", "1/2/3", "1..2", "-", "1e", "0x10"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "-5", "22/7", "-1/3"] {
            assert_eq!(r(s).to_string(), s);
            assert_eq!(r(&r(s).to_string()), r(s));
        }
    }

    #[test]
    fn float_conversion_is_exact() {
        let v = Rational::from_f64_exact(0.1).unwrap();
        assert_eq!(v.to_f64(), 0.1);
        assert_ne!(v, r("0.1"));
        assert!(Rational::from_f64_exact(f64::NAN).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = r("1/3");
        let b = r("1/6");
        assert_eq!(&a + &b, r("1/2"));
        assert_eq!(&a - &b, r("1/6"));
        assert_eq!(&a * &b, r("1/18"));
        assert_eq!(a.checked_div(&b), Some(r("2")));
        assert_eq!(a.checked_div(&Rational::zero()), None);
        assert_eq!(r("-2/3").pow(3), r("-8/27"));
        assert_eq!(r("-2/3").signum(), SignClass::Negative);
    }
}
