//! Exact rational numbers for probabilities.
//!
//! Every probability in the crate flows through [`Rational`]; there is no
//! floating point on any path that produces or compares a probability.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    /// Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            None
        } else {
            Some(Rational(BigRational::new(num, den)))
        }
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// True iff `0 <= self <= 1`.
    pub fn is_probability(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }

    /// `1 - self`
    pub fn complement(&self) -> Self {
        Rational(BigRational::one() - &self.0)
    }

    pub fn abs_diff(&self, other: &Rational) -> Rational {
        Rational((&self.0 - &other.0).abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Lossy conversion, for display of empirical frequencies only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `num/den` or a bare integer, with optional surrounding spaces
    /// around the slash.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || ParseRationalError::Malformed(s.to_string());
        let parse_int = |part: &str| -> Result<BigInt, ParseRationalError> {
            let part = part.trim();
            let digits = part.strip_prefix('-').unwrap_or(part);
            if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
                return Err(malformed());
            }
            part.parse::<BigInt>().map_err(|_| malformed())
        };
        match s.split_once('/') {
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                Rational::from_bigints(n, d)
                    .ok_or_else(|| ParseRationalError::ZeroDenominator(s.to_string()))
            }
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
        }
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| &acc + x)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms() {
        assert_eq!(Rational::new(2, 6), Rational::new(1, 3));
        assert_eq!(Rational::new(1, -2).to_string(), "-1/2");
        assert_eq!(Rational::one().to_string(), "1/1");
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1/3".parse::<Rational>().unwrap(), Rational::new(1, 3));
        assert_eq!("1 / 3".parse::<Rational>().unwrap(), Rational::new(1, 3));
        assert_eq!("1".parse::<Rational>().unwrap(), Rational::one());
        assert!(matches!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        assert!("x/2".parse::<Rational>().is_err());
        assert!("0.5".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn arithmetic() {
        let third = Rational::new(1, 3);
        assert_eq!(third.complement(), Rational::new(2, 3));
        assert_eq!(&third + &third, Rational::new(2, 3));
        assert_eq!(&third * &Rational::new(3, 4), Rational::new(1, 4));
        assert_eq!(Rational::new(1, 2).abs_diff(&third), Rational::new(1, 6));
        assert!(third.is_probability());
        assert!(!Rational::new(5, 4).is_probability());
        assert!(!Rational::new(-1, 4).is_probability());
        let total: Rational = [Rational::new(1, 3), Rational::new(2, 3)].iter().sum();
        assert!(total.is_one());
    }

    #[test]
    fn serde_as_string() {
        let json = serde_json::to_string(&Rational::new(2, 4)).unwrap();
        assert_eq!(json, "\"1/2\"");
        let back: Rational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Rational::new(1, 2));
    }
}
