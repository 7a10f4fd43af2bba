//! Exact rational lengths.
//!
//! Every distance in this crate is an exact rational backed by `i128`
//! numerator and denominator. Arithmetic is checked: an overflow aborts with
//! a panic instead of silently producing a wrong distance, since a wrong
//! distance would invalidate every non-contraction certificate downstream.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number used for edge lengths, distances and ratios.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Length(Ratio<i128>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseLengthError {
    #[error("empty length string")]
    Empty,
    #[error("invalid integer `{0}` in length")]
    BadInteger(String),
    #[error("zero denominator in length `{0}`")]
    ZeroDenominator(String),
}

const OVERFLOW: &str = "exact length arithmetic overflowed i128";

impl Length {
    pub const ZERO: Length = Length(Ratio::new_raw(0, 1));
    pub const ONE: Length = Length(Ratio::new_raw(1, 1));

    /// Builds `numer / denom` in lowest terms. Panics on a zero denominator.
    pub fn new(numer: i128, denom: i128) -> Self {
        assert!(denom != 0, "zero denominator");
        Length(Ratio::new(numer, denom))
    }

    pub fn from_integer(n: i128) -> Self {
        Length(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        *self.0.numer() < 0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn ratio(&self) -> Ratio<i128> {
        self.0
    }

    /// Smallest integer not below this value.
    pub fn ceil(&self) -> i128 {
        *self.0.ceil().numer()
    }

    pub fn floor(&self) -> i128 {
        *self.0.floor().numer()
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        self.0.checked_add(&other.0).map(Length)
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        self.0.checked_mul(&other.0).map(Length)
    }
}

impl From<i128> for Length {
    fn from(n: i128) -> Self {
        Length::from_integer(n)
    }
}

impl From<Ratio<i128>> for Length {
    fn from(r: Ratio<i128>) -> Self {
        Length(r)
    }
}

impl Add for Length {
    type Output = Length;
    fn add(self, rhs: Length) -> Length {
        Length(self.0.checked_add(&rhs.0).expect(OVERFLOW))
    }
}

impl Sub for Length {
    type Output = Length;
    fn sub(self, rhs: Length) -> Length {
        Length(self.0.checked_sub(&rhs.0).expect(OVERFLOW))
    }
}

impl Mul for Length {
    type Output = Length;
    fn mul(self, rhs: Length) -> Length {
        Length(self.0.checked_mul(&rhs.0).expect(OVERFLOW))
    }
}

impl Div for Length {
    type Output = Length;
    fn div(self, rhs: Length) -> Length {
        assert!(!rhs.is_zero(), "division of a length by zero");
        Length(self.0.checked_div(&rhs.0).expect(OVERFLOW))
    }
}

impl Sum for Length {
    fn sum<I: Iterator<Item = Length>>(iter: I) -> Length {
        iter.fold(Length::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Length> for Length {
    fn sum<I: Iterator<Item = &'a Length>>(iter: I) -> Length {
        iter.fold(Length::ZERO, |acc, x| acc + *x)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, whole: &str) -> Result<i128, ParseLengthError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseLengthError::BadInteger(whole.to_string()));
    }
    s.parse::<i128>()
        .map_err(|_| ParseLengthError::BadInteger(whole.to_string()))
}

impl FromStr for Length {
    type Err = ParseLengthError;

    /// Accepts `"n"` or `"n/d"` with decimal integers; a leading `-` is
    /// accepted on the numerator so callers can report negative lengths
    /// precisely.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseLengthError::Empty);
        }
        match t.split_once('/') {
            None => Ok(Length::from_integer(parse_int(t, s)?)),
            Some((n, d)) => {
                let n = parse_int(n.trim(), s)?;
                let d = d.trim();
                if d.starts_with('-') {
                    return Err(ParseLengthError::BadInteger(s.to_string()));
                }
                let d = parse_int(d, s)?;
                if d == 0 {
                    return Err(ParseLengthError::ZeroDenominator(s.to_string()));
                }
                Ok(Length::new(n, d))
            }
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct LengthVisitor;

impl<'de> Visitor<'de> for LengthVisitor {
    type Value = Length;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a rational string \"num/den\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Length, E> {
        Ok(Length::from_integer(v as i128))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Length, E> {
        Ok(Length::from_integer(v as i128))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Length, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Length, D::Error> {
        deserializer.deserialize_any(LengthVisitor)
    }
}

/// A shortest-path distance: finite, or infinite across components.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite(Length),
    Infinite,
}

impl Distance {
    pub fn finite(&self) -> Option<Length> {
        match self {
            Distance::Finite(l) => Some(*l),
            Distance::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Distance::Finite(_))
    }
}

impl From<Length> for Distance {
    fn from(l: Length) -> Self {
        Distance::Finite(l)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => a.cmp(b),
            (Distance::Finite(_), Distance::Infinite) => Ordering::Less,
            (Distance::Infinite, Distance::Finite(_)) => Ordering::Greater,
            (Distance::Infinite, Distance::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Distance {
    type Output = Distance;
    fn add(self, rhs: Distance) -> Distance {
        match (self, rhs) {
            (Distance::Finite(a), Distance::Finite(b)) => Distance::Finite(a + b),
            _ => Distance::Infinite,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(l) => write!(f, "{l}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!("3".parse::<Length>().unwrap(), Length::from_integer(3));
        assert_eq!("6/4".parse::<Length>().unwrap(), Length::new(3, 2));
        assert_eq!(" 1 / 3 ".parse::<Length>().unwrap(), Length::new(1, 3));
        assert!("-2".parse::<Length>().unwrap().is_negative());
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!("".parse::<Length>(), Err(ParseLengthError::Empty));
        assert!(matches!("1/0".parse::<Length>(), Err(ParseLengthError::ZeroDenominator(_))));
        assert!("1/-2".parse::<Length>().is_err());
        assert!("1.5".parse::<Length>().is_err());
        assert!("+1".parse::<Length>().is_err());
        assert!("1/2/3".parse::<Length>().is_err());
        assert!("99999999999999999999999999999999999999999".parse::<Length>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "7", "1/3", "-5/2"] {
            assert_eq!(s.parse::<Length>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn json_accepts_integer_shorthand() {
        let v: Vec<Length> = serde_json::from_str(r#"[2, "1/2", "4/2"]"#).unwrap();
        assert_eq!(v, vec![Length::from_integer(2), Length::new(1, 2), Length::from_integer(2)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["2","1/2","2"]"#);
    }

    #[test]
    fn infinity_dominates() {
        let one = Distance::Finite(Length::ONE);
        assert!(one < Distance::Infinite);
        assert_eq!(one + Distance::Infinite, Distance::Infinite);
        assert_eq!(one + one, Distance::Finite(Length::from_integer(2)));
    }

    #[test]
    #[should_panic(expected = "overflowed")]
    fn overflow_is_loud() {
        let big = Length::from_integer(i128::MAX);
        let _ = big + Length::ONE;
    }
}
