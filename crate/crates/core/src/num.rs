//! Exact rationals, extended thresholds and the two scalar backends.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number used by every polyhedral computation.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"3/4"`, `"-2"`, or a finite decimal such as `"0.125"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rat::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Scales a vector by a positive rational so that it becomes a primitive
/// integer vector. Zero vectors are returned unchanged.
pub fn primitive(v: &[Rat]) -> Vec<Rat> {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rat::from_integer(x / &g)).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// A value in ℚ ∪ {−∞, +∞}.
///
/// As a threshold `b` of the set `{u : w·u ≥ b}`, `PosInf` encodes the empty
/// set and `NegInf` the whole space. Addition follows Minkowski addition of
/// those sets, so `PosInf` absorbs everything, including `NegInf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRat {
    NegInf,
    Finite(Rat),
    PosInf,
}

impl ExtRat {
    pub fn zero() -> Self {
        ExtRat::Finite(Rat::zero())
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Finite(_))
    }

    pub fn scale(&self, k: &Rat) -> ExtRat {
        assert!(!k.is_negative(), "threshold scaling by a negative factor");
        match self {
            ExtRat::Finite(r) => ExtRat::Finite(r * k),
            _ if k.is_zero() => ExtRat::zero(),
            other => other.clone(),
        }
    }

    /// `self − other` as a signed gap; `+∞ − +∞` and `−∞ − −∞` are zero.
    pub fn gap(&self, other: &ExtRat) -> ExtRat {
        use ExtRat::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a - b),
            (PosInf, PosInf) | (NegInf, NegInf) => ExtRat::zero(),
            (PosInf, _) | (_, NegInf) => PosInf,
            (NegInf, _) | (_, PosInf) => NegInf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRat::NegInf => f64::NEG_INFINITY,
            ExtRat::PosInf => f64::INFINITY,
            ExtRat::Finite(r) => rat_to_f64(r),
        }
    }
}

impl Add for ExtRat {
    type Output = ExtRat;
    fn add(self, rhs: ExtRat) -> ExtRat {
        use ExtRat::*;
        match (self, rhs) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl Neg for ExtRat {
    type Output = ExtRat;
    fn neg(self) -> ExtRat {
        match self {
            ExtRat::NegInf => ExtRat::PosInf,
            ExtRat::PosInf => ExtRat::NegInf,
            ExtRat::Finite(r) => ExtRat::Finite(-r),
        }
    }
}

impl From<Rat> for ExtRat {
    fn from(r: Rat) -> Self {
        ExtRat::Finite(r)
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtRat::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::NegInf => f.write_str("-inf"),
            ExtRat::PosInf => f.write_str("+inf"),
            ExtRat::Finite(r) => f.write_str(&fmt_rat(r)),
        }
    }
}

impl Serialize for ExtRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "-inf" => Ok(ExtRat::NegInf),
            "+inf" | "inf" => Ok(ExtRat::PosInf),
            other => parse_rat(other).map(ExtRat::Finite).map_err(serde::de::Error::custom),
        }
    }
}

/// Scalar backend for node vectors: exact rationals or binary floats.
pub trait Scalar:
    Clone + fmt::Debug + PartialOrd + Send + Sync + 'static
{
    const BACKEND: Backend;
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn is_zero_value(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Scalar for Rat {
    const BACKEND: Backend = Backend::Exact;
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;
    fn zero_value() -> Self {
        0.0
    }
    fn one_value() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        value_to_rat(&v).map_err(serde::de::Error::custom)
    }

    pub fn value_to_rat(v: &serde_json::Value) -> Result<Rat> {
        match v {
            serde_json::Value::String(s) => parse_rat(s),
            serde_json::Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap())),
            other => Err(Error::Parse(format!("expected a rational string, got {other}"))),
        }
    }
}

/// Serde adapter for `Vec<Rat>`.
pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(fmt_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(serde_rat::value_to_rat)
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Vec<Rat>>`.
pub mod serde_rat_mat {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(fmt_rat).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rat>>, D::Error> {
        let v = Vec::<Vec<serde_json::Value>>::deserialize(d)?;
        v.iter()
            .map(|row| row.iter().map(serde_rat::value_to_rat).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)
    }
}
