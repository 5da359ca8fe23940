//! Scalars: exact rationals and binary64 floats behind one `Field` trait,
//! plus a mode-tagged `Scalar` for values whose mode is only known at runtime.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number, always reduced with a positive denominator.
pub type Q = BigRational;

/// The scalar field the matrix routines are generic over.
///
/// The mode tag of a value is its type: `Q` is EXACT, `f64` is FLOAT.
pub trait Field:
    Clone + fmt::Debug + PartialEq + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test. Exact values ignore `tol`; floats compare `|x| <= tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    fn into_scalar(self) -> Scalar;
}

impl Field for Q {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Float(self)
    }
}

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(v: &Q) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"-1.25"` or `"3e-2"`
/// into an exact rational. Decimals are read digit for digit, never through f64.
pub fn parse_rational(text: &str) -> Result<Q> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Q::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Exact square root of a non-negative rational, when it is itself rational.
pub fn rational_sqrt(v: &Q) -> Option<Q> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    if &(&n * &n) == v.numer() && &(&d * &d) == v.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Best rational approximation of `x` with denominator at most `max_denom`,
/// by continued-fraction convergents.
pub fn rationalize(x: f64, max_denom: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = x;
    let bound = BigInt::from(max_denom);
    for _ in 0..64 {
        let a = rest.floor();
        let ai = BigInt::from_f64(a)?;
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2 > bound {
            break;
        }
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
        if !rest.is_finite() {
            break;
        }
    }
    if k1.is_zero() {
        None
    } else {
        Some(Q::new(h1, k1))
    }
}

/// Sign as -1, 0 or +1.
pub fn sign_of<T: Field>(v: &T) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// A scalar whose mode is a runtime tag, used at document and report boundaries.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Float(f64),
}

impl Scalar {
    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(v) => Field::to_f64(v),
            Scalar::Float(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            Scalar::Exact(v) => Some(v),
            Scalar::Float(_) => None,
        }
    }

    /// Explicit EXACT → FLOAT conversion.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    fn zip_with(
        &self,
        other: &Scalar,
        exact: impl FnOnce(&Q, &Q) -> Option<Q>,
        float: impl FnOnce(f64, f64) -> f64,
    ) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact(a, b).map(Scalar::Exact).ok_or(Error::SingularMatrix)
            }
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(float(*a, *b))),
            _ => Err(Error::ModeMismatch),
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.zip_with(other, |a, b| Some(a + b), |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.zip_with(other, |a, b| Some(a - b), |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.zip_with(other, |a, b| Some(a * b), |a, b| a * b)
    }

    /// Division; an exact division by zero reports `SingularMatrix`.
    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        self.zip_with(
            other,
            |a, b| if b.is_zero() { None } else { Some(a / b) },
            |a, b| a / b,
        )
    }
}

impl From<Q> for Scalar {
    fn from(v: Q) -> Self {
        Scalar::Exact(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(v) => f.write_str(&format_rational(v)),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}

/// JSON form of a scalar: exact values are strings (`"5/3"`), floats are numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(serde_json::Number),
}

impl Entry {
    pub fn to_scalar(&self) -> Result<Scalar> {
        match self {
            Entry::Text(s) => parse_rational(s).map(Scalar::Exact),
            Entry::Number(n) => n
                .as_f64()
                .map(Scalar::Float)
                .ok_or_else(|| Error::Parse(format!("number out of range: {n}"))),
        }
    }

    /// Reads the entry as an exact rational. Numbers are converted from their
    /// decimal text, so `0.1` becomes `1/10`.
    pub fn to_exact(&self) -> Result<Q> {
        match self {
            Entry::Text(s) => parse_rational(s),
            Entry::Number(n) => parse_rational(&n.to_string()),
        }
    }

    pub fn to_float(&self) -> Result<f64> {
        self.to_scalar().map(|s| s.to_f64())
    }
}

impl From<&Scalar> for Entry {
    fn from(s: &Scalar) -> Self {
        match s {
            Scalar::Exact(v) => Entry::Text(format_rational(v)),
            Scalar::Float(v) => float_entry(*v),
        }
    }
}

pub fn float_entry(v: f64) -> Entry {
    serde_json::Number::from_f64(v)
        .map(Entry::Number)
        .unwrap_or_else(|| Entry::Text(format!("{v}")))
}
