//! Scalar abstraction over the two numeric modes (exact rationals and `f64`)
//! and conversions between them.
//!
//! Conversions are always explicit: nothing in this crate turns a float into
//! a rational behind the caller's back.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Tolerance on the total mass of a floating-point pmf.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_rational(r: &Rational) -> Self;

    /// Whether `total` counts as unit mass in this numeric mode.
    fn is_unit_mass(total: &Self) -> bool;

    /// Square root when it is representable in this mode.
    fn sqrt_exact(&self) -> Option<Self>;

    fn from_usize(n: usize) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn is_unit_mass(total: &Self) -> bool {
        (total - 1.0).abs() <= FLOAT_MASS_TOL
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn is_unit_mass(total: &Self) -> bool {
        total.is_one()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }

    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Very large numerators/denominators: scale through the bit lengths.
        let shift = r.numer().bits().max(r.denom().bits()) as i64 - 1000;
        let (n, d) = if shift > 0 {
            (r.numer() >> shift as usize, r.denom() >> shift as usize)
        } else {
            (r.numer().clone(), r.denom().clone())
        };
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-1/4"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = || Error::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty()
        || !whole
            .bytes()
            .chain(frac.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let all: BigInt = format!("{whole}{frac}0")
        .parse::<BigInt>()
        .map_err(|_| err())?
        / 10;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact rational equal to the shortest decimal rendering of `x`
/// (so `0.1_f64` becomes exactly 1/10).
pub fn rationalize(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot rationalize {x}")));
    }
    parse_rational(&format!("{x:e}"))
}

/// Rounds `x` half away from zero to `digits` decimal places, as an exact rational.
pub fn round_to_digits(x: f64, digits: u32) -> Result<Rational> {
    if digits > 15 {
        return Err(Error::Domain(format!(
            "at most 15 rounding digits supported, got {digits}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot round {x}")));
    }
    let scale = 10_i64.pow(digits);
    let scaled = (x * scale as f64).round();
    Ok(Rational::new(
        BigInt::from(scaled as i64),
        BigInt::from(scale),
    ))
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
