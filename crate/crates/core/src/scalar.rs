//! Dual-mode scalars: exact rationals for construction and verification, `f64`
//! for integration and anything touched by a numeric root-find. The mode is a
//! property of the containing structure (a tableau is entirely rational or
//! entirely float), which is expressed by making those structures generic over
//! [`Scalar`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar, arbitrary precision.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarParseError {
    #[error("empty scalar token")]
    Empty,
    #[error("invalid {mode} scalar `{token}`")]
    Invalid { mode: &'static str, token: String },
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Numeric mode of a scalar type or a containing structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rational,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        })
    }
}

/// Field operations shared by `Rational` and `f64`.
///
/// Conversion to float is always available (exact rounding); the reverse
/// direction is deliberately absent.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// `num/den` with `den != 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn abs(&self) -> Self;
    /// Compares `|self|` with `|other|`.
    fn abs_cmp(&self, other: &Self) -> Ordering;
    fn to_f64(&self) -> f64;
    /// Exact square root when one exists in the field (always for nonnegative
    /// floats, perfect squares only for rationals).
    fn try_sqrt(&self) -> Option<Self>;
    fn parse(token: &str) -> Result<Self, ScalarParseError>;
    /// Token form used by the tableau file format.
    fn format(&self) -> String;

    fn exact() -> bool {
        Self::MODE == Mode::Rational
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        f64::abs(*self)
            .partial_cmp(&f64::abs(*other))
            .unwrap_or(Ordering::Equal)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn try_sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn parse(token: &str) -> Result<Self, ScalarParseError> {
        if token.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        // accept "p/q" in float files too; rational data read into float mode
        if let Some((n, d)) = token.split_once('/') {
            let n: f64 = n.parse().map_err(|_| ScalarParseError::Invalid {
                mode: "float",
                token: token.to_string(),
            })?;
            let d: f64 = d.parse().map_err(|_| ScalarParseError::Invalid {
                mode: "float",
                token: token.to_string(),
            })?;
            if d == 0.0 {
                return Err(ScalarParseError::ZeroDenominator(token.to_string()));
            }
            return Ok(n / d);
        }
        token.parse().map_err(|_| ScalarParseError::Invalid {
            mode: "float",
            token: token.to_string(),
        })
    }
    fn format(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as num_traits::One>::one()
    }
    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        Signed::abs(self).cmp(&Signed::abs(other))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn try_sqrt(&self) -> Option<Self> {
        if Signed::is_negative(self) {
            return None;
        }
        if Zero::is_zero(self) {
            return Some(<Rational as Zero>::zero());
        }
        let num = self.numer();
        let den = self.denom();
        let sn = Roots::sqrt(num);
        let sd = Roots::sqrt(den);
        (&sn * &sn == *num && &sd * &sd == *den).then(|| Rational::new(sn, sd))
    }
    fn parse(token: &str) -> Result<Self, ScalarParseError> {
        if token.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        let invalid = || ScalarParseError::Invalid {
            mode: "rational",
            token: token.to_string(),
        };
        match token.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.parse().map_err(|_| invalid())?;
                let d: BigInt = d.parse().map_err(|_| invalid())?;
                if d.is_zero() {
                    return Err(ScalarParseError::ZeroDenominator(token.to_string()));
                }
                Ok(Rational::new(n, d))
            }
            None => {
                let n: BigInt = token.parse().map_err(|_| invalid())?;
                Ok(Rational::from_integer(n))
            }
        }
    }
    fn format(&self) -> String {
        if self.denom() == &BigInt::from(1) {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Correctly scaled rational-to-float conversion; safe for numerators and
/// denominators far beyond the `f64` range.
fn rational_to_f64(r: &Rational) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // bring the quotient to ~80 significant bits, then divide and rescale
    let shift = 80 - (nb - db);
    let (q, exp2) = if shift >= 0 {
        ((num << shift as u64) / den, -shift)
    } else {
        (num / (den << (-shift) as u64), -shift)
    };
    let qf = q.to_f64().unwrap_or(f64::NAN);
    // scale in two steps so the factor itself cannot over/underflow
    let half = exp2 / 2;
    qf * (half as f64).exp2() * ((exp2 - half) as f64).exp2()
}

/// Shorthand for `S::from_ratio`.
pub fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    S::from_ratio(num, den)
}

/// Shorthand for `S::from_int`.
pub fn int<S: Scalar>(n: i64) -> S {
    S::from_int(n)
}
