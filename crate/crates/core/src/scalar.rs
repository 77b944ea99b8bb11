//! Scalar abstraction shared by the sequence, window and surrogate code.
//!
//! Everything that only needs field operations and `floor` is written against
//! [`Scalar`], so the same code runs on `f32`, `f64` and exact rationals.
//! Exact rationals turn identities that hold only up to rounding in floating
//! point (affine equivariance, window splitting, linearity of surrogates) into
//! identities that can be checked with `==`.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::float::FloatCore;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = Ratio<i128>;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `num / den`; `den` must be positive.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_u64(value: u64) -> Self;

    /// Conversion from `f64`. Exact for rationals whenever the binary value
    /// fits the representation.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn floor(&self) -> Self;

    /// `⌊self⌋` as an unsigned integer, saturating at zero.
    fn floor_u64(&self) -> u64 {
        let f = self.floor();
        if f <= Self::zero() {
            0
        } else {
            f.to_f64() as u64
        }
    }

    /// `⌈self⌉` as an unsigned integer, saturating at zero.
    fn ceil_u64(&self) -> u64 {
        let neg = -self.clone();
        let c = -neg.floor();
        if c <= Self::zero() {
            0
        } else {
            c.to_f64() as u64
        }
    }

    /// Parses a decimal literal, or `p/q`.
    fn parse_num(text: &str) -> Option<Self>;
}

pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_of<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

fn split_fraction(text: &str) -> Option<(&str, &str)> {
    let mut parts = text.splitn(2, '/');
    let num = parts.next()?;
    let den = parts.next()?;
    Some((num.trim(), den.trim()))
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(num: i64, den: i64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn from_u64(value: u64) -> Self {
                value as $t
            }

            fn from_f64(value: f64) -> Self {
                value as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn floor(&self) -> Self {
                <$t>::floor(*self)
            }

            fn floor_u64(&self) -> u64 {
                if *self <= 0.0 {
                    0
                } else {
                    <$t>::floor(*self) as u64
                }
            }

            fn ceil_u64(&self) -> u64 {
                if *self <= 0.0 {
                    0
                } else {
                    <$t>::ceil(*self) as u64
                }
            }

            fn parse_num(text: &str) -> Option<Self> {
                if let Some((num, den)) = split_fraction(text) {
                    let n: $t = num.parse().ok()?;
                    let d: $t = den.parse().ok()?;
                    if d == 0.0 {
                        return None;
                    }
                    let v = n / d;
                    return v.is_finite().then_some(v);
                }
                let v: $t = text.parse().ok()?;
                v.is_finite().then_some(v)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

fn pow10(exp: u32) -> Option<i128> {
    10i128.checked_pow(exp)
}

/// Exact decimal parser: `[+-]digits[.digits][(e|E)[+-]digits]`.
fn parse_decimal_exact(text: &str) -> Option<Rational> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        digits = digits.checked_mul(10)?.checked_add(i128::from(b - b'0'))?;
    }
    let scale = exponent - frac_part.len() as i32;
    let value = if scale >= 0 {
        Rational::from_integer(digits.checked_mul(pow10(scale as u32)?)?)
    } else {
        Rational::new(digits, pow10(scale.unsigned_abs())?)
    };
    Some(if negative { -value } else { value })
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(i128::from(num), i128::from(den))
    }

    fn from_u64(value: u64) -> Self {
        Rational::from_integer(i128::from(value))
    }

    fn from_f64(value: f64) -> Self {
        assert!(value.is_finite(), "non-finite value {value} has no rational form");
        let (mantissa, exponent, sign) = FloatCore::integer_decode(value);
        let m = i128::from(mantissa) * i128::from(sign);
        if mantissa == 0 {
            return Rational::zero();
        }
        if exponent >= 0 {
            if exponent <= 60 {
                return Rational::from_integer(m << exponent);
            }
        } else if exponent >= -120 {
            return Rational::new(m, 1i128 << (-exponent));
        }
        Rational::approximate_float(value).unwrap_or_else(Rational::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            *self.numer() as f64 / *self.denom() as f64
        })
    }

    fn floor(&self) -> Self {
        Ratio::floor(self)
    }

    fn floor_u64(&self) -> u64 {
        let f = Ratio::floor(self).to_integer();
        if f <= 0 {
            0
        } else {
            u64::try_from(f).unwrap_or(u64::MAX)
        }
    }

    fn ceil_u64(&self) -> u64 {
        let c = Ratio::ceil(self).to_integer();
        if c <= 0 {
            0
        } else {
            u64::try_from(c).unwrap_or(u64::MAX)
        }
    }

    fn parse_num(text: &str) -> Option<Self> {
        if let Some((num, den)) = split_fraction(text) {
            let n = parse_decimal_exact(num)?;
            let d = parse_decimal_exact(den)?;
            if d.is_zero() {
                return None;
            }
            return Some(n / d);
        }
        parse_decimal_exact(text)
    }
}

/// `1 − 2^{−k}` in the requested scalar.
pub fn theta_of<S: Scalar>(k: u32) -> S {
    assert!((1..=62).contains(&k), "theta index {k} out of range 1..=62");
    let den = 1i64 << k;
    S::from_ratio(den - 1, den)
}
