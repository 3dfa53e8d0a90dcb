//! Real numbers far outside the `f64` exponent range.
//!
//! Bounds such as `2^10000 / Vol` are formed exactly as big rationals and only
//! then rounded into a decimal mantissa/exponent pair, so relative precision
//! stays at `f64` level regardless of magnitude.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// `mantissa × 10^exponent` with `1 <= |mantissa| < 10`, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SciValue {
    mantissa: f64,
    exponent: i64,
}

const DIGITS: i64 = 17;

impl SciValue {
    pub const ZERO: SciValue = SciValue {
        mantissa: 0.0,
        exponent: 0,
    };

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 || !value.is_finite() {
            return SciValue {
                mantissa: value,
                exponent: 0,
            };
        }
        let exponent = value.abs().log10().floor() as i64;
        SciValue {
            mantissa: value / 10f64.powi(exponent as i32),
            exponent,
        }
        .normalized()
    }

    pub fn from_biguint(value: &BigUint) -> Self {
        Self::from_ratio(&BigRational::from_integer(BigInt::from(value.clone())))
    }

    /// Rounds an exact rational to 17 significant digits.
    pub fn from_ratio(value: &BigRational) -> Self {
        if value.is_zero() {
            return SciValue::ZERO;
        }
        let negative = value.is_negative();
        let num = value.numer().abs();
        let den = value.denom().abs();
        // Rough decimal exponent from bit lengths, corrected below.
        let approx = ((num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2).floor() as i64;
        let mut k = DIGITS - 1 - approx;
        let ten = BigInt::from(10u32);
        let lower = ten.pow((DIGITS - 1) as u32);
        let upper = ten.pow(DIGITS as u32);
        let scaled = loop {
            let scaled = if k >= 0 {
                (&num * ten.pow(k as u32)) / &den
            } else {
                &num / (&den * ten.pow((-k) as u32))
            };
            if scaled < lower {
                k += 1;
            } else if scaled >= upper {
                k -= 1;
            } else {
                break scaled;
            }
        };
        let digits: f64 = scaled.to_string().parse().unwrap_or(f64::NAN);
        let mantissa = digits / 10f64.powi((DIGITS - 1) as i32);
        SciValue {
            mantissa: if negative { -mantissa } else { mantissa },
            exponent: DIGITS - 1 - k,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mantissa == 0.0 || !self.mantissa.is_finite() {
            return self;
        }
        while self.mantissa.abs() >= 10.0 {
            self.mantissa /= 10.0;
            self.exponent += 1;
        }
        while self.mantissa.abs() < 1.0 {
            self.mantissa *= 10.0;
            self.exponent -= 1;
        }
        self
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Multiplies by an ordinary float.
    pub fn scale(self, factor: f64) -> Self {
        SciValue {
            mantissa: self.mantissa * factor,
            exponent: self.exponent,
        }
        .normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > 0.0
    }

    pub fn signum(&self) -> Sign {
        match self.mantissa.partial_cmp(&0.0) {
            Some(Ordering::Greater) => Sign::Plus,
            Some(Ordering::Less) => Sign::Minus,
            _ => Sign::NoSign,
        }
    }

    /// `log10 |x|`.
    pub fn log10_abs(&self) -> f64 {
        self.exponent as f64 + self.mantissa.abs().log10()
    }

    /// Nearest `f64`; infinite when out of range.
    pub fn to_f64(&self) -> f64 {
        if self.exponent > 308 {
            return self.mantissa.signum() * f64::INFINITY;
        }
        if self.exponent < -330 {
            return 0.0;
        }
        self.mantissa * 10f64.powi(self.exponent as i32)
    }

    /// `|a - b| / max(|a|, |b|)`, computed without leaving the mantissa range.
    pub fn relative_difference(&self, other: &SciValue) -> f64 {
        if self.is_zero() && other.is_zero() {
            return 0.0;
        }
        let top = self.exponent.max(other.exponent);
        let a = self.mantissa * 10f64.powi((self.exponent - top).max(-400) as i32);
        let b = other.mantissa * 10f64.powi((other.exponent - top).max(-400) as i32);
        (a - b).abs() / a.abs().max(b.abs())
    }

    /// Comparison by value.
    pub fn cmp_value(&self, other: &SciValue) -> Ordering {
        match (self.signum(), other.signum()) {
            (a, b) if a != b => sign_rank(a).cmp(&sign_rank(b)),
            (Sign::NoSign, _) => Ordering::Equal,
            (sign, _) => {
                let by_magnitude = self
                    .exponent
                    .cmp(&other.exponent)
                    .then(self.mantissa.abs().total_cmp(&other.mantissa.abs()));
                if sign == Sign::Minus {
                    by_magnitude.reverse()
                } else {
                    by_magnitude
                }
            }
        }
    }
}

fn sign_rank(sign: Sign) -> i8 {
    match sign {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl fmt::Display for SciValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        if !self.mantissa.is_finite() {
            return write!(f, "{}", self.mantissa);
        }
        if (-4..=12).contains(&self.exponent) {
            let value = self.to_f64();
            write!(f, "{}", format_significant(value, 12))
        } else {
            write!(f, "{:.11}e{}", self.mantissa, self.exponent)
        }
    }
}

fn format_significant(value: f64, digits: usize) -> String {
    let text = format!("{:.*e}", digits - 1, value);
    let parsed: f64 = text.parse().unwrap_or(value);
    format!("{parsed}")
}
