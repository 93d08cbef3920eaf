//! Exact decimal numbers: an integer mantissa with a base-ten scale.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// `mantissa * 10^-scale`, with a sign. Trailing fraction zeros are
/// significant, so `5.20` and `5.2` are different values here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    negative: bool,
    mantissa: u128,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("invalid decimal literal {0:?}")]
    Invalid(String),
    #[error("decimal literal {0:?} overflows 128 bits")]
    Overflow(String),
}

impl Decimal {
    pub const ZERO: Decimal = Decimal {
        negative: false,
        mantissa: 0,
        scale: 0,
    };

    pub fn new(negative: bool, mantissa: u128, scale: u32) -> Decimal {
        Decimal {
            negative: negative && mantissa != 0,
            mantissa,
            scale,
        }
    }

    pub fn from_int(value: u128) -> Decimal {
        Decimal::new(false, value, 0)
    }

    /// Builds `int.frac` from an integer part and a string of fraction digits.
    pub fn from_parts(int: u128, frac_digits: &str) -> Option<Decimal> {
        if !frac_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = frac_digits.len() as u32;
        let mut mantissa = int.checked_mul(10u128.checked_pow(scale)?)?;
        if !frac_digits.is_empty() {
            mantissa = mantissa.checked_add(frac_digits.parse::<u128>().ok()?)?;
        }
        Some(Decimal::new(false, mantissa, scale))
    }

    pub fn negate(self) -> Decimal {
        Decimal::new(!self.negative, self.mantissa, self.scale)
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_integer(&self) -> bool {
        self.scale == 0
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn mantissa(&self) -> u128 {
        self.mantissa
    }

    /// Magnitude of the integer part.
    pub fn integer_part(&self) -> u128 {
        self.mantissa / 10u128.pow(self.scale)
    }

    /// Fraction digits, zero-padded to the scale (`"84"` for `3649.84`).
    pub fn fraction_digits(&self) -> String {
        if self.scale == 0 {
            return String::new();
        }
        let frac = self.mantissa % 10u128.pow(self.scale);
        format!("{:0width$}", frac, width = self.scale as usize)
    }

    /// The value as a non-negative integer, if it is one.
    pub fn as_u128(&self) -> Option<u128> {
        (self.is_integer() && !self.negative).then_some(self.mantissa)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        write!(f, "{}", self.integer_part())?;
        if self.scale > 0 {
            write!(f, ".{}", self.fraction_digits())?;
        }
        Ok(())
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Decimal, DecimalError> {
        let invalid = || DecimalError::Invalid(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) if !f.is_empty() => (i, f),
            Some(_) => return Err(invalid()),
            None => (body, ""),
        };
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let int: u128 = int.parse().map_err(|_| DecimalError::Overflow(s.to_string()))?;
        let d = Decimal::from_parts(int, frac).ok_or_else(|| {
            if frac.bytes().all(|b| b.is_ascii_digit()) {
                DecimalError::Overflow(s.to_string())
            } else {
                invalid()
            }
        })?;
        Ok(if negative { d.negate() } else { d })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_exactly() {
        let d: Decimal = "3649.84".parse().unwrap();
        assert_eq!(d.to_string(), "3649.84");
        assert_eq!(d.integer_part(), 3649);
        assert_eq!(d.fraction_digits(), "84");
        assert_eq!("0.05".parse::<Decimal>().unwrap().to_string(), "0.05");
        assert_eq!("5.20".parse::<Decimal>().unwrap().to_string(), "5.20");
        assert_eq!("-0".parse::<Decimal>().unwrap(), Decimal::ZERO);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", ".5", "5.", "1.2.3", "a", "-", "1e5"] {
            assert!(bad.parse::<Decimal>().is_err(), "{bad}");
        }
        assert!(matches!(
            "1".repeat(50).parse::<Decimal>(),
            Err(DecimalError::Overflow(_))
        ));
    }

    proptest! {
        #[test]
        fn string_round_trip(neg in any::<bool>(), int in 0u64.., frac in "[0-9]{0,6}") {
            let lit = if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") };
            let lit = if neg && (int != 0 || frac.bytes().any(|b| b != b'0')) { format!("-{lit}") } else { lit };
            let d: Decimal = lit.parse().unwrap();
            prop_assert_eq!(d.to_string(), lit);
        }
    }
}
