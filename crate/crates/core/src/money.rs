//! Fixed-point currency held as whole cents.
//!
//! Flows are computed in `f64` and rounded half away from zero when they are
//! booked, so every statement line and every identity works on exact integers.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units * 100)
    }

    /// Rounds to the nearest cent, ties away from zero. Non-finite input maps to zero.
    pub fn from_f64(value: f64) -> Self {
        if !value.is_finite() {
            return Money::ZERO;
        }
        Money(libm::round(value * 100.0) as i64)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn max(self, other: Money) -> Money {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Money) -> Money {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Applies a rate and rounds the result back to cents.
    pub fn scale(self, rate: f64) -> Money {
        Money::from_f64(self.to_f64() * rate)
    }

    /// `units × self`, exact.
    pub fn times_units(self, units: u64) -> Money {
        Money(self.0 * units as i64)
    }

    /// Renders with thousands separators, e.g. `-1,234,567.89`.
    pub fn grouped(self) -> Grouped {
        Grouped(self)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

pub struct Grouped(Money);

impl fmt::Display for Grouped {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cents = self.0 .0;
        let abs = cents.unsigned_abs();
        let whole = abs / 100;
        let mut digits = [0u8; 24];
        let mut len = 0;
        let mut rest = whole;
        loop {
            digits[len] = b'0' + (rest % 10) as u8;
            len += 1;
            rest /= 10;
            if rest == 0 {
                break;
            }
        }
        if cents < 0 {
            f.write_str("-")?;
        }
        for i in (0..len).rev() {
            write!(f, "{}", digits[i] as char)?;
            if i > 0 && i % 3 == 0 {
                f.write_str(",")?;
            }
        }
        write!(f, ".{:02}", abs % 100)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.copied().sum()
    }
}

// Serialized as a plain decimal number (`887257.76`). Shortest-roundtrip float
// printing of `cents / 100` parses back to the same cent count.
impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Ok(Money::from_f64(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(Money::from_f64(0.005).cents(), 1);
        assert_eq!(Money::from_f64(-0.005).cents(), -1);
        assert_eq!(Money::from_f64(1859.44).cents(), 185_944);
        assert_eq!(Money::from_f64(f64::NAN), Money::ZERO);
    }

    #[test]
    fn tax_on_year0_january_profit() {
        assert_eq!(Money::from_f64(9297.20).scale(0.2), Money::from_cents(185_944));
    }

    #[test]
    fn display_and_grouping() {
        assert_eq!(Money::from_cents(-11_374_224).to_string(), "-113742.24");
        assert_eq!(Money::from_cents(295_937_776).grouped().to_string(), "2,959,377.76");
        assert_eq!(Money::from_cents(-5).grouped().to_string(), "-0.05");
        assert_eq!(Money::from_cents(100_000).grouped().to_string(), "1,000.00");
    }

    #[test]
    fn json_roundtrip() {
        let m = Money::from_cents(88_725_776);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, "887257.76");
        let back: Money = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    proptest::proptest! {
        #[test]
        fn json_roundtrip_any(cents in -1_000_000_000_000i64..1_000_000_000_000i64) {
            let m = Money::from_cents(cents);
            let back: Money = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, m);
        }
    }
}
