//! Fixed-point currency with 0.01 resolution.
//!
//! All market balances, prices and fees are carried as integer cents so
//! conservation checks are exact sums with no float drift.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// An amount of market currency, stored as integer cents.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Currency(i64);

impl Currency {
    pub const ZERO: Currency = Currency(0);

    pub const fn from_cents(cents: i64) -> Self {
        Currency(cents)
    }

    /// Builds an amount from a major-unit value, rounding half away from zero
    /// to the nearest cent.
    pub fn from_major(value: f64) -> Self {
        Currency((value * 100.0).round() as i64)
    }

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn as_major(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Multiplies by a scalar, rounding half away from zero to the nearest cent.
    pub fn scale(self, factor: f64) -> Self {
        Currency((self.0 as f64 * factor).round() as i64)
    }

    /// Rounds to the nearest multiple of 5.00 (half rounds up).
    pub fn round_to_nearest_five(self) -> Self {
        Currency((self.0 as f64 / 500.0).round() as i64 * 500)
    }

    /// Midpoint of two amounts, rounded half away from zero to the cent.
    pub fn midpoint(a: Currency, b: Currency) -> Self {
        Currency(((a.0 + b.0) as f64 / 2.0).round() as i64)
    }

    pub fn min(self, other: Currency) -> Self {
        Currency(self.0.min(other.0))
    }

    pub fn max(self, other: Currency) -> Self {
        Currency(self.0.max(other.0))
    }

    /// Renders the amount the way offer prompts spell money: whole amounts
    /// without a decimal part ("12"), fractional ones trimmed ("12.5").
    pub fn to_text(self) -> String {
        if self.0 % 100 == 0 {
            format!("{}", self.0 / 100)
        } else {
            let mut s = format!("{:.2}", self.as_major());
            while s.ends_with('0') {
                s.pop();
            }
            s
        }
    }
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.abs();
        write!(f, "{}{}.{:02}", sign, abs / 100, abs % 100)
    }
}

impl Add for Currency {
    type Output = Currency;
    fn add(self, rhs: Currency) -> Currency {
        Currency(self.0 + rhs.0)
    }
}

impl Sub for Currency {
    type Output = Currency;
    fn sub(self, rhs: Currency) -> Currency {
        Currency(self.0 - rhs.0)
    }
}

impl AddAssign for Currency {
    fn add_assign(&mut self, rhs: Currency) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Currency {
    fn sub_assign(&mut self, rhs: Currency) {
        self.0 -= rhs.0;
    }
}

impl Neg for Currency {
    type Output = Currency;
    fn neg(self) -> Currency {
        Currency(-self.0)
    }
}

impl Sum for Currency {
    fn sum<I: Iterator<Item = Currency>>(iter: I) -> Currency {
        Currency(iter.map(|c| c.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_pads_cents() {
        assert_eq!(Currency::from_cents(1200).to_string(), "12.00");
        assert_eq!(Currency::from_cents(101).to_string(), "1.01");
        assert_eq!(Currency::from_cents(-250).to_string(), "-2.50");
        assert_eq!(Currency::ZERO.to_string(), "0.00");
    }

    #[test]
    fn text_trims_whole_amounts() {
        assert_eq!(Currency::from_cents(1200).to_text(), "12");
        assert_eq!(Currency::from_cents(1250).to_text(), "12.5");
        assert_eq!(Currency::from_cents(1234).to_text(), "12.34");
        assert_eq!(Currency::ZERO.to_text(), "0");
    }

    #[test]
    fn nearest_five_coarsening() {
        assert_eq!(
            Currency::from_major(8.0).round_to_nearest_five(),
            Currency::from_major(10.0)
        );
        assert_eq!(
            Currency::from_major(9.0).round_to_nearest_five(),
            Currency::from_major(10.0)
        );
        assert_eq!(
            Currency::from_major(2.49).round_to_nearest_five(),
            Currency::ZERO
        );
        assert_eq!(
            Currency::from_major(2.5).round_to_nearest_five(),
            Currency::from_major(5.0)
        );
    }

    #[test]
    fn scale_rounds_to_cent() {
        assert_eq!(
            Currency::from_major(10.0).scale(1.3),
            Currency::from_major(13.0)
        );
        assert_eq!(Currency::from_cents(333).scale(0.5), Currency::from_cents(167));
    }

    #[test]
    fn midpoint_rounds_half_up() {
        let a = Currency::from_cents(101);
        let b = Currency::from_cents(102);
        assert_eq!(Currency::midpoint(a, b), Currency::from_cents(102));
        assert_eq!(Currency::midpoint(a, a), a);
    }
}
