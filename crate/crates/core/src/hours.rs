//! Exact rational quantities: activity durations in hours and filter fractions.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Parse a plain decimal (`"12"`, `"-0.375"`, `"3."`) or a fraction (`"7/2"`) exactly.
pub fn parse_rational(text: &str) -> Option<Ratio<i64>> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(Ratio::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    // 18 digits keeps 10^k inside i64
    if frac_part.len() > 18 {
        return None;
    }
    let int_value: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let scale = 10i64.checked_pow(frac_part.len() as u32)?;
    let frac_value: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let numer = int_value.checked_mul(scale)?.checked_add(frac_value)?;
    let value = Ratio::new(numer, scale);
    Some(if negative { -value } else { value })
}

/// Parse `f64` through its shortest round-trip decimal form, so `0.45` means exactly 45/100.
pub fn rational_from_f64(value: f64) -> Option<Ratio<i64>> {
    if !value.is_finite() {
        return None;
    }
    let text = format!("{value}");
    if text.contains('e') || text.contains('E') {
        return Ratio::<i64>::approximate_float(value);
    }
    parse_rational(&text)
}

fn write_rational(f: &mut fmt::Formatter<'_>, value: &Ratio<i64>) -> fmt::Result {
    let mut den = *value.denom();
    let mut scale_digits = 0u32;
    while den % 10 == 0 {
        den /= 10;
        scale_digits += 1;
    }
    let mut twos = 0u32;
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    let mut fives = 0u32;
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return write!(f, "{}/{}", value.numer(), value.denom());
    }
    let digits = scale_digits + twos.max(fives);
    if digits == 0 {
        return write!(f, "{}", value.numer());
    }
    let scale = 10i128.pow(digits);
    let scaled = *value.numer() as i128 * scale / *value.denom() as i128;
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int_part = abs / scale as u128;
    let frac_part = abs % scale as u128;
    let frac = format!("{:0width$}", frac_part, width = digits as usize);
    write!(f, "{sign}{int_part}.{}", frac.trim_end_matches('0'))
}

/// A duration in hours, held as an exact rational.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hours(Ratio<i64>);

impl Hours {
    pub const ZERO: Hours = Hours(Ratio::new_raw(0, 1));

    pub fn new(numer: i64, denom: i64) -> Self {
        Hours(Ratio::new(numer, denom))
    }

    pub fn from_integer(hours: i64) -> Self {
        Hours(Ratio::from_integer(hours))
    }

    pub fn from_minutes(minutes: i64) -> Self {
        Hours(Ratio::new(minutes, 60))
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_negative(self) -> bool {
        self.0 < Ratio::zero()
    }

    /// Accepts clock style `H:MM` (`"3:30"` is 3.5 h), decimal hours, or `p/q`.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((h, m)) = text.split_once(':') {
            let negative = h.trim_start().starts_with('-');
            let hours: i64 = h.trim().trim_start_matches('-').parse().ok()?;
            if m.len() != 2 || !m.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            let minutes: i64 = m.parse().ok()?;
            if minutes >= 60 {
                return None;
            }
            let total = Ratio::from_integer(hours) + Ratio::new(minutes, 60);
            return Some(Hours(if negative { -total } else { total }));
        }
        parse_rational(text).map(Hours)
    }

    pub fn max(self, other: Hours) -> Hours {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<Ratio<i64>> for Hours {
    fn from(value: Ratio<i64>) -> Self {
        Hours(value)
    }
}

impl fmt::Display for Hours {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(f, &self.0)
    }
}

impl FromStr for Hours {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hours::parse(s).ok_or_else(|| format!("invalid duration `{s}`"))
    }
}

impl Add for Hours {
    type Output = Hours;
    fn add(self, rhs: Hours) -> Hours {
        Hours(self.0 + rhs.0)
    }
}

impl AddAssign for Hours {
    fn add_assign(&mut self, rhs: Hours) {
        self.0 += rhs.0;
    }
}

impl Sub for Hours {
    type Output = Hours;
    fn sub(self, rhs: Hours) -> Hours {
        Hours(self.0 - rhs.0)
    }
}

impl Mul<i64> for Hours {
    type Output = Hours;
    fn mul(self, rhs: i64) -> Hours {
        Hours(self.0 * rhs)
    }
}

impl Div<i64> for Hours {
    type Output = Hours;
    fn div(self, rhs: i64) -> Hours {
        Hours(self.0 / rhs)
    }
}

impl Sum for Hours {
    fn sum<I: Iterator<Item = Hours>>(iter: I) -> Hours {
        iter.fold(Hours::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Hours> for Hours {
    fn sum<I: Iterator<Item = &'a Hours>>(iter: I) -> Hours {
        iter.copied().sum()
    }
}

impl Serialize for Hours {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Hours {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => {
                rational_from_f64(v).map(Hours).ok_or_else(|| serde::de::Error::custom(format!("invalid duration {v}")))
            }
            Repr::Text(s) => {
                Hours::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid duration `{s}`")))
            }
        }
    }
}

/// A fraction in `[0, 1]`, such as the flow-frequency filter threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<i64>);

impl Fraction {
    pub const ZERO: Fraction = Fraction(Ratio::new_raw(0, 1));

    pub fn new(value: Ratio<i64>) -> Option<Self> {
        if value < Ratio::zero() || value > Ratio::from_integer(1) {
            None
        } else {
            Some(Fraction(value))
        }
    }

    pub fn from_f64(value: f64) -> Option<Self> {
        rational_from_f64(value).and_then(Fraction::new)
    }

    pub fn parse(text: &str) -> Option<Self> {
        parse_rational(text).and_then(Fraction::new)
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// `count / total < self`, evaluated exactly.
    pub fn exceeds_share(self, count: u64, total: u64) -> bool {
        // count * den < num * total, in i128
        let lhs = count as i128 * *self.0.denom() as i128;
        let rhs = *self.0.numer() as i128 * total as i128;
        lhs < rhs
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(f, &self.0)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}
