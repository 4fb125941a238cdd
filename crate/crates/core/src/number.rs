//! Exact dates and latencies.
//!
//! Dates live in the nonnegative rationals extended with `+inf`. Every
//! comparison the race policy makes is exact, so no floating point is used.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, Signed};
use thiserror::Error;

pub type Rational = Rational64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("number `{0}` is out of range")]
    OutOfRange(String),
    #[error("negative date or latency `{0}`")]
    Negative(String),
}

/// A nonnegative exact rational or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtDate {
    Finite(Rational),
    Infinite,
}

impl ExtDate {
    pub const ZERO: ExtDate = ExtDate::Finite(Rational::new_raw(0, 1));

    pub fn int(n: i64) -> Self {
        assert!(n >= 0, "dates are nonnegative");
        ExtDate::Finite(Rational::from_integer(n))
    }

    pub fn from_rational(r: Rational) -> Result<Self, NumberError> {
        if r.is_negative() {
            Err(NumberError::Negative(format_rational(&r)))
        } else {
            Ok(ExtDate::Finite(r))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtDate::Finite(_))
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            ExtDate::Finite(r) => Some(*r),
            ExtDate::Infinite => None,
        }
    }

    /// Max-plus addition; `x + inf = inf`.
    pub fn plus(self, other: ExtDate) -> ExtDate {
        match (self, other) {
            (ExtDate::Finite(a), ExtDate::Finite(b)) => {
                ExtDate::Finite(a.checked_add(&b).expect("rational date overflow"))
            }
            _ => ExtDate::Infinite,
        }
    }

    pub fn plus_int(self, n: i64) -> ExtDate {
        self.plus(ExtDate::int(n))
    }
}

impl Ord for ExtDate {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtDate::Finite(a), ExtDate::Finite(b)) => a.cmp(b),
            (ExtDate::Finite(_), ExtDate::Infinite) => Ordering::Less,
            (ExtDate::Infinite, ExtDate::Finite(_)) => Ordering::Greater,
            (ExtDate::Infinite, ExtDate::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtDate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for ExtDate {
    fn default() -> Self {
        ExtDate::ZERO
    }
}

impl fmt::Display for ExtDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtDate::Finite(r) => f.write_str(&format_rational(r)),
            ExtDate::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtDate {
    type Err = NumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "+inf" {
            return Ok(ExtDate::Infinite);
        }
        ExtDate::from_rational(parse_rational(t)?)
    }
}

/// Dates serialize as strings (`"2"`, `"1.5"`, `"1/3"`, `"inf"`); plain
/// JSON integers are accepted on input.
impl serde::Serialize for ExtDate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ExtDate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = ExtDate;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal string, \"p/q\", \"inf\" or a nonnegative integer")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<ExtDate, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<ExtDate, E> {
                i64::try_from(v).map(ExtDate::int).map_err(|_| E::custom(NumberError::OutOfRange(v.to_string())))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<ExtDate, E> {
                if v < 0 {
                    Err(E::custom(NumberError::Negative(v.to_string())))
                } else {
                    Ok(ExtDate::int(v))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Parses `"3"`, `"-2"`, `"1.25"` or `"7/3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, NumberError> {
    let s = s.trim();
    let malformed = || NumberError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_int(num.trim(), s)?;
        let d = parse_int(den.trim(), s)?;
        if d == 0 {
            return Err(malformed());
        }
        return Ok(Rational::new(n, d));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = parse_int(&digits, s)?;
    let denom = 10i64
        .checked_pow(frac_part.len() as u32)
        .ok_or_else(|| NumberError::OutOfRange(s.to_string()))?;
    let r = Rational::new(numer, denom);
    Ok(if negative { -r } else { r })
}

fn parse_int(digits: &str, whole: &str) -> Result<i64, NumberError> {
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
        return Err(NumberError::Malformed(whole.to_string()));
    }
    digits
        .parse::<i64>()
        .map_err(|_| NumberError::OutOfRange(whole.to_string()))
}

/// Terminating decimals print as decimals, everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scale = match 10i128.checked_pow(places) {
        Some(s) => s,
        None => return format!("{}/{}", r.numer(), r.denom()),
    };
    let scaled = (*r.numer() as i128) * scale / (*r.denom() as i128);
    let negative = scaled < 0;
    let abs = scaled.unsigned_abs().to_string();
    let width = places as usize + 1;
    let padded = format!("{abs:0>width$}");
    let (i, f) = padded.split_at(padded.len() - places as usize);
    format!("{}{}.{}", if negative { "-" } else { "" }, i, f)
}
