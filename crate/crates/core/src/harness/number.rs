use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;

/// A command-line number: the double value, plus the exact rational when
/// the literal has one (`"1/2"`, `"0.25"`, `"3e2"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number {
    value: f64,
    exact: Option<Rational64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNumberError(String);

impl fmt::Display for ParseNumberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}' is not a decimal or rational number", self.0)
    }
}

impl std::error::Error for ParseNumberError {}

impl Number {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Rational64> {
        self.exact
    }

    pub fn from_rational(r: Rational64) -> Self {
        Self {
            value: to_f64(r),
            exact: Some(r),
        }
    }

    pub fn from_f64(value: f64) -> Self {
        Self { value, exact: None }
    }

    /// Exact comparison with `n/d` when possible, otherwise compares doubles.
    pub fn equals(&self, n: i64, d: i64) -> bool {
        match self.exact {
            Some(r) => r == Rational64::new(n, d),
            None => self.value == n as f64 / d as f64,
        }
    }
}

pub(crate) fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Number {
    type Err = ParseNumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ParseNumberError(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Self::from_rational(Rational64::new(n, d)));
        }
        let value: f64 = t.parse().map_err(|_| bad())?;
        if !value.is_finite()
            || t.chars()
                .any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        {
            return Err(bad());
        }
        Ok(Self {
            value,
            exact: decimal_rational(t),
        })
    }
}

/// Exact value of a decimal literal, if it fits in 64-bit numerator and
/// denominator.
fn decimal_rational(t: &str) -> Option<Rational64> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut numer: i64 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer
            .checked_mul(10)?
            .checked_add(i64::from(c.to_digit(10)?))?;
    }
    let scale = exp - frac_part.len() as i32;
    let pow = 10i64.checked_pow(scale.unsigned_abs())?;
    let r = if scale >= 0 {
        Rational64::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational64::new(numer, pow)
    };
    Some(r * sign)
}
