//! Exact values: unbounded integers, normalized rationals and booleans.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::eval::EvalError;

/// Exact rational used throughout verification. Always kept in lowest terms
/// with a positive denominator.
pub type Rational = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Rat(Rational),
    Bool(bool),
}

impl Value {
    pub fn int(i: i64) -> Self {
        Value::Int(BigInt::from(i))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Value::Rat(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Rat(_) => "rational",
            Value::Bool(_) => "boolean",
        }
    }

    /// Numeric view of the value; booleans have none.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Value::Int(i) => Some(Rational::from_integer(i.clone())),
            Value::Rat(r) => Some(r.clone()),
            Value::Bool(_) => None,
        }
    }

    /// Integer view. Rationals with unit denominator count as integers.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Value::Int(i) => Some(i.clone()),
            Value::Rat(r) if r.is_integer() => Some(r.to_integer()),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_integer().and_then(|i| i.to_i64())
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn numeric_pair(&self, other: &Value, op: &'static str) -> Result<NumPair, EvalError> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Ok(NumPair::Ints(a.clone(), b.clone())),
            (a, b) => match (a.as_rational(), b.as_rational()) {
                (Some(x), Some(y)) => Ok(NumPair::Rats(x, y)),
                _ => Err(EvalError::TypeMismatch {
                    op,
                    left: a.kind(),
                    right: b.kind(),
                }),
            },
        }
    }

    pub fn add(&self, other: &Value) -> Result<Value, EvalError> {
        Ok(match self.numeric_pair(other, "+")? {
            NumPair::Ints(a, b) => Value::Int(a + b),
            NumPair::Rats(a, b) => Value::Rat(a + b),
        })
    }

    pub fn sub(&self, other: &Value) -> Result<Value, EvalError> {
        Ok(match self.numeric_pair(other, "-")? {
            NumPair::Ints(a, b) => Value::Int(a - b),
            NumPair::Rats(a, b) => Value::Rat(a - b),
        })
    }

    pub fn mul(&self, other: &Value) -> Result<Value, EvalError> {
        Ok(match self.numeric_pair(other, "*")? {
            NumPair::Ints(a, b) => Value::Int(a * b),
            NumPair::Rats(a, b) => Value::Rat(a * b),
        })
    }

    pub fn neg(&self) -> Result<Value, EvalError> {
        match self {
            Value::Int(i) => Ok(Value::Int(-i)),
            Value::Rat(r) => Ok(Value::Rat(-r)),
            Value::Bool(_) => Err(EvalError::TypeMismatch {
                op: "unary -",
                left: "boolean",
                right: "boolean",
            }),
        }
    }

    /// Numeric comparison; integers and rationals compare by value.
    pub fn compare(&self, other: &Value) -> Result<Ordering, EvalError> {
        Ok(match self.numeric_pair(other, "comparison")? {
            NumPair::Ints(a, b) => a.cmp(&b),
            NumPair::Rats(a, b) => a.cmp(&b),
        })
    }
}

enum NumPair {
    Ints(BigInt, BigInt),
    Rats(Rational, Rational),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Rat(r) => write!(f, "{}", format_rational(r)),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<Rational> for Value {
    fn from(r: Rational) -> Self {
        Value::Rat(r)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::int(i)
    }
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floating-point approximation for display only.
pub fn approximate(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid numeric literal `{0}` (expected an integer, `p/q` or a decimal)")]
pub struct ValueParseError(pub String);

/// Parses an exact decimal string such as `0.25` or `-3.5`.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = digits.split_once('.')?;
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    let whole_part = if whole.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(whole).ok()?
    };
    let frac_part = if frac.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(frac).ok()?
    };
    let r = Rational::new(whole_part * &scale + frac_part, scale);
    Some(if negative { -r } else { r })
}

impl FromStr for Value {
    type Err = ValueParseError;

    /// Accepts `n`, `p/q` and exact decimals. Decimals never go through
    /// binary floating point: `0.5` is exactly `1/2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ValueParseError(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Value::Rat(Rational::new(p, q)));
        }
        if s.contains('.') {
            return parse_decimal(s).map(Value::Rat).ok_or_else(err);
        }
        BigInt::from_str(s).map(Value::Int).map_err(|_| err())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_command_line_values() {
        assert_eq!("3".parse::<Value>().unwrap(), Value::int(3));
        assert_eq!("1/2".parse::<Value>().unwrap(), Value::ratio(1, 2));
        assert_eq!("0.5".parse::<Value>().unwrap(), Value::ratio(1, 2));
        assert_eq!("-2/4".parse::<Value>().unwrap(), Value::ratio(-1, 2));
        assert_eq!(".25".parse::<Value>().unwrap(), Value::ratio(1, 4));
        assert!("1/0".parse::<Value>().is_err());
        assert!("abc".parse::<Value>().is_err());
        assert!("1.2.3".parse::<Value>().is_err());
    }

    #[test]
    fn mixed_arithmetic_promotes_to_rational() {
        let half = Value::ratio(1, 2);
        assert_eq!(half.mul(&Value::int(1)).unwrap(), Value::ratio(1, 2));
        assert_eq!(Value::int(2).add(&Value::int(3)).unwrap(), Value::int(5));
        assert_eq!(
            Value::ratio(1, 2).compare(&Value::int(0)).unwrap(),
            Ordering::Greater
        );
        assert!(Value::Bool(true).add(&Value::int(1)).is_err());
    }

    #[test]
    fn formats_rationals() {
        assert_eq!(format_rational(&Rational::new(2.into(), 8.into())), "1/4");
        assert_eq!(format_rational(&Rational::from_integer((-3).into())), "-3");
    }
}
