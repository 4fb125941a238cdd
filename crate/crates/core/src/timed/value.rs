//! Token values.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::number::{format_rational, parse_rational, Rational};

/// Data carried by a token alongside its date.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Atom(String),
    Number(Rational),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn atom(s: impl Into<String>) -> Self {
        Value::Atom(s.into())
    }

    pub fn int(n: i64) -> Self {
        Value::Number(Rational::from_integer(n))
    }

    pub fn unit() -> Self {
        Value::Tuple(Vec::new())
    }

    pub fn as_number(&self) -> Option<Rational> {
        match self {
            Value::Number(r) => Some(*r),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(s) => f.write_str(s),
            Value::Number(r) => f.write_str(&format_rational(r)),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum ValueRepr {
    Atom(String),
    Number(String),
    Tuple(Vec<Value>),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Value::Atom(a) => ValueRepr::Atom(a.clone()),
            Value::Number(r) => ValueRepr::Number(format_rational(r)),
            Value::Tuple(vs) => ValueRepr::Tuple(vs.clone()),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ValueRepr::deserialize(d)? {
            ValueRepr::Atom(a) => Ok(Value::Atom(a)),
            ValueRepr::Number(n) => parse_rational(&n)
                .map(Value::Number)
                .map_err(serde::de::Error::custom),
            ValueRepr::Tuple(vs) => Ok(Value::Tuple(vs)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let v = Value::Tuple(vec![Value::atom("ok"), Value::Number(Rational::new(3, 2))]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"tuple":[{"atom":"ok"},{"number":"1.5"}]}"#);
        assert_eq!(serde_json::from_str::<Value>(&s).unwrap(), v);
        assert_eq!(v.to_string(), "(ok, 1.5)");
    }
}
