//! Latency, value and guard specifications attached to transitions.
//!
//! All three are closed grammars: deterministic once the daemon index is
//! fixed, and evaluated from input token values only, never from dates.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Value;
use crate::number::{format_rational, parse_rational, ExtDate, NumberError, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("input {index} is not a number (got `{value}`)")]
    NotANumber { index: usize, value: String },
    #[error("operand `{0}` is not a number")]
    NonNumericOperand(String),
    #[error("latency expression evaluated to a negative value `{0}`")]
    Negative(String),
    #[error("undefined arithmetic: {0}")]
    Undefined(&'static str),
    #[error("input index {index} out of range for {arity} inputs")]
    InputOutOfRange { index: usize, arity: usize },
    #[error("daemon index {omega} out of range for a table of {len} entries")]
    OmegaOutOfRange { omega: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unexpected `{found}` at offset {at} in `{source_text}`")]
    Unexpected {
        found: String,
        at: usize,
        source_text: String,
    },
    #[error(transparent)]
    Number(#[from] NumberError),
}

/// Arithmetic over input values: numbers, `inf`, inputs `v0, v1, ...`,
/// `+ - *`, `max(..)`, `min(..)` and parentheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Inf,
    Input(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Max(Vec<Expr>),
    Min(Vec<Expr>),
}

/// `None` is `+inf`; finite intermediates may be negative.
type Ext = Option<Rational>;

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = ExprParser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.unexpected());
        }
        Ok(e)
    }

    pub fn max_input(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::Inf => None,
            Expr::Input(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.max_input().max(b.max_input()),
            Expr::Max(es) | Expr::Min(es) => es.iter().filter_map(Expr::max_input).max(),
        }
    }

    fn eval_ext(&self, inputs: &[Value]) -> Result<Ext, EvalError> {
        Ok(match self {
            Expr::Num(r) => Some(*r),
            Expr::Inf => None,
            Expr::Input(i) => {
                let v = inputs.get(*i).ok_or(EvalError::InputOutOfRange {
                    index: *i,
                    arity: inputs.len(),
                })?;
                Some(v.as_number().ok_or_else(|| EvalError::NotANumber {
                    index: *i,
                    value: v.to_string(),
                })?)
            }
            Expr::Add(a, b) => match (a.eval_ext(inputs)?, b.eval_ext(inputs)?) {
                (Some(x), Some(y)) => Some(x + y),
                _ => None,
            },
            Expr::Sub(a, b) => match (a.eval_ext(inputs)?, b.eval_ext(inputs)?) {
                (Some(x), Some(y)) => Some(x - y),
                (None, Some(_)) => None,
                (_, None) => return Err(EvalError::Undefined("subtracting inf")),
            },
            Expr::Mul(a, b) => match (a.eval_ext(inputs)?, b.eval_ext(inputs)?) {
                (Some(x), Some(y)) => Some(x * y),
                (None, Some(y)) | (Some(y), None) if y.is_positive() => None,
                (None, None) => None,
                _ => return Err(EvalError::Undefined("inf times a non-positive value")),
            },
            Expr::Max(es) => {
                let mut best: Ext = es.first().map(|e| e.eval_ext(inputs)).transpose()?.flatten();
                for e in &es[1..] {
                    best = match (best, e.eval_ext(inputs)?) {
                        (Some(x), Some(y)) => Some(x.max(y)),
                        _ => None,
                    };
                }
                best
            }
            Expr::Min(es) => {
                let mut best: Ext = es.first().map(|e| e.eval_ext(inputs)).transpose()?.flatten();
                for e in &es[1..] {
                    best = match (best, e.eval_ext(inputs)?) {
                        (Some(x), Some(y)) => Some(x.min(y)),
                        (None, y) => y,
                        (x, None) => x,
                    };
                }
                best
            }
        })
    }

    pub fn eval(&self, inputs: &[Value]) -> Result<ExtDate, EvalError> {
        match self.eval_ext(inputs)? {
            None => Ok(ExtDate::Infinite),
            Some(r) if r.is_negative() => Err(EvalError::Negative(format_rational(&r))),
            Some(r) => Ok(ExtDate::Finite(r)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, es: &[Expr]| {
            write!(f, "{name}(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        };
        match self {
            Expr::Num(r) => f.write_str(&format_rational(r)),
            Expr::Inf => f.write_str("inf"),
            Expr::Input(i) => write!(f, "v{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Max(es) => list(f, "max", es),
            Expr::Min(es) => list(f, "min", es),
        }
    }
}

struct ExprParser<'a> {
    src: &'a str,
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn unexpected(&self) -> ExprError {
        let found = self.src[self.pos..].chars().next().map_or("end of input".to_string(), |c| c.to_string());
        ExprError::Unexpected {
            found,
            at: self.pos,
            source_text: self.src.to_string(),
        }
    }

    fn eat(&mut self, c: char) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '/') {
                    self.pos += 1;
                }
                Ok(Expr::Num(parse_rational(&self.src[start..self.pos])?))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let w = self.word().to_string();
                match w.as_str() {
                    "inf" => Ok(Expr::Inf),
                    "max" | "min" => {
                        self.eat('(')?;
                        let mut args = vec![self.expr()?];
                        while self.peek() == Some(',') {
                            self.pos += 1;
                            args.push(self.expr()?);
                        }
                        self.eat(')')?;
                        Ok(if w == "max" { Expr::Max(args) } else { Expr::Min(args) })
                    }
                    _ => match w.strip_prefix('v').and_then(|n| n.parse::<usize>().ok()) {
                        Some(i) => Ok(Expr::Input(i)),
                        None => {
                            self.pos = start;
                            Err(self.unexpected())
                        }
                    },
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Latency of a transition, or initial date of a minimal place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatencySpec {
    Const(ExtDate),
    /// One entry per daemon index.
    PerOmega(Vec<ExtDate>),
    Expr(Expr),
}

impl LatencySpec {
    pub fn constant(n: i64) -> Self {
        LatencySpec::Const(ExtDate::int(n))
    }

    pub fn eval(&self, omega: usize, inputs: &[Value]) -> Result<ExtDate, EvalError> {
        match self {
            LatencySpec::Const(d) => Ok(*d),
            LatencySpec::PerOmega(table) => table.get(omega).copied().ok_or(EvalError::OmegaOutOfRange {
                omega,
                len: table.len(),
            }),
            LatencySpec::Expr(e) => e.eval(inputs),
        }
    }

    /// The value at `omega` when it does not depend on input values.
    pub fn at(&self, omega: usize) -> Option<ExtDate> {
        match self {
            LatencySpec::Const(d) => Some(*d),
            LatencySpec::PerOmega(table) => table.get(omega).copied(),
            LatencySpec::Expr(_) => None,
        }
    }

    pub fn is_value_dependent(&self) -> bool {
        matches!(self, LatencySpec::Expr(_))
    }
}

/// JSON form: a date string, `{"per_omega": [..]}` or `{"expr": ".."}`.
impl Serialize for LatencySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            LatencySpec::Const(d) => d.serialize(s),
            LatencySpec::PerOmega(table) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("per_omega", table)?;
                m.end()
            }
            LatencySpec::Expr(e) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("expr", &e.to_string())?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for LatencySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::{Error, MapAccess, Visitor};
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = LatencySpec;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a date string, {\"per_omega\": [..]} or {\"expr\": \"..\"}")
            }

            fn visit_str<E: Error>(self, v: &str) -> Result<LatencySpec, E> {
                v.parse().map(LatencySpec::Const).map_err(E::custom)
            }

            fn visit_u64<E: Error>(self, v: u64) -> Result<LatencySpec, E> {
                i64::try_from(v)
                    .map(LatencySpec::constant)
                    .map_err(|_| E::custom(NumberError::OutOfRange(v.to_string())))
            }

            fn visit_i64<E: Error>(self, v: i64) -> Result<LatencySpec, E> {
                Err(E::custom(NumberError::Negative(v.to_string())))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<LatencySpec, A::Error> {
                let key: String = map.next_key()?.ok_or_else(|| A::Error::custom("empty latency object"))?;
                let spec = match key.as_str() {
                    "per_omega" => LatencySpec::PerOmega(map.next_value()?),
                    "expr" => {
                        let src: String = map.next_value()?;
                        LatencySpec::Expr(Expr::parse(&src).map_err(A::Error::custom)?)
                    }
                    other => return Err(A::Error::unknown_variant(other, &["per_omega", "expr"])),
                };
                if map.next_key::<String>()?.is_some() {
                    return Err(A::Error::custom("latency object must have exactly one key"));
                }
                Ok(spec)
            }
        }
        d.deserialize_any(V)
    }
}

/// Value function `phi_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ValueFnSpec {
    Const(Value),
    Select(usize),
    TupleOfInputs,
    Sum,
    Max,
    /// One value per daemon index.
    Table(Vec<Value>),
}

impl ValueFnSpec {
    pub fn eval(&self, omega: usize, inputs: &[Value]) -> Result<Value, EvalError> {
        let numbers = || {
            inputs
                .iter()
                .enumerate()
                .map(|(index, v)| {
                    v.as_number().ok_or_else(|| EvalError::NotANumber {
                        index,
                        value: v.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        match self {
            ValueFnSpec::Const(v) => Ok(v.clone()),
            ValueFnSpec::Select(i) => inputs.get(*i).cloned().ok_or(EvalError::InputOutOfRange {
                index: *i,
                arity: inputs.len(),
            }),
            ValueFnSpec::TupleOfInputs => Ok(Value::Tuple(inputs.to_vec())),
            ValueFnSpec::Sum => Ok(Value::Number(numbers()?.into_iter().fold(Rational::zero(), |a, b| a + b))),
            ValueFnSpec::Max => numbers()?
                .into_iter()
                .max()
                .map(Value::Number)
                .ok_or(EvalError::InputOutOfRange { index: 0, arity: 0 }),
            ValueFnSpec::Table(vs) => vs.get(omega).cloned().ok_or(EvalError::OmegaOutOfRange {
                omega,
                len: vs.len(),
            }),
        }
    }

    pub fn max_input(&self) -> Option<usize> {
        match self {
            ValueFnSpec::Select(i) => Some(*i),
            ValueFnSpec::Max => Some(0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardOp {
    Eq,
    Lt,
    Leq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Operand {
    Select(usize),
    Const(Value),
}

impl Operand {
    fn resolve<'a>(&'a self, inputs: &'a [Value]) -> Result<&'a Value, EvalError> {
        match self {
            Operand::Select(i) => inputs.get(*i).ok_or(EvalError::InputOutOfRange {
                index: *i,
                arity: inputs.len(),
            }),
            Operand::Const(v) => Ok(v),
        }
    }
}

/// `lhs op rhs` over input values. A false guard makes the transition's
/// date infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardSpec {
    pub op: GuardOp,
    pub lhs: Operand,
    pub rhs: Operand,
}

impl GuardSpec {
    pub fn eval(&self, inputs: &[Value]) -> Result<bool, EvalError> {
        let l = self.lhs.resolve(inputs)?;
        let r = self.rhs.resolve(inputs)?;
        if self.op == GuardOp::Eq {
            return Ok(l == r);
        }
        let num = |v: &Value| v.as_number().ok_or_else(|| EvalError::NonNumericOperand(v.to_string()));
        let (a, b) = (num(l)?, num(r)?);
        Ok(match self.op {
            GuardOp::Lt => a < b,
            GuardOp::Leq => a <= b,
            GuardOp::Eq => unreachable!(),
        })
    }

    pub fn max_input(&self) -> Option<usize> {
        let idx = |o: &Operand| match o {
            Operand::Select(i) => Some(*i),
            Operand::Const(_) => None,
        };
        idx(&self.lhs).max(idx(&self.rhs))
    }
}
