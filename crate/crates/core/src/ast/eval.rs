//! Big-step evaluation of expressions against an environment.

use std::collections::{BTreeMap, HashMap};

use num_traits::Signed;

use super::expr::{CmpOp, Expr, ExprKind, TypeSet};
use super::value::{Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("type mismatch in `{op}`: {left} and {right}")]
    TypeMismatch {
        op: &'static str,
        left: &'static str,
        right: &'static str,
    },
    #[error("expected a {expected} value, found {found}")]
    Expected {
        expected: &'static str,
        found: &'static str,
    },
}

/// Something that can resolve identifiers to values.
pub trait Env {
    fn lookup(&self, name: &str) -> Option<Value>;
}

impl Env for HashMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl Env for BTreeMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.get(name).cloned()
    }
}

impl<E: Env + ?Sized> Env for &E {
    fn lookup(&self, name: &str) -> Option<Value> {
        (**self).lookup(name)
    }
}

/// Looks names up in `first`, falling back to `second`.
pub struct Layered<A, B>(pub A, pub B);

impl<A: Env, B: Env> Env for Layered<A, B> {
    fn lookup(&self, name: &str) -> Option<Value> {
        self.0.lookup(name).or_else(|| self.1.lookup(name))
    }
}

pub fn evaluate(expr: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match &expr.kind {
        ExprKind::Var(name) => env
            .lookup(name)
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        ExprKind::Int(i) => Ok(Value::Int(i.clone())),
        ExprKind::Rat(r) => Ok(Value::Rat(r.clone())),
        ExprKind::Neg(e) => evaluate(e, env)?.neg(),
        ExprKind::Binary(op, l, r) => {
            let a = evaluate(l, env)?;
            let b = evaluate(r, env)?;
            match op {
                super::BinOp::Add => a.add(&b),
                super::BinOp::Sub => a.sub(&b),
                super::BinOp::Mul => a.mul(&b),
            }
        }
        ExprKind::Compare(op, l, r) => {
            let a = evaluate(l, env)?;
            let b = evaluate(r, env)?;
            let ord = match (&a, &b) {
                (Value::Bool(x), Value::Bool(y)) if *op == CmpOp::Eq => {
                    return Ok(Value::Bool(x == y))
                }
                _ => a.compare(&b)?,
            };
            Ok(Value::Bool(match op {
                CmpOp::Lt => ord.is_lt(),
                CmpOp::Le => ord.is_le(),
                CmpOp::Eq => ord.is_eq(),
                CmpOp::Ge => ord.is_ge(),
                CmpOp::Gt => ord.is_gt(),
            }))
        }
        ExprKind::And(l, r) => {
            if !evaluate_bool(l, env)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(evaluate_bool(r, env)?))
        }
        ExprKind::Member(names, set) => {
            for name in names {
                let v = env
                    .lookup(name)
                    .ok_or_else(|| EvalError::Unbound(name.clone()))?;
                if !member_of(&v, *set) {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
    }
}

fn member_of(v: &Value, set: TypeSet) -> bool {
    match set {
        TypeSet::Int => v.as_integer().is_some(),
        TypeSet::Natural => v.as_integer().is_some_and(|i| !i.is_negative()),
        TypeSet::Real => v.as_rational().is_some(),
    }
}

pub fn evaluate_bool(expr: &Expr, env: &dyn Env) -> Result<bool, EvalError> {
    let v = evaluate(expr, env)?;
    v.as_bool().ok_or(EvalError::Expected {
        expected: "boolean",
        found: v.kind(),
    })
}

pub fn evaluate_rational(expr: &Expr, env: &dyn Env) -> Result<Rational, EvalError> {
    let v = evaluate(expr, env)?;
    v.as_rational().ok_or(EvalError::Expected {
        expected: "numeric",
        found: v.kind(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;

    fn env(pairs: &[(&str, Value)]) -> HashMap<String, Value> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn library_random_variable() {
        let e = parse_expr("pp * loansEnded - booksLost").unwrap();
        let env = env(&[
            ("pp", Value::ratio(1, 2)),
            ("loansEnded", Value::int(1)),
            ("booksLost", Value::int(0)),
        ]);
        assert_eq!(evaluate(&e, &env).unwrap(), Value::ratio(1, 2));
    }

    #[test]
    fn real_literal_with_empty_env() {
        let e = parse_expr("real (0)").unwrap();
        assert_eq!(
            evaluate_rational(&e, &HashMap::new()).unwrap(),
            Rational::from_integer(0.into())
        );
    }

    #[test]
    fn library_invariant_conjunct_is_false_at_origin() {
        let e = parse_expr("booksInLibrary + booksLost + loansStarted - loansEnded = totalBooks")
            .unwrap();
        let env = env(&[
            ("booksInLibrary", Value::int(0)),
            ("booksLost", Value::int(0)),
            ("loansStarted", Value::int(0)),
            ("loansEnded", Value::int(0)),
            ("totalBooks", Value::int(1)),
        ]);
        assert_eq!(evaluate(&e, &env).unwrap(), Value::Bool(false));
    }

    #[test]
    fn typing_atoms() {
        let e = parse_expr("a, b : NATURAL").unwrap();
        let ok = env(&[("a", Value::int(0)), ("b", Value::int(3))]);
        let bad = env(&[("a", Value::int(0)), ("b", Value::int(-3))]);
        assert!(evaluate_bool(&e, &ok).unwrap());
        assert!(!evaluate_bool(&e, &bad).unwrap());
        let e = parse_expr("pp : REAL").unwrap();
        assert!(evaluate_bool(&e, &env(&[("pp", Value::ratio(1, 3))])).unwrap());
        let e = parse_expr("x : INT").unwrap();
        assert!(!evaluate_bool(&e, &env(&[("x", Value::ratio(1, 3))])).unwrap());
    }

    #[test]
    fn errors() {
        let e = parse_expr("x + 1").unwrap();
        assert_eq!(
            evaluate(&e, &HashMap::new()),
            Err(EvalError::Unbound("x".into()))
        );
        let e = parse_expr("(x < 1) + 1").unwrap();
        assert!(matches!(
            evaluate(&e, &env(&[("x", Value::int(0))])),
            Err(EvalError::TypeMismatch { .. })
        ));
    }
}
