//! Arithmetic and predicate expressions over machine variables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use super::value::Rational;
use super::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    /// The comparison that holds exactly when `self` does not.
    /// Equality has no single-comparison complement.
    pub fn complement(self) -> Option<CmpOp> {
        match self {
            CmpOp::Lt => Some(CmpOp::Ge),
            CmpOp::Le => Some(CmpOp::Gt),
            CmpOp::Ge => Some(CmpOp::Lt),
            CmpOp::Gt => Some(CmpOp::Le),
            CmpOp::Eq => None,
        }
    }
}

/// Sets usable in a typing atom `x : SET`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeSet {
    Int,
    Natural,
    Real,
}

impl TypeSet {
    pub fn name(self) -> &'static str {
        match self {
            TypeSet::Int => "INT",
            TypeSet::Natural => "NATURAL",
            TypeSet::Real => "REAL",
        }
    }

    pub fn from_name(name: &str) -> Option<TypeSet> {
        match name {
            "INT" | "INTEGER" => Some(TypeSet::Int),
            "NATURAL" | "NAT" => Some(TypeSet::Natural),
            "REAL" => Some(TypeSet::Real),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Var(String),
    Int(BigInt),
    Rat(Rational),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    /// Typing atom, e.g. `a, b : NATURAL`.
    Member(Vec<String>, TypeSet),
}

/// An expression node. Equality and hashing ignore the span.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }
}

impl Expr {
    pub fn with_span(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn var(name: impl Into<String>) -> Self {
        ExprKind::Var(name.into()).into()
    }

    pub fn int(i: i64) -> Self {
        ExprKind::Int(BigInt::from(i)).into()
    }

    pub fn rat(r: Rational) -> Self {
        ExprKind::Rat(r).into()
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        ExprKind::Binary(op, Box::new(l), Box::new(r)).into()
    }

    pub fn compare(op: CmpOp, l: Expr, r: Expr) -> Self {
        ExprKind::Compare(op, Box::new(l), Box::new(r)).into()
    }

    pub fn and(l: Expr, r: Expr) -> Self {
        ExprKind::And(Box::new(l), Box::new(r)).into()
    }

    /// Left-nested conjunction of `parts`; `None` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        parts.into_iter().reduce(Expr::and)
    }

    pub fn is_typing(&self) -> bool {
        matches!(self.kind, ExprKind::Member(..))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self.kind, ExprKind::Int(_) | ExprKind::Rat(_))
    }

    /// Flattens nested conjunctions into their atoms, left to right.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match &e.kind {
                ExprKind::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                _ => out.push(e),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Identifiers in order of first occurrence.
    pub fn identifiers(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_identifiers(&mut |name| {
            if !out.contains(&name) {
                out.push(name);
            }
        });
        out
    }

    pub fn free_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_identifiers(&mut |name| {
            out.insert(name.to_string());
        });
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_identifiers(&mut |n| found |= n == name);
        found
    }

    pub fn visit_identifiers<'a>(&'a self, f: &mut dyn FnMut(&'a str)) {
        match &self.kind {
            ExprKind::Var(name) => f(name),
            ExprKind::Int(_) | ExprKind::Rat(_) => {}
            ExprKind::Neg(e) => e.visit_identifiers(f),
            ExprKind::Binary(_, l, r) | ExprKind::Compare(_, l, r) | ExprKind::And(l, r) => {
                l.visit_identifiers(f);
                r.visit_identifiers(f);
            }
            ExprKind::Member(names, _) => names.iter().for_each(|n| f(n)),
        }
    }

    /// Simultaneous substitution `E[x := f, y := g, ...]`. All replacements
    /// are read from the original expression, so `{cc ↦ 0, nn ↦ cc}` applied
    /// to `cc + nn` yields `0 + cc`.
    ///
    /// Typing atoms are left untouched: they constrain names, not values.
    pub fn substitute(&self, bindings: &HashMap<String, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        let kind = match &self.kind {
            ExprKind::Var(name) => match bindings.get(name) {
                Some(replacement) => return replacement.clone(),
                None => ExprKind::Var(name.clone()),
            },
            ExprKind::Int(_) | ExprKind::Rat(_) | ExprKind::Member(..) => self.kind.clone(),
            ExprKind::Neg(e) => ExprKind::Neg(Box::new(e.substitute(bindings))),
            ExprKind::Binary(op, l, r) => ExprKind::Binary(
                *op,
                Box::new(l.substitute(bindings)),
                Box::new(r.substitute(bindings)),
            ),
            ExprKind::Compare(op, l, r) => ExprKind::Compare(
                *op,
                Box::new(l.substitute(bindings)),
                Box::new(r.substitute(bindings)),
            ),
            ExprKind::And(l, r) => ExprKind::And(
                Box::new(l.substitute(bindings)),
                Box::new(r.substitute(bindings)),
            ),
        };
        Expr {
            kind,
            span: self.span,
        }
    }

    /// Binding strength used by printers; larger binds tighter.
    pub(crate) fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::And(..) => 1,
            ExprKind::Compare(..) | ExprKind::Member(..) => 2,
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 3,
            ExprKind::Binary(BinOp::Mul, ..) => 4,
            ExprKind::Neg(_) => 5,
            _ => 6,
        }
    }
}

/// Shared printer for the pAMN and PRISM dialects, which differ only in how
/// literals and typing atoms are spelled.
pub(crate) trait Dialect {
    fn rational(&self, r: &Rational) -> String;
    fn member(&self, names: &[String], set: TypeSet) -> String;
    /// Whether non-integral rational literals print as a bare division.
    fn rational_is_division(&self) -> bool {
        false
    }
}

fn precedence_in(e: &Expr, dialect: &dyn Dialect) -> u8 {
    match &e.kind {
        ExprKind::Rat(r) if !r.is_integer() && dialect.rational_is_division() => 4,
        _ => e.precedence(),
    }
}

pub(crate) fn write_expr(out: &mut String, e: &Expr, dialect: &dyn Dialect) {
    match &e.kind {
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Int(i) => out.push_str(&i.to_string()),
        ExprKind::Rat(r) => out.push_str(&dialect.rational(r)),
        ExprKind::Neg(inner) => {
            out.push('-');
            write_operand(out, inner, precedence_in(inner, dialect) < 5, dialect);
        }
        ExprKind::Binary(op, l, r) => {
            let p = e.precedence();
            write_operand(out, l, precedence_in(l, dialect) < p, dialect);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(out, r, precedence_in(r, dialect) <= p, dialect);
        }
        ExprKind::Compare(op, l, r) => {
            write_operand(out, l, l.precedence() <= 2, dialect);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_operand(out, r, r.precedence() <= 2, dialect);
        }
        ExprKind::And(l, r) => {
            write_operand(out, l, l.precedence() < 1, dialect);
            out.push_str(" & ");
            write_operand(out, r, r.precedence() <= 1, dialect);
        }
        ExprKind::Member(names, set) => out.push_str(&dialect.member(names, *set)),
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool, dialect: &dyn Dialect) {
    if parens {
        out.push('(');
        write_expr(out, e, dialect);
        out.push(')');
    } else {
        write_expr(out, e, dialect);
    }
}

pub(crate) struct AmnDialect;

impl Dialect for AmnDialect {
    fn rational(&self, r: &Rational) -> String {
        if r.is_integer() {
            format!("real({})", r.numer())
        } else {
            format!("frac({}, {})", r.numer(), r.denom())
        }
    }

    fn member(&self, names: &[String], set: TypeSet) -> String {
        format!("{} : {}", names.join(", "), set.name())
    }
}

impl fmt::Display for Expr {
    /// Prints in pAMN concrete syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, &AmnDialect);
        f.write_str(&s)
    }
}

impl Neg for Expr {
    type Output = Expr;

    fn neg(self) -> Expr {
        ExprKind::Neg(Box::new(self)).into()
    }
}

impl Add for Expr {
    type Output = Expr;

    fn add(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, r)
    }
}

impl Sub for Expr {
    type Output = Expr;

    fn sub(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, r)
    }
}

impl Mul for Expr {
    type Output = Expr;

    fn mul(self, r: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, r)
    }
}
