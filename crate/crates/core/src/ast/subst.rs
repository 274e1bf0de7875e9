//! Generalised substitutions: the command language of operation bodies.

use std::collections::BTreeSet;

use super::expr::Expr;
use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubstKind {
    Skip,
    Assign(String, Expr),
    /// `S || T || ...`, simultaneous.
    Parallel(Vec<Substitution>),
    /// `S ; T ; ...`
    Sequence(Vec<Substitution>),
    /// `PRE P THEN S END`
    Pre(Expr, Box<Substitution>),
    /// `BEGIN S END`
    Begin(Box<Substitution>),
    /// `PCHOICE p OF S OR T END`: `S` with probability `p`, otherwise `T`.
    Choice {
        probability: Expr,
        left: Box<Substitution>,
        right: Box<Substitution>,
    },
    /// `IF G THEN S ELSE T END`, i.e. `S ◁ G ▷ T`.
    If {
        condition: Expr,
        then: Box<Substitution>,
        otherwise: Box<Substitution>,
    },
}

/// A substitution node. Equality ignores the span.
#[derive(Clone, Debug)]
pub struct Substitution {
    pub kind: SubstKind,
    pub span: Span,
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Substitution {}

impl From<SubstKind> for Substitution {
    fn from(kind: SubstKind) -> Self {
        Substitution {
            kind,
            span: Span::default(),
        }
    }
}

impl Substitution {
    pub fn skip() -> Self {
        SubstKind::Skip.into()
    }

    pub fn assign(var: impl Into<String>, value: Expr) -> Self {
        SubstKind::Assign(var.into(), value).into()
    }

    pub fn parallel(items: Vec<Substitution>) -> Self {
        SubstKind::Parallel(items).into()
    }

    pub fn sequence(items: Vec<Substitution>) -> Self {
        SubstKind::Sequence(items).into()
    }

    pub fn pre(condition: Expr, body: Substitution) -> Self {
        SubstKind::Pre(condition, Box::new(body)).into()
    }

    pub fn begin(body: Substitution) -> Self {
        SubstKind::Begin(Box::new(body)).into()
    }

    pub fn choice(probability: Expr, left: Substitution, right: Substitution) -> Self {
        SubstKind::Choice {
            probability,
            left: Box::new(left),
            right: Box::new(right),
        }
        .into()
    }

    pub fn if_then_else(condition: Expr, then: Substitution, otherwise: Substitution) -> Self {
        SubstKind::If {
            condition,
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        }
        .into()
    }

    pub fn children(&self) -> Vec<&Substitution> {
        match &self.kind {
            SubstKind::Skip | SubstKind::Assign(..) => vec![],
            SubstKind::Parallel(items) | SubstKind::Sequence(items) => items.iter().collect(),
            SubstKind::Pre(_, body) | SubstKind::Begin(body) => vec![body],
            SubstKind::Choice { left, right, .. } => vec![left, right],
            SubstKind::If {
                then, otherwise, ..
            } => vec![then, otherwise],
        }
    }

    /// Expressions read directly by this node (not its children).
    pub fn own_expressions(&self) -> Vec<&Expr> {
        match &self.kind {
            SubstKind::Assign(_, e) | SubstKind::Pre(e, _) => vec![e],
            SubstKind::Choice { probability, .. } => vec![probability],
            SubstKind::If { condition, .. } => vec![condition],
            _ => vec![],
        }
    }

    /// Variables assigned anywhere in the substitution.
    pub fn assigned(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |s| {
            if let SubstKind::Assign(v, _) = &s.kind {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Every identifier occurring in the substitution: guards, probabilities,
    /// right-hand sides and assignment targets, in first-occurrence order.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |name: &str| {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_string());
            }
        };
        self.walk(&mut |s| {
            if let SubstKind::Assign(v, _) = &s.kind {
                push(v);
            }
            for e in s.own_expressions() {
                e.visit_identifiers(&mut |n| push(n));
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Substitution)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}
