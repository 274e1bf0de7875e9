//! Abstract syntax of the probabilistic AMN subset, with exact values.

mod eval;
mod expr;
mod subst;
mod value;

pub use eval::{evaluate, evaluate_bool, evaluate_rational, Env, EvalError, Layered};
pub(crate) use expr::{write_expr, Dialect};
pub use expr::{BinOp, CmpOp, Expr, ExprKind, TypeSet};
pub use subst::{SubstKind, Substitution};
pub use value::{approximate, format_rational, parse_decimal, Rational, Value, ValueParseError};

use std::fmt;

/// Name of the bound constant added to machines without parameters.
pub const SYNTHESIZED_BOUND: &str = "BOUND";

/// Location of a node in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub begin: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        if other.end < self.begin {
            return other.to(self);
        }
        Span {
            begin: self.begin,
            end: other.end.max(self.end),
            line: self.line,
            column: self.column,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    /// Output parameters from the `out <-- Op` header form.
    pub outputs: Vec<String>,
    pub body: Substitution,
}

/// The EXPECTATIONS clause `e |=> ξ`: the expected value of `random_variable`
/// must never fall below `initial`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectations {
    pub initial: Expr,
    pub random_variable: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    pub name: String,
    pub params: Vec<String>,
    pub sees: Vec<String>,
    pub constants: Vec<String>,
    /// PROPERTIES as a list of conjuncts.
    pub properties: Vec<Expr>,
    pub variables: Vec<String>,
    /// INVARIANT as a list of conjuncts.
    pub invariant: Vec<Expr>,
    pub expectations: Expectations,
    pub initialisation: Substitution,
    pub operations: Vec<Operation>,
}

impl Machine {
    /// Parameters followed by CONSTANTS.
    pub fn all_constants(&self) -> impl Iterator<Item = &String> {
        self.params.iter().chain(self.constants.iter())
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.all_constants().any(|c| c == name)
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }

    fn typing_in(conjuncts: &[Expr], name: &str) -> Option<TypeSet> {
        conjuncts.iter().find_map(|c| match &c.kind {
            ExprKind::Member(names, set) if names.iter().any(|n| n == name) => Some(*set),
            _ => None,
        })
    }

    /// Type of a variable from its INVARIANT typing atom.
    pub fn variable_type(&self, name: &str) -> Option<TypeSet> {
        Self::typing_in(&self.invariant, name)
    }

    /// Type of a parameter or constant from its PROPERTIES typing atom.
    pub fn constant_type(&self, name: &str) -> Option<TypeSet> {
        Self::typing_in(&self.properties, name)
    }

    /// INVARIANT conjuncts other than typing atoms.
    pub fn invariant_predicates(&self) -> impl Iterator<Item = &Expr> {
        self.invariant.iter().filter(|c| !c.is_typing())
    }

    pub fn property_predicates(&self) -> impl Iterator<Item = &Expr> {
        self.properties.iter().filter(|c| !c.is_typing())
    }

    /// Output parameters that are not declared variables, in first-occurrence
    /// order. The translator turns these into state variables.
    pub fn undeclared_outputs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for op in &self.operations {
            for o in &op.outputs {
                if !self.is_variable(o) && !out.contains(o) {
                    out.push(o.clone());
                }
            }
        }
        out
    }

    /// Constant bounding every variable's range: the first parameter, or a
    /// synthesized `BOUND` when the machine has none.
    pub fn bound_name(&self) -> &str {
        self.params
            .first()
            .map_or(SYNTHESIZED_BOUND, String::as_str)
    }

    pub fn operation(&self, name: &str) -> Option<&Operation> {
        self.operations.iter().find(|o| o.name == name)
    }

    /// A copy of the machine without the named operation.
    pub fn without_operation(&self, name: &str) -> Machine {
        let mut m = self.clone();
        m.operations.retain(|o| o.name != name);
        m
    }
}
