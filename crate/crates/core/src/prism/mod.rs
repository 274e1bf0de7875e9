//! In-memory PRISM models and their text form.

mod emit;

pub use emit::{emit, emit_expr, emit_query, EmitConfig};

use std::collections::BTreeSet;

use crate::ast::Expr;

/// Reserved names introduced by the translation.
pub const MAX_COUNT: &str = "MAX_COUNT";
pub const COUNT: &str = "count";
pub const COUNTER_MODULE: &str = "Counter";
pub const EXPECTATIONS_LABEL: &str = "expectations";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelType {
    Mdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstType {
    /// Emitted without a type, which PRISM reads as `int`.
    Int,
    Double,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: ConstType,
    /// `None` leaves the constant undefined until check time.
    pub value: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaDef {
    pub name: String,
    /// An atomic predicate.
    pub predicate: Expr,
    pub free_identifiers: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub low: Expr,
    pub high: Expr,
    pub init: Expr,
}

/// One probabilistic alternative of a command: `p : (x' = e) & ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub probability: Expr,
    pub updates: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedCommand {
    /// Action label; empty for an unlabeled command.
    pub action: String,
    /// Conjuncts of the guard. Formula references appear as variables.
    pub guard: Vec<Expr>,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub variables: Vec<VarDecl>,
    pub commands: Vec<GuardedCommand>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub name: String,
    pub expr: Expr,
}

/// `guard : (value) + offset;`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewardStructure {
    pub guard: Expr,
    pub value: Expr,
    pub offset: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrismModel {
    pub model_type: ModelType,
    /// Name of the machine the model was translated from.
    pub source: String,
    pub constants: Vec<ConstDecl>,
    pub formulas: Vec<FormulaDef>,
    pub main: Module,
    pub label: Label,
    pub counter: Module,
    pub rewards: RewardStructure,
    /// The random variable ξ, unpadded.
    pub random_variable: Expr,
    /// The initial expression e.
    pub initial: Expr,
    /// Constant bounding the main module's variables.
    pub bound: String,
}

impl PrismModel {
    pub fn modules(&self) -> [&Module; 2] {
        [&self.main, &self.counter]
    }

    pub fn formula(&self, name: &str) -> Option<&FormulaDef> {
        self.formulas.iter().find(|f| f.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<&ConstDecl> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Constants that must be supplied at check time.
    pub fn undefined_constants(&self) -> impl Iterator<Item = &ConstDecl> {
        self.constants.iter().filter(|c| c.value.is_none())
    }

    pub fn command_count(&self) -> usize {
        self.main.commands.len() + self.counter.commands.len()
    }
}
