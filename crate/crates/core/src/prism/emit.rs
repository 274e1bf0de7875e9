use std::fmt::Write;

use crate::ast::{write_expr, Dialect, Expr, ExprKind, Rational, TypeSet};

use super::{ConstType, GuardedCommand, Module, PrismModel};

struct PrismDialect;

impl Dialect for PrismDialect {
    fn rational(&self, r: &Rational) -> String {
        crate::ast::format_rational(r)
    }

    fn member(&self, _names: &[String], _set: TypeSet) -> String {
        // Typing atoms are consumed by the translation and never emitted.
        "true".to_string()
    }

    fn rational_is_division(&self) -> bool {
        true
    }
}

/// Formatting options. The output order is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitConfig {
    pub indent: usize,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig { indent: 4 }
    }
}

/// An expression in PRISM syntax.
pub fn emit_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, &PrismDialect);
    s
}

fn atom(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Var(_) => emit_expr(e),
        ExprKind::Int(_) => emit_expr(e),
        ExprKind::Rat(r) if r.is_integer() => emit_expr(e),
        _ => format!("({})", emit_expr(e)),
    }
}

/// Renders a model with the default configuration.
pub fn emit(model: &PrismModel) -> String {
    emit_with(model, EmitConfig::default())
}

pub fn emit_with(model: &PrismModel, config: EmitConfig) -> String {
    let pad = " ".repeat(config.indent);
    let mut out = String::new();
    let _ = writeln!(out, "// translated from machine {}", model.source);
    out.push_str("mdp\n\n");

    for c in &model.constants {
        out.push_str("const ");
        if c.ty == ConstType::Double {
            out.push_str("double ");
        }
        out.push_str(&c.name);
        if let Some(v) = &c.value {
            let _ = write!(out, " = {}", emit_expr(v));
        }
        out.push_str(";\n");
    }
    out.push('\n');

    if !model.formulas.is_empty() {
        for f in &model.formulas {
            let _ = writeln!(out, "formula {} = ({});", f.name, emit_expr(&f.predicate));
        }
        out.push('\n');
    }

    module(&mut out, &model.main, &pad);
    out.push('\n');
    let _ = writeln!(
        out,
        "label \"{}\" = ({});",
        model.label.name,
        emit_expr(&model.label.expr)
    );
    out.push('\n');
    module(&mut out, &model.counter, &pad);
    out.push('\n');
    out.push_str("rewards\n");
    let r = &model.rewards;
    let _ = writeln!(
        out,
        "{pad}({}) : ({}) + {};",
        emit_expr(&r.guard),
        emit_expr(&r.value),
        emit_expr(&r.offset)
    );
    out.push_str("endrewards\n");
    out
}

fn module(out: &mut String, m: &Module, pad: &str) {
    let _ = writeln!(out, "module {}", m.name);
    for v in &m.variables {
        let _ = writeln!(
            out,
            "{pad}{} : [{}..{}] init {};",
            v.name,
            emit_expr(&v.low),
            emit_expr(&v.high),
            emit_expr(&v.init)
        );
    }
    if !m.commands.is_empty() {
        out.push('\n');
    }
    for c in &m.commands {
        let _ = writeln!(out, "{pad}{}", command(c));
    }
    out.push_str("endmodule\n");
}

/// `[action] guard -> updates;`
pub(crate) fn command(c: &GuardedCommand) -> String {
    let guard = if c.guard.is_empty() {
        "true".to_string()
    } else {
        c.guard.iter().map(atom).collect::<Vec<_>>().join(" & ")
    };
    let single = c.branches.len() == 1 && is_one(&c.branches[0].probability);
    let branches: Vec<String> = c
        .branches
        .iter()
        .map(|b| {
            let updates = if b.updates.is_empty() {
                "true".to_string()
            } else {
                b.updates
                    .iter()
                    .map(|(v, e)| format!("({v}' = {})", emit_expr(e)))
                    .collect::<Vec<_>>()
                    .join(" & ")
            };
            if single {
                updates
            } else {
                format!("{} : {updates}", atom(&b.probability))
            }
        })
        .collect();
    format!("[{}] {guard} -> {};", c.action, branches.join(" + "))
}

fn is_one(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int(i) => *i == 1.into(),
        ExprKind::Rat(r) => *r == Rational::from_integer(1.into()),
        _ => false,
    }
}

/// One instantaneous-reward query per horizon `k = 0 ..= max_count + 1`.
pub fn emit_query(max_count: u64) -> String {
    (0..=max_count + 1)
        .map(|k| format!("Rmin=? [ I={k} ]\n"))
        .collect()
}
