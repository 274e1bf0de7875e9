//! Renders a machine back to pAMN source that parses to the same tree.

use std::fmt::Write;

use crate::ast::{Expr, Machine, SubstKind, Substitution};

const INDENT: &str = "    ";

pub fn pretty_print(m: &Machine) -> String {
    let mut out = String::new();
    out.push_str("MACHINE ");
    out.push_str(&m.name);
    if !m.params.is_empty() {
        let _ = write!(out, "({})", m.params.join(", "));
    }
    out.push('\n');
    if !m.sees.is_empty() {
        clause(&mut out, "SEES", &m.sees.join(", "));
    }
    if !m.constants.is_empty() {
        clause(&mut out, "CONSTANTS", &m.constants.join(", "));
    }
    if !m.properties.is_empty() {
        clause(&mut out, "PROPERTIES", &conjunction(&m.properties));
    }
    clause(&mut out, "VARIABLES", &m.variables.join(", "));
    clause(&mut out, "INVARIANT", &conjunction(&m.invariant));
    clause(
        &mut out,
        "EXPECTATIONS",
        &format!(
            "{} |=> {}",
            m.expectations.initial, m.expectations.random_variable
        ),
    );
    clause(&mut out, "INITIALISATION", &substitution(&m.initialisation));
    out.push_str("OPERATIONS\n");
    for (i, op) in m.operations.iter().enumerate() {
        out.push_str(INDENT);
        if !op.outputs.is_empty() {
            let _ = write!(out, "{} <-- ", op.outputs.join(", "));
        }
        let _ = write!(out, "{} = {}", op.name, substitution(&op.body));
        out.push_str(if i + 1 < m.operations.len() {
            ";\n"
        } else {
            "\n"
        });
    }
    out.push_str("END\n");
    out
}

fn clause(out: &mut String, keyword: &str, body: &str) {
    let _ = writeln!(out, "{keyword}\n{INDENT}{body}");
}

fn conjunction(parts: &[Expr]) -> String {
    parts
        .iter()
        .map(|e| match e.kind {
            // A conjunct that is itself a conjunction would re-flatten anyway.
            crate::ast::ExprKind::And(..) => format!("({e})"),
            _ => e.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Single-line rendering of a substitution.
pub fn substitution(s: &Substitution) -> String {
    let mut out = String::new();
    write_subst(&mut out, s);
    out
}

fn write_subst(out: &mut String, s: &Substitution) {
    match &s.kind {
        SubstKind::Skip => out.push_str("skip"),
        SubstKind::Assign(v, e) => {
            let _ = write!(out, "{v} := {e}");
        }
        SubstKind::Parallel(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" || ");
                }
                // Sequences and nested parallels bind looser than `||`.
                if matches!(item.kind, SubstKind::Sequence(_) | SubstKind::Parallel(_)) {
                    out.push_str("BEGIN ");
                    write_subst(out, item);
                    out.push_str(" END");
                } else {
                    write_subst(out, item);
                }
            }
        }
        SubstKind::Sequence(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ; ");
                }
                if matches!(item.kind, SubstKind::Sequence(_)) {
                    out.push_str("BEGIN ");
                    write_subst(out, item);
                    out.push_str(" END");
                } else {
                    write_subst(out, item);
                }
            }
        }
        SubstKind::Pre(cond, body) => {
            let _ = write!(out, "PRE {cond} THEN ");
            write_subst(out, body);
            out.push_str(" END");
        }
        SubstKind::Begin(body) => {
            out.push_str("BEGIN ");
            write_subst(out, body);
            out.push_str(" END");
        }
        SubstKind::Choice {
            probability,
            left,
            right,
        } => {
            let _ = write!(out, "PCHOICE {probability} OF ");
            write_subst(out, left);
            out.push_str(" OR ");
            write_subst(out, right);
            out.push_str(" END");
        }
        SubstKind::If {
            condition,
            then,
            otherwise,
        } => {
            let _ = write!(out, "IF {condition} THEN ");
            write_subst(out, then);
            if !matches!(otherwise.kind, SubstKind::Skip) {
                out.push_str(" ELSE ");
                write_subst(out, otherwise);
            }
            out.push_str(" END");
        }
    }
}
