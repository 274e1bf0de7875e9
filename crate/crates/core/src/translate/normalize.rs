//! Flattens a substitution into guarded alternatives, each a probability
//! distribution over parallel updates. Alternatives are disjoint: at most one
//! is enabled in any state.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::ast::{
    evaluate_rational, BinOp, CmpOp, Expr, ExprKind, Rational, SubstKind, Substitution,
};

use super::TranslateError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Alt {
    /// Atomic conditions, all evaluated in the pre-state.
    pub conds: Vec<Expr>,
    pub branches: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Outcome {
    pub probability: Expr,
    /// Updates in first-assignment order; each variable at most once.
    pub updates: Vec<(String, Expr)>,
}

impl Outcome {
    fn certain() -> Self {
        Outcome {
            probability: one(),
            updates: Vec::new(),
        }
    }

    /// Later updates to the same variable replace earlier ones in place.
    fn set(&mut self, var: &str, value: Expr) {
        match self.updates.iter_mut().find(|(v, _)| v == var) {
            Some(slot) => slot.1 = value,
            None => self.updates.push((var.to_string(), value)),
        }
    }

    fn bindings(&self) -> HashMap<String, Expr> {
        self.updates.iter().cloned().collect()
    }
}

fn one() -> Expr {
    Expr::int(1)
}

/// Folds products and complements of literal probabilities.
fn literal(e: &Expr) -> Option<Rational> {
    if e.free_identifiers().is_empty() {
        evaluate_rational(e, &HashMap::new()).ok()
    } else {
        None
    }
}

fn rational_expr(r: Rational) -> Expr {
    if r.is_integer() {
        Expr::with_span(ExprKind::Int(r.to_integer()), Default::default())
    } else {
        Expr::rat(r)
    }
}

pub(crate) fn times(a: &Expr, b: &Expr) -> Expr {
    match (literal(a), literal(b)) {
        (Some(x), Some(y)) => rational_expr(x * y),
        (Some(x), _) if x.is_one() => b.clone(),
        (_, Some(y)) if y.is_one() => a.clone(),
        _ => a.clone() * b.clone(),
    }
}

pub(crate) fn complement(p: &Expr) -> Expr {
    match literal(p) {
        Some(x) => rational_expr(Rational::one() - x),
        None => Expr::binary(BinOp::Sub, one(), p.clone()),
    }
}

pub(crate) fn is_zero(e: &Expr) -> bool {
    literal(e).is_some_and(|x| x.is_zero())
}

/// Disjoint cases covering the negation of a conjunction of comparisons:
/// `¬g1`, `g1 ∧ ¬g2`, ... Equalities negate to two strict cases.
fn negate(conds: &[Expr]) -> Result<Vec<Vec<Expr>>, TranslateError> {
    let mut cases = Vec::new();
    for (i, g) in conds.iter().enumerate() {
        let ExprKind::Compare(op, l, r) = &g.kind else {
            return Err(TranslateError::Unsupported(format!(
                "condition `{g}` must be a conjunction of comparisons"
            )));
        };
        let prefix = &conds[..i];
        let negated: Vec<Expr> = match op.complement() {
            Some(c) => vec![Expr::compare(c, (**l).clone(), (**r).clone())],
            None => vec![
                Expr::compare(CmpOp::Lt, (**l).clone(), (**r).clone()),
                Expr::compare(CmpOp::Gt, (**l).clone(), (**r).clone()),
            ],
        };
        for n in negated {
            let mut case = prefix.to_vec();
            case.push(n);
            cases.push(case);
        }
    }
    Ok(cases)
}

fn atoms(e: &Expr) -> Result<Vec<Expr>, TranslateError> {
    e.conjuncts()
        .into_iter()
        .map(|c| match &c.kind {
            ExprKind::Compare(..) => Ok(c.clone()),
            _ => Err(TranslateError::Unsupported(format!(
                "condition `{c}` is not a comparison"
            ))),
        })
        .collect()
}

pub(crate) fn normalize(sub: &Substitution) -> Result<Vec<Alt>, TranslateError> {
    Ok(match &sub.kind {
        SubstKind::Skip => vec![Alt {
            conds: vec![],
            branches: vec![Outcome::certain()],
        }],
        SubstKind::Assign(x, e) => {
            let mut o = Outcome::certain();
            o.set(x, e.clone());
            vec![Alt {
                conds: vec![],
                branches: vec![o],
            }]
        }
        SubstKind::Begin(body) => normalize(body)?,
        SubstKind::Pre(p, body) => {
            let pre = atoms(p)?;
            normalize(body)?
                .into_iter()
                .map(|mut a| {
                    let mut conds = pre.clone();
                    conds.append(&mut a.conds);
                    a.conds = conds;
                    a
                })
                .collect()
        }
        SubstKind::If {
            condition,
            then,
            otherwise,
        } => {
            let g = atoms(condition)?;
            let mut out = Vec::new();
            for mut a in normalize(then)? {
                let mut conds = g.clone();
                conds.append(&mut a.conds);
                a.conds = conds;
                out.push(a);
            }
            let rest = normalize(otherwise)?;
            for case in negate(&g)? {
                for a in &rest {
                    let mut conds = case.clone();
                    conds.extend(a.conds.iter().cloned());
                    out.push(Alt {
                        conds,
                        branches: a.branches.clone(),
                    });
                }
            }
            out
        }
        SubstKind::Choice {
            probability,
            left,
            right,
        } => {
            let q = complement(probability);
            let ls = normalize(left)?;
            let rs = normalize(right)?;
            let mut out = Vec::new();
            for l in &ls {
                for r in &rs {
                    let mut conds = l.conds.clone();
                    conds.extend(r.conds.iter().cloned());
                    let mut branches = Vec::new();
                    for b in &l.branches {
                        branches.push(Outcome {
                            probability: times(probability, &b.probability),
                            updates: b.updates.clone(),
                        });
                    }
                    for b in &r.branches {
                        branches.push(Outcome {
                            probability: times(&q, &b.probability),
                            updates: b.updates.clone(),
                        });
                    }
                    branches.retain(|b| !is_zero(&b.probability));
                    out.push(Alt { conds, branches });
                }
            }
            out
        }
        SubstKind::Parallel(items) => {
            let mut acc = vec![Alt {
                conds: vec![],
                branches: vec![Outcome::certain()],
            }];
            for item in items {
                let mine = normalize(item)?;
                let mut next = Vec::new();
                for a in &acc {
                    for m in &mine {
                        let mut conds = a.conds.clone();
                        conds.extend(m.conds.iter().cloned());
                        let mut branches = Vec::new();
                        for x in &a.branches {
                            for y in &m.branches {
                                let mut o = Outcome {
                                    probability: times(&x.probability, &y.probability),
                                    updates: x.updates.clone(),
                                };
                                for (v, e) in &y.updates {
                                    if o.updates.iter().any(|(w, _)| w == v) {
                                        return Err(TranslateError::Unsupported(format!(
                                            "parallel composition assigns `{v}` twice"
                                        )));
                                    }
                                    o.set(v, e.clone());
                                }
                                branches.push(o);
                            }
                        }
                        next.push(Alt { conds, branches });
                    }
                }
                acc = next;
            }
            acc
        }
        SubstKind::Sequence(items) => {
            let mut acc = vec![Alt {
                conds: vec![],
                branches: vec![Outcome::certain()],
            }];
            for item in items {
                let mine = normalize(item)?;
                let mut next = Vec::new();
                for a in &acc {
                    let conditional = mine.iter().any(|m| !m.conds.is_empty());
                    if conditional && a.branches.len() > 1 {
                        return Err(TranslateError::Unsupported(
                            "a conditional may not follow a probabilistic choice in a sequence"
                                .to_string(),
                        ));
                    }
                    for m in &mine {
                        let mut conds = a.conds.clone();
                        let mut branches = Vec::new();
                        for x in &a.branches {
                            let env = x.bindings();
                            if conditional {
                                conds.extend(m.conds.iter().map(|c| c.substitute(&env)));
                            }
                            for y in &m.branches {
                                let mut o = Outcome {
                                    probability: times(
                                        &x.probability,
                                        &y.probability.substitute(&env),
                                    ),
                                    updates: x.updates.clone(),
                                };
                                for (v, e) in &y.updates {
                                    o.set(v, e.substitute(&env));
                                }
                                branches.push(o);
                            }
                        }
                        next.push(Alt { conds, branches });
                    }
                }
                acc = next;
            }
            acc
        }
    })
}
