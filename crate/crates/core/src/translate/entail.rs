//! Linear entailment by Fourier-Motzkin elimination over the rationals, with
//! strict inequalities tightened when every term is integral.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ast::{BinOp, CmpOp, Expr, ExprKind, Rational};

/// `Σ coeffs[v]·v + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Linear {
    pub coeffs: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl Linear {
    fn constant(c: Rational) -> Self {
        Linear {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), Rational::one());
        Linear {
            coeffs,
            constant: Rational::zero(),
        }
    }

    fn scale(mut self, k: &Rational) -> Self {
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    fn plus(mut self, other: &Linear, k: &Rational) -> Self {
        for (v, c) in &other.coeffs {
            *self.coeffs.entry(v.clone()).or_insert_with(Rational::zero) += c * k;
        }
        self.constant += &other.constant * k;
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Linear form of an arithmetic expression; `None` if it is not linear.
    pub fn of(e: &Expr) -> Option<Linear> {
        Some(match &e.kind {
            ExprKind::Var(v) => Linear::var(v),
            ExprKind::Int(i) => Linear::constant(Rational::from_integer(i.clone())),
            ExprKind::Rat(r) => Linear::constant(r.clone()),
            ExprKind::Neg(inner) => Linear::of(inner)?.scale(&-Rational::one()),
            ExprKind::Binary(op, l, r) => {
                let a = Linear::of(l)?;
                let b = Linear::of(r)?;
                match op {
                    BinOp::Add => a.plus(&b, &Rational::one()),
                    BinOp::Sub => a.plus(&b, &-Rational::one()),
                    BinOp::Mul if a.is_constant() => b.scale(&a.constant),
                    BinOp::Mul if b.is_constant() => a.scale(&b.constant),
                    BinOp::Mul => return None,
                }
            }
            _ => return None,
        })
    }
}

/// `expr ≥ 0`, or `expr > 0` when strict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Constraint {
    pub expr: Linear,
    pub strict: bool,
}

/// Constraints equivalent to the comparison `e`, or `None` if it is not a
/// linear comparison.
pub(crate) fn constraints_of(e: &Expr) -> Option<Vec<Constraint>> {
    let ExprKind::Compare(op, l, r) = &e.kind else {
        return None;
    };
    let l = Linear::of(l)?;
    let r = Linear::of(r)?;
    let minus = -Rational::one();
    let l_minus_r = l.clone().plus(&r, &minus);
    let r_minus_l = r.plus(&l, &minus);
    let c = |expr: Linear, strict| Constraint { expr, strict };
    Some(match op {
        CmpOp::Lt => vec![c(r_minus_l, true)],
        CmpOp::Le => vec![c(r_minus_l, false)],
        CmpOp::Gt => vec![c(l_minus_r, true)],
        CmpOp::Ge => vec![c(l_minus_r, false)],
        CmpOp::Eq => vec![c(l_minus_r, false), c(r_minus_l, false)],
    })
}

/// Negation of a single comparison as constraints; `None` for equalities,
/// whose negation is not convex.
fn negation_of(e: &Expr) -> Option<Vec<Constraint>> {
    let ExprKind::Compare(op, l, r) = &e.kind else {
        return None;
    };
    let negated = Expr::compare(op.complement()?, (**l).clone(), (**r).clone());
    constraints_of(&negated)
}

/// Decides entailment of linear goals from a linear context.
pub(crate) struct Entailment {
    context: Vec<Constraint>,
    integral: BTreeSet<String>,
    cap: usize,
}

/// Constraint count past which elimination gives up and reports "not
/// implied".
pub(crate) const DEFAULT_CAP: usize = 4096;

impl Entailment {
    /// `integral` names the identifiers known to take integer values.
    pub fn new(integral: BTreeSet<String>) -> Self {
        Entailment {
            context: Vec::new(),
            integral,
            cap: DEFAULT_CAP,
        }
    }

    /// Adds a fact. Non-linear facts are ignored, which only weakens the
    /// context.
    pub fn assume(&mut self, fact: &Expr) {
        for conjunct in fact.conjuncts() {
            if let Some(cs) = constraints_of(conjunct) {
                self.context.extend(cs);
            }
        }
    }

    /// Whether the context implies `goal`. Answers `false` when unsure.
    pub fn implies(&self, goal: &Expr) -> bool {
        let Some(negated) = negation_of(goal) else {
            return false;
        };
        let mut system: Vec<Constraint> = self.context.clone();
        system.extend(negated);
        let system = system.into_iter().map(|c| self.tighten(c)).collect();
        infeasible(system, self.cap)
    }

    /// Over integer-valued terms, `e > 0` becomes `e - 1 ≥ 0` after scaling
    /// the coefficients to coprime integers.
    fn tighten(&self, c: Constraint) -> Constraint {
        let integral = c.expr.coeffs.keys().all(|v| self.integral.contains(v));
        if !integral {
            return c;
        }
        let lcm = c
            .expr
            .coeffs
            .values()
            .chain(std::iter::once(&c.expr.constant))
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let mut expr = c.expr.scale(&Rational::from_integer(lcm));
        let gcd = expr
            .coeffs
            .values()
            .fold(BigInt::zero(), |acc, r| acc.gcd(r.numer()));
        if gcd.is_zero() {
            return Constraint {
                expr,
                strict: c.strict,
            };
        }
        // Σ a·v + k ≥ 0 with g = gcd(a) holds iff Σ (a/g)·v + ⌊k/g⌋ ≥ 0.
        let k = expr.constant.to_integer();
        let k = if c.strict { k - 1 } else { k };
        let floor = k.div_floor(&gcd);
        for a in expr.coeffs.values_mut() {
            *a = Rational::from_integer(a.numer() / &gcd);
        }
        expr.constant = Rational::from_integer(floor);
        Constraint {
            expr,
            strict: false,
        }
    }
}

/// Whether the conjunction of constraints has no rational solution.
fn infeasible(mut system: Vec<Constraint>, cap: usize) -> bool {
    loop {
        for c in &system {
            if c.expr.is_constant() {
                let k = &c.expr.constant;
                if k.is_negative() || (c.strict && k.is_zero()) {
                    return true;
                }
            }
        }
        system.retain(|c| !c.expr.is_constant());
        system.dedup();
        let Some(var) = pick_variable(&system) else {
            return false;
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in system {
            match c.expr.coeffs.get(&var).map(|a| a.is_positive()) {
                Some(true) => pos.push(c),
                Some(false) => neg.push(c),
                None => rest.push(c),
            }
        }
        if rest.len() + pos.len() * neg.len() > cap {
            return false;
        }
        for p in &pos {
            let a = p.expr.coeffs[&var].clone();
            for n in &neg {
                let b = -n.expr.coeffs[&var].clone();
                // b·p + a·n eliminates `var`.
                let expr = p.expr.clone().scale(&b).plus(&n.expr, &a);
                rest.push(Constraint {
                    expr,
                    strict: p.strict || n.strict,
                });
            }
        }
        system = rest;
    }
}

/// The variable whose elimination creates the fewest new constraints.
fn pick_variable(system: &[Constraint]) -> Option<String> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in system {
        for (v, a) in &c.expr.coeffs {
            let e = counts.entry(v).or_default();
            if a.is_positive() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(_, (p, n))| p * n)
        .map(|(v, _)| v.to_string())
}
