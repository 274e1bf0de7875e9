//! Expectation-transformer semantics over concrete states, and the proof
//! obligations `ξ ≤ wp.Op.ξ` and `e ≤ wp.INIT.ξ` checked by enumeration.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{
    evaluate, evaluate_bool, evaluate_rational, format_rational, EvalError, Expr, Machine,
    Rational, SubstKind, Substitution, TypeSet, Value,
};
use crate::exact;

/// A valuation of named variables and constants.
pub type Valuation = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WpError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The state lies outside the precondition of a `PRE` block.
    #[error("precondition does not hold")]
    PreconditionFalse,
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(String),
    #[error("distribution has total mass {0}, which exceeds 1")]
    MassExceedsOne(String),
    #[error("negative probability {0}")]
    NegativeProbability(String),
    #[error("variable `{0}` has no typing atom")]
    Untyped(String),
    #[error("variable `{0}` is REAL-typed and cannot be enumerated")]
    RealVariable(String),
    #[error("constant `{0}` is not bound")]
    UnboundConstant(String),
    #[error("bound constant `{name}` must be a non-negative integer, got {value}")]
    BadBound { name: String, value: String },
    #[error("PROPERTIES conjunct `{0}` is false for the given constants")]
    PropertyViolated(String),
}

type Post<'a> = dyn Fn(&Valuation) -> Result<Rational, WpError> + 'a;

/// `wp.sub.post` at `state`. The state must bind every identifier the
/// substitution and `post` read, constants included.
pub fn wp_eval(sub: &Substitution, post: &Expr, state: &Valuation) -> Result<Rational, WpError> {
    let k = |s: &Valuation| Ok(evaluate_rational(post, s)?);
    wp_with(sub, &k, state)
}

/// The transformer with an arbitrary post-expectation given as a function of
/// the final state.
fn wp_with(sub: &Substitution, post: &Post<'_>, state: &Valuation) -> Result<Rational, WpError> {
    match &sub.kind {
        SubstKind::Skip => post(state),
        SubstKind::Assign(x, f) => {
            let v = evaluate(f, state)?;
            let mut next = state.clone();
            next.insert(x.clone(), v);
            post(&next)
        }
        SubstKind::Sequence(items) => match items.split_first() {
            None => post(state),
            Some((first, rest)) => {
                let tail = |s: &Valuation| {
                    let rest = Substitution::sequence(rest.to_vec());
                    wp_with(&rest, post, s)
                };
                wp_with(first, &tail, state)
            }
        },
        SubstKind::Pre(p, body) => {
            if evaluate_bool(p, state)? {
                wp_with(body, post, state)
            } else {
                Err(WpError::PreconditionFalse)
            }
        }
        SubstKind::Begin(body) => wp_with(body, post, state),
        SubstKind::If {
            condition,
            then,
            otherwise,
        } => {
            if evaluate_bool(condition, state)? {
                wp_with(then, post, state)
            } else {
                wp_with(otherwise, post, state)
            }
        }
        SubstKind::Choice {
            probability,
            left,
            right,
        } => {
            let p = probability_at(probability, state)?;
            let l = wp_with(left, post, state)?;
            let r = wp_with(right, post, state)?;
            Ok(&p * l + (Rational::one() - &p) * r)
        }
        SubstKind::Parallel(_) => {
            let mut total = Rational::zero();
            for (p, next) in outcomes(sub, state)? {
                total += p * post(&next)?;
            }
            Ok(total)
        }
    }
}

fn probability_at(e: &Expr, state: &Valuation) -> Result<Rational, WpError> {
    let p = evaluate_rational(e, state)?;
    if p.is_negative() || p > Rational::one() {
        return Err(WpError::BadProbability(format_rational(&p)));
    }
    Ok(p)
}

/// Final-state distribution of `sub` started in `state`. Identical final
/// states are merged and zero-probability outcomes dropped.
pub fn outcomes(
    sub: &Substitution,
    state: &Valuation,
) -> Result<Vec<(Rational, Valuation)>, WpError> {
    let mut out = Vec::new();
    for (p, updates) in effects(sub, state)? {
        if p.is_zero() {
            continue;
        }
        let mut next = state.clone();
        next.extend(updates);
        match out.iter_mut().find(|(_, s)| *s == next) {
            Some((q, _)) => *q += p,
            None => out.push((p, next)),
        }
    }
    Ok(out)
}

/// Distribution over the sets of assignments `sub` performs.
fn effects(sub: &Substitution, state: &Valuation) -> Result<Vec<(Rational, Valuation)>, WpError> {
    Ok(match &sub.kind {
        SubstKind::Skip => vec![(Rational::one(), Valuation::new())],
        SubstKind::Assign(x, f) => {
            let mut u = Valuation::new();
            u.insert(x.clone(), evaluate(f, state)?);
            vec![(Rational::one(), u)]
        }
        SubstKind::Parallel(items) => {
            // Every component reads the pre-state.
            let mut acc = vec![(Rational::one(), Valuation::new())];
            for item in items {
                let mine = effects(item, state)?;
                let mut next = Vec::with_capacity(acc.len() * mine.len());
                for (p, u) in &acc {
                    for (q, v) in &mine {
                        let mut w = u.clone();
                        w.extend(v.iter().map(|(k, x)| (k.clone(), x.clone())));
                        next.push((p * q, w));
                    }
                }
                acc = next;
            }
            acc
        }
        SubstKind::Sequence(items) => {
            let mut acc = vec![(Rational::one(), Valuation::new())];
            for item in items {
                let mut next = Vec::new();
                for (p, u) in &acc {
                    let mut mid = state.clone();
                    mid.extend(u.iter().map(|(k, x)| (k.clone(), x.clone())));
                    for (q, v) in effects(item, &mid)? {
                        let mut w = u.clone();
                        w.extend(v);
                        next.push((p * q, w));
                    }
                }
                acc = next;
            }
            acc
        }
        SubstKind::Pre(p, body) => {
            if !evaluate_bool(p, state)? {
                return Err(WpError::PreconditionFalse);
            }
            effects(body, state)?
        }
        SubstKind::Begin(body) => effects(body, state)?,
        SubstKind::If {
            condition,
            then,
            otherwise,
        } => {
            if evaluate_bool(condition, state)? {
                effects(then, state)?
            } else {
                effects(otherwise, state)?
            }
        }
        SubstKind::Choice {
            probability,
            left,
            right,
        } => {
            let p = probability_at(probability, state)?;
            let q = Rational::one() - &p;
            let mut out: Vec<_> = effects(left, state)?
                .into_iter()
                .map(|(r, u)| (&p * r, u))
                .collect();
            out.extend(effects(right, state)?.into_iter().map(|(r, u)| (&q * r, u)));
            out
        }
    })
}

/// `Σ rv(s)·p(s)` over a sub-distribution.
pub fn expected_value(dist: &[(Valuation, Rational)], rv: &Expr) -> Result<Rational, WpError> {
    let mut mass = Rational::zero();
    let mut total = Rational::zero();
    for (s, p) in dist {
        if p.is_negative() {
            return Err(WpError::NegativeProbability(format_rational(p)));
        }
        mass += p;
        total += p * evaluate_rational(rv, s)?;
    }
    if mass > Rational::one() {
        return Err(WpError::MassExceedsOne(format_rational(&mass)));
    }
    Ok(total)
}

// ---- obligations ---------------------------------------------------------

/// Finite box of integer states, iterated in declaration order with the
/// first variable varying slowest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateBox {
    pub vars: Vec<BoxVar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxVar {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

impl StateBox {
    /// The ranges the translator declares: INT variables in `[-b, b]` and
    /// NATURAL variables in `[0, b]`, where `b` is the bound constant.
    pub fn for_machine(machine: &Machine, constants: &Valuation) -> Result<StateBox, WpError> {
        let name = machine.bound_name();
        let value = constants
            .get(name)
            .ok_or_else(|| WpError::UnboundConstant(name.to_string()))?;
        let bound = value
            .as_i64()
            .filter(|b| *b >= 0)
            .ok_or_else(|| WpError::BadBound {
                name: name.to_string(),
                value: value.to_string(),
            })?;
        let vars = machine
            .variables
            .iter()
            .map(|v| {
                let lo = match machine.variable_type(v) {
                    Some(TypeSet::Int) => -bound,
                    Some(TypeSet::Natural) => 0,
                    Some(TypeSet::Real) => return Err(WpError::RealVariable(v.clone())),
                    None => return Err(WpError::Untyped(v.clone())),
                };
                Ok(BoxVar {
                    name: v.clone(),
                    lo,
                    hi: bound,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(StateBox { vars })
    }

    pub fn len(&self) -> u128 {
        self.vars
            .iter()
            .map(|v| (v.hi - v.lo + 1).max(0) as u128)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `index`-th state in iteration order.
    pub fn state(&self, mut index: u128) -> Vec<i64> {
        let mut out = vec![0; self.vars.len()];
        for (slot, v) in out.iter_mut().zip(&self.vars).rev() {
            let width = (v.hi - v.lo + 1) as u128;
            *slot = v.lo + (index % width) as i64;
            index /= width;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
        })
    }
}

/// A state where `ξ(s) > wp.Op.ξ(s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "exact::assignment")]
    pub state: Vec<(String, i64)>,
    #[serde(serialize_with = "exact::rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "exact::rational")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObligationReport {
    pub operation: String,
    pub verdict: Verdict,
    /// Failing states, capped.
    pub witnesses: Vec<Witness>,
    /// Number of box states satisfying the invariant and the precondition.
    pub checked: u64,
    /// Number of failing states, including those beyond the cap.
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InitCheck {
    #[serde(serialize_with = "exact::rational")]
    pub e: Rational,
    #[serde(serialize_with = "exact::rational")]
    pub wp_init: Rational,
    pub verdict: Verdict,
}

/// Result of checking every obligation of a machine over a box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Obligations {
    pub machine: String,
    #[serde(serialize_with = "exact::valuation")]
    pub constants: Valuation,
    pub state_box: StateBox,
    pub init: InitCheck,
    pub operations: Vec<ObligationReport>,
}

impl Obligations {
    pub fn all_hold(&self) -> bool {
        self.init.verdict == Verdict::Holds
            && self.operations.iter().all(|o| o.verdict == Verdict::Holds)
    }

    pub fn failing(&self) -> impl Iterator<Item = &ObligationReport> {
        self.operations
            .iter()
            .filter(|o| o.verdict == Verdict::Fails)
    }
}

pub const DEFAULT_WITNESS_CAP: usize = 10;

/// Checks `e ≤ wp.INIT.ξ` and `ξ ≤ wp.Op.ξ` for every operation, at every box
/// state that satisfies the non-typing invariant and the operation's
/// precondition.
pub fn check_obligations(
    machine: &Machine,
    constants: &Valuation,
    state_box: &StateBox,
    witness_cap: usize,
) -> Result<Obligations, WpError> {
    check_properties(machine, constants)?;
    let xi = &machine.expectations.random_variable;

    let e = evaluate_rational(&machine.expectations.initial, constants)
        .map_err(|err| unbound_as_constant(err, machine))?;
    let wp_init = wp_eval(&machine.initialisation, xi, constants)
        .map_err(|err| unbound_as_constant_wp(err, machine))?;
    let init = InitCheck {
        verdict: if e <= wp_init {
            Verdict::Holds
        } else {
            Verdict::Fails
        },
        e,
        wp_init,
    };

    // States satisfying the invariant, shared by all operations.
    let invariant: Vec<&Expr> = machine.invariant_predicates().collect();
    let n = state_box.len();
    let admissible: Vec<Valuation> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = valuation(state_box, &state_box.state(i), constants);
            for c in &invariant {
                if !evaluate_bool(c, &s).map_err(|err| unbound_as_constant(err, machine))? {
                    return Ok(None);
                }
            }
            Ok(Some(s))
        })
        .collect::<Result<Vec<_>, WpError>>()?
        .into_iter()
        .flatten()
        .collect();

    let operations = machine
        .operations
        .iter()
        .map(|op| {
            let results: Vec<Option<(Rational, Rational)>> = admissible
                .par_iter()
                .map(|s| {
                    let rhs = match wp_eval(&op.body, xi, s) {
                        Ok(r) => r,
                        Err(WpError::PreconditionFalse) => return Ok(None),
                        Err(err) => return Err(unbound_as_constant_wp(err, machine)),
                    };
                    let lhs = evaluate_rational(xi, s)?;
                    Ok(Some((lhs, rhs)))
                })
                .collect::<Result<_, WpError>>()?;
            let mut report = ObligationReport {
                operation: op.name.clone(),
                verdict: Verdict::Holds,
                witnesses: Vec::new(),
                checked: 0,
                failures: 0,
            };
            for (s, r) in admissible.iter().zip(results) {
                let Some((lhs, rhs)) = r else { continue };
                report.checked += 1;
                if lhs > rhs {
                    report.verdict = Verdict::Fails;
                    report.failures += 1;
                    if report.witnesses.len() < witness_cap {
                        report.witnesses.push(Witness {
                            state: state_box
                                .vars
                                .iter()
                                .map(|v| (v.name.clone(), s[&v.name].as_i64().unwrap()))
                                .collect(),
                            lhs,
                            rhs,
                        });
                    }
                }
            }
            Ok(report)
        })
        .collect::<Result<_, WpError>>()?;

    Ok(Obligations {
        machine: machine.name.clone(),
        constants: constants.clone(),
        state_box: state_box.clone(),
        init,
        operations,
    })
}

/// Fails unless every PROPERTIES predicate holds for the bound constants.
pub fn check_properties(machine: &Machine, constants: &Valuation) -> Result<(), WpError> {
    for p in &machine.properties {
        let holds = evaluate_bool(p, constants).map_err(|err| unbound_as_constant(err, machine))?;
        if !holds {
            return Err(WpError::PropertyViolated(p.to_string()));
        }
    }
    Ok(())
}

fn valuation(state_box: &StateBox, values: &[i64], constants: &Valuation) -> Valuation {
    let mut s = constants.clone();
    for (v, x) in state_box.vars.iter().zip(values) {
        s.insert(v.name.clone(), Value::Int(BigInt::from(*x)));
    }
    s
}

fn unbound_as_constant(err: EvalError, machine: &Machine) -> WpError {
    match err {
        EvalError::Unbound(name) if machine.is_constant(&name) => WpError::UnboundConstant(name),
        other => WpError::Eval(other),
    }
}

fn unbound_as_constant_wp(err: WpError, machine: &Machine) -> WpError {
    match err {
        WpError::Eval(e) => unbound_as_constant(e, machine),
        other => other,
    }
}

/// Integer view of a witness value for display.
pub fn witness_value(w: &Witness, name: &str) -> Option<i64> {
    w.state.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
}
