use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::ast::{
    evaluate, evaluate_bool, evaluate_rational, format_rational, Env, Expr, Rational, Value,
};
use crate::prism::{ConstType, GuardedCommand, PrismModel};
use crate::wp::Valuation;

use super::MdpError;

pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub state_cap: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// A nondeterministic alternative: one command, or a synchronized pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Choice {
    /// Action label; empty for an unlabeled command.
    pub action: String,
    /// Position in the model's choice order: main-module commands first,
    /// then counter-only commands.
    pub template: usize,
    /// Successor indices with positive probabilities summing to one.
    pub outcomes: Vec<(Rational, usize)>,
}

#[derive(Debug, Clone)]
pub struct ReachableMdp {
    /// Main-module variables, then the counter.
    pub variables: Vec<String>,
    pub ranges: Vec<(i64, i64)>,
    pub states: Vec<Box<[i64]>>,
    /// Enabled choices per state; empty for absorbing states.
    pub choices: Vec<Vec<Choice>>,
    pub initial: usize,
    /// ξ at every state, unpadded.
    pub xi: Vec<Rational>,
    pub constants: Valuation,
}

impl ReachableMdp {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[i64]) -> Option<usize> {
        self.states.iter().position(|s| &s[..] == state)
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        self.choices[s].is_empty()
    }

    pub fn describe(&self, s: usize) -> Vec<(String, i64)> {
        self.variables
            .iter()
            .cloned()
            .zip(self.states[s].iter().copied())
            .collect()
    }

    pub fn value_of(&self, s: usize, var: &str) -> Option<i64> {
        let i = self.variables.iter().position(|v| v == var)?;
        Some(self.states[s][i])
    }
}

fn show(vars: &[String], state: &[i64]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(state)
        .map(|(v, x)| format!("{v}={x}"))
        .collect();
    format!("({})", parts.join(", "))
}

struct Layout<'a> {
    index: HashMap<&'a str, usize>,
    constants: &'a Valuation,
    formulas: HashMap<&'a str, &'a Expr>,
}

struct StateEnv<'a> {
    layout: &'a Layout<'a>,
    state: &'a [i64],
}

impl Env for StateEnv<'_> {
    fn lookup(&self, name: &str) -> Option<Value> {
        if let Some(&i) = self.layout.index.get(name) {
            return Some(Value::Int(BigInt::from(self.state[i])));
        }
        if let Some(v) = self.layout.constants.get(name) {
            return Some(v.clone());
        }
        let f = self.layout.formulas.get(name)?;
        evaluate(f, self).ok()
    }
}

/// A choice shape: a main command with an optional synchronized counter
/// command, or a counter command alone.
#[derive(Debug, Clone, Copy)]
enum Template {
    Main(usize, Option<usize>),
    Counter(usize),
}

fn templates(model: &PrismModel) -> Vec<Template> {
    let main = &model.main.commands;
    let counter = &model.counter.commands;
    let in_main = |a: &str| !a.is_empty() && main.iter().any(|c| c.action == a);
    let in_counter = |a: &str| !a.is_empty() && counter.iter().any(|c| c.action == a);
    let mut out = Vec::new();
    for (i, c) in main.iter().enumerate() {
        if in_counter(&c.action) {
            for (j, d) in counter.iter().enumerate() {
                if d.action == c.action {
                    out.push(Template::Main(i, Some(j)));
                }
            }
        } else {
            out.push(Template::Main(i, None));
        }
    }
    for (j, d) in counter.iter().enumerate() {
        if !in_main(&d.action) {
            out.push(Template::Counter(j));
        }
    }
    out
}

/// Checks the bindings and returns them with their declared types applied.
fn bind_constants(model: &PrismModel, given: &Valuation) -> Result<Valuation, MdpError> {
    for name in given.keys() {
        if model.constant(name).is_none() {
            return Err(MdpError::UnknownConstant(name.clone()));
        }
    }
    let mut out = Valuation::new();
    for c in &model.constants {
        let value = match (&c.value, given.get(&c.name)) {
            (_, Some(v)) => v.clone(),
            (Some(e), None) => evaluate(e, &out)?,
            (None, None) => return Err(MdpError::UnboundConstant(c.name.clone())),
        };
        let value = match c.ty {
            ConstType::Int => {
                Value::Int(value.as_integer().ok_or_else(|| MdpError::BadConstant {
                    name: c.name.clone(),
                    value: value.to_string(),
                    expected: "an integer",
                })?)
            }
            ConstType::Double => match value.as_rational() {
                Some(r) => Value::Rat(r),
                None => {
                    return Err(MdpError::BadConstant {
                        name: c.name.clone(),
                        value: value.to_string(),
                        expected: "a number",
                    })
                }
            },
        };
        out.insert(c.name.clone(), value);
    }
    Ok(out)
}

fn to_i64(v: &Value, name: &str) -> Result<i64, MdpError> {
    v.as_i64().ok_or_else(|| MdpError::BadConstant {
        name: name.to_string(),
        value: v.to_string(),
        expected: "a machine integer",
    })
}

type RawChoice = (usize, Vec<(Rational, Vec<i64>)>);

/// Builds the reachable part of the model's MDP under the given constants,
/// which must include `MAX_COUNT`.
pub fn build_mdp(
    model: &PrismModel,
    constants: &Valuation,
    options: BuildOptions,
) -> Result<ReachableMdp, MdpError> {
    let constants = bind_constants(model, constants)?;
    let decls: Vec<_> = model
        .modules()
        .into_iter()
        .flat_map(|m| &m.variables)
        .collect();
    let variables: Vec<String> = decls.iter().map(|d| d.name.clone()).collect();

    let mut ranges = Vec::new();
    let mut initial = Vec::new();
    for d in &decls {
        let lo = to_i64(&evaluate(&d.low, &constants)?, &d.name)?;
        let hi = to_i64(&evaluate(&d.high, &constants)?, &d.name)?;
        if lo > hi {
            return Err(MdpError::EmptyRange {
                name: d.name.clone(),
                low: lo,
                high: hi,
            });
        }
        ranges.push((lo, hi));
        let init = to_i64(&evaluate(&d.init, &constants)?, &d.name)?;
        if init < lo || init > hi {
            return Err(MdpError::OutOfRange {
                name: d.name.clone(),
                value: init.to_string(),
                low: lo,
                high: hi,
                state: "initial".to_string(),
                action: "init".to_string(),
            });
        }
        initial.push(init);
    }

    let layout = Layout {
        index: variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect(),
        constants: &constants,
        formulas: model
            .formulas
            .iter()
            .map(|f| (f.name.as_str(), &f.predicate))
            .collect(),
    };
    let templates = templates(model);

    let mut states: Vec<Box<[i64]>> = vec![initial.clone().into_boxed_slice()];
    let mut index: HashMap<Box<[i64]>, usize> = HashMap::new();
    index.insert(initial.into_boxed_slice(), 0);
    let mut choices: Vec<Vec<Choice>> = Vec::new();
    let mut frontier = 0..1;

    while !frontier.is_empty() {
        let raw: Vec<Vec<RawChoice>> = states[frontier.clone()]
            .par_iter()
            .map(|s| expand(model, &templates, &layout, &variables, &ranges, s))
            .collect::<Result<_, _>>()?;
        let next_start = states.len();
        for per_state in raw {
            let mut list = Vec::with_capacity(per_state.len());
            for (template, outcomes) in per_state {
                let action = match templates[template] {
                    Template::Main(i, _) => model.main.commands[i].action.clone(),
                    Template::Counter(j) => model.counter.commands[j].action.clone(),
                };
                let mut resolved: Vec<(Rational, usize)> = Vec::with_capacity(outcomes.len());
                for (p, succ) in outcomes {
                    let succ = succ.into_boxed_slice();
                    let id = match index.get(&succ) {
                        Some(&id) => id,
                        None => {
                            let id = states.len();
                            if id >= options.state_cap {
                                return Err(MdpError::StateCap(options.state_cap));
                            }
                            index.insert(succ.clone(), id);
                            states.push(succ);
                            id
                        }
                    };
                    match resolved.iter_mut().find(|(_, t)| *t == id) {
                        Some((q, _)) => *q += p,
                        None => resolved.push((p, id)),
                    }
                }
                list.push(Choice {
                    action,
                    template,
                    outcomes: resolved,
                });
            }
            choices.push(list);
        }
        frontier = next_start..states.len();
    }

    let xi = states
        .par_iter()
        .map(|s| {
            let env = StateEnv {
                layout: &layout,
                state: s,
            };
            evaluate_rational(&model.random_variable, &env)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ReachableMdp {
        variables,
        ranges,
        states,
        choices,
        initial: 0,
        xi,
        constants,
    })
}

/// Enabled choices of one state with their successor distributions.
fn expand(
    model: &PrismModel,
    templates: &[Template],
    layout: &Layout<'_>,
    variables: &[String],
    ranges: &[(i64, i64)],
    state: &[i64],
) -> Result<Vec<RawChoice>, MdpError> {
    let env = StateEnv { layout, state };
    let enabled = |c: &GuardedCommand| -> Result<bool, MdpError> {
        for g in &c.guard {
            if !evaluate_bool(g, &env)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut out = Vec::new();
    for (t, template) in templates.iter().enumerate() {
        let parts: Vec<&GuardedCommand> = match *template {
            Template::Main(i, j) => {
                let mut v = vec![&model.main.commands[i]];
                v.extend(j.map(|j| &model.counter.commands[j]));
                v
            }
            Template::Counter(j) => vec![&model.counter.commands[j]],
        };
        let mut all = true;
        for c in &parts {
            if !enabled(c)? {
                all = false;
                break;
            }
        }
        if !all {
            continue;
        }
        let action = &parts[0].action;
        let mut dist: Vec<(Rational, Vec<i64>)> = vec![(Rational::one(), state.to_vec())];
        for c in &parts {
            let mut mass = Rational::zero();
            let mut next = Vec::new();
            for b in &c.branches {
                let p = evaluate_rational(&b.probability, &env)?;
                if p.is_negative() || p > Rational::one() {
                    return Err(MdpError::BadProbability {
                        action: action.clone(),
                        value: format_rational(&p),
                        state: show(variables, state),
                    });
                }
                mass += &p;
                let mut updates = Vec::with_capacity(b.updates.len());
                for (var, e) in &b.updates {
                    let i = layout.index[var.as_str()];
                    let v = evaluate(e, &env)?;
                    let (lo, hi) = ranges[i];
                    let x = v.as_i64().filter(|x| *x >= lo && *x <= hi).ok_or_else(|| {
                        MdpError::OutOfRange {
                            name: var.clone(),
                            value: v.to_string(),
                            low: lo,
                            high: hi,
                            state: show(variables, state),
                            action: action.clone(),
                        }
                    })?;
                    updates.push((i, x));
                }
                if p.is_zero() {
                    continue;
                }
                for (q, s) in &dist {
                    let mut s = s.clone();
                    for &(i, x) in &updates {
                        s[i] = x;
                    }
                    next.push((q * &p, s));
                }
            }
            if !mass.is_one() {
                return Err(MdpError::MassNotOne {
                    action: action.clone(),
                    mass: format_rational(&mass),
                    state: show(variables, state),
                });
            }
            dist = next;
        }
        out.push((t, dist));
    }
    Ok(out)
}
