//! Test oracles shared by the integration suites: a forward semantics of
//! machines that bypasses the PRISM translation, an exhaustive enumerator of
//! time-dependent deterministic policies, and a seeded machine generator.
#![allow(dead_code)]

pub mod generate;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use pbcheck_core::ast::{evaluate_rational, TypeSet};
use pbcheck_core::wp::{outcomes, WpError};
use pbcheck_core::{parse_machine, Machine, Rational, Valuation, Value};

pub const LIBRARY_UNSAFE: &str = include_str!("../../examples/library_unsafe.pb");
pub const LIBRARY_SAFE: &str = include_str!("../../examples/library_safe.pb");
pub const DEMON: &str = include_str!("../../examples/demon.pb");

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn bind(pairs: &[(&str, Value)]) -> Valuation {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

pub fn library_constants(total_books: i64) -> Valuation {
    bind(&[
        ("totalBooks", Value::int(total_books)),
        ("cost", Value::int(1)),
        ("pp", Value::ratio(1, 2)),
    ])
}

pub fn machine(src: &str) -> Machine {
    parse_machine(src).unwrap_or_else(|e| panic!("{e:?}\n{src}"))
}

/// A machine state plus the step counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub vars: Valuation,
    pub count: u64,
}

impl Node {
    fn key(&self) -> String {
        format!("{:?}@{}", self.vars, self.count)
    }
}

type Distribution = Vec<(Rational, Node)>;

/// Step semantics read straight off the machine: an operation is enabled
/// when its precondition holds and every outcome stays in the bounded box;
/// idle is always enabled; nothing moves once `count = max_count + 1`.
/// Invariant atoms are not re-checked, so this agrees with the translated
/// model only on machines whose invariant holds in every reachable state.
pub struct Oracle {
    machine: Machine,
    constants: Valuation,
    max_count: u64,
    ranges: BTreeMap<String, (i64, i64)>,
    cache: HashMap<String, Vec<Distribution>>,
}

impl Oracle {
    pub fn new(machine: Machine, constants: Valuation, max_count: u64) -> Oracle {
        let b = constants[machine.bound_name()]
            .as_i64()
            .expect("integer bound");
        let mut ranges = BTreeMap::new();
        for v in &machine.variables {
            let lo = match machine.variable_type(v) {
                Some(TypeSet::Natural) => 0,
                _ => -b,
            };
            ranges.insert(v.clone(), (lo, b));
        }
        for o in machine.undeclared_outputs() {
            ranges.insert(o, (-b, b));
        }
        Oracle {
            machine,
            constants,
            max_count,
            ranges,
            cache: HashMap::new(),
        }
    }

    fn with_constants(&self, vars: &Valuation) -> Valuation {
        let mut s = self.constants.clone();
        s.extend(vars.iter().map(|(k, v)| (k.clone(), v.clone())));
        s
    }

    fn strip(&self, full: Valuation) -> Valuation {
        full.into_iter()
            .filter(|(k, _)| self.ranges.contains_key(k))
            .collect()
    }

    pub fn initial(&self) -> Node {
        let dist = outcomes(&self.machine.initialisation, &self.constants).unwrap();
        assert_eq!(dist.len(), 1, "deterministic initialisation");
        let mut vars = self.strip(dist.into_iter().next().unwrap().1);
        for o in self.machine.undeclared_outputs() {
            vars.insert(o, Value::int(0));
        }
        Node { vars, count: 0 }
    }

    pub fn xi(&self, node: &Node) -> Rational {
        evaluate_rational(
            &self.machine.expectations.random_variable,
            &self.with_constants(&node.vars),
        )
        .unwrap()
    }

    pub fn e(&self) -> Rational {
        evaluate_rational(&self.machine.expectations.initial, &self.constants).unwrap()
    }

    fn in_box(&self, vars: &Valuation) -> bool {
        self.ranges.iter().all(|(name, &(lo, hi))| {
            vars.get(name)
                .and_then(Value::as_i64)
                .is_some_and(|x| lo <= x && x <= hi)
        })
    }

    /// Enabled operations in declaration order, then idle.
    pub fn choices(&mut self, node: &Node) -> Vec<Distribution> {
        let key = node.key();
        if let Some(c) = self.cache.get(&key) {
            return c.clone();
        }
        let mut out = Vec::new();
        if node.count <= self.max_count {
            let state = self.with_constants(&node.vars);
            for op in &self.machine.operations {
                let dist = match outcomes(&op.body, &state) {
                    Ok(d) => d,
                    Err(WpError::PreconditionFalse) => continue,
                    Err(e) => panic!("{e}"),
                };
                let mut next: Distribution = Vec::new();
                let mut ok = true;
                for (p, s) in dist {
                    let vars = self.strip(s);
                    if !self.in_box(&vars) {
                        ok = false;
                        break;
                    }
                    let t = Node {
                        vars,
                        count: node.count + 1,
                    };
                    match next.iter_mut().find(|(_, u)| *u == t) {
                        Some((q, _)) => *q += p,
                        None => next.push((p, t)),
                    }
                }
                if ok {
                    next.retain(|(p, _)| !p.is_zero());
                    out.push(next);
                }
            }
            out.push(vec![(
                Rational::one(),
                Node {
                    vars: node.vars.clone(),
                    count: node.count + 1,
                },
            )]);
        }
        self.cache.insert(key, out.clone());
        out
    }

    /// Number of states reachable from the initial one.
    pub fn reachable(&mut self) -> usize {
        let mut seen = HashMap::new();
        let mut stack = vec![self.initial()];
        while let Some(n) = stack.pop() {
            if seen.insert(n.key(), ()).is_some() {
                continue;
            }
            for c in self.choices(&n) {
                stack.extend(c.into_iter().map(|(_, t)| t));
            }
        }
        seen.len()
    }

    /// Minimum over every history-dependent schedule, by unmemoized search of
    /// the execution tree.
    pub fn tree_min(&mut self, node: &Node, steps: usize) -> Rational {
        let choices = self.choices(node);
        if steps == 0 || choices.is_empty() {
            return self.xi(node);
        }
        choices
            .iter()
            .map(|d| {
                d.iter()
                    .map(|(p, t)| p * self.tree_min(t, steps - 1))
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .min()
            .unwrap()
    }

    /// Enumerates every deterministic policy mapping (state, step) to a
    /// choice, restricted to the pairs it reaches, and returns the least
    /// expected ξ after `steps` steps with the number of policies evaluated.
    /// `None` when more than `budget` policies exist.
    pub fn enumerate_policies(&mut self, steps: usize, budget: u64) -> Option<(Rational, u64)> {
        let start = vec![(Rational::one(), self.initial())];
        let mut best: Option<Rational> = None;
        let mut count = 0;
        self.level(start, steps, budget, &mut count, &mut best)
            .then(|| (best.unwrap(), count))
    }

    fn level(
        &mut self,
        dist: Distribution,
        steps: usize,
        budget: u64,
        count: &mut u64,
        best: &mut Option<Rational>,
    ) -> bool {
        if steps == 0 {
            *count += 1;
            if *count > budget {
                return false;
            }
            let v = dist
                .iter()
                .fold(Rational::zero(), |a, (p, n)| a + p * self.xi(n));
            if best.as_ref().is_none_or(|b| v < *b) {
                *best = Some(v);
            }
            return true;
        }
        let options: Vec<Vec<Distribution>> = dist.iter().map(|(_, n)| self.choices(n)).collect();
        let mut pick = vec![0usize; dist.len()];
        loop {
            let mut next: Distribution = Vec::new();
            for (i, (p, n)) in dist.iter().enumerate() {
                let moves: Distribution = if options[i].is_empty() {
                    vec![(Rational::one(), n.clone())]
                } else {
                    options[i][pick[i]].clone()
                };
                for (q, t) in moves {
                    let mass = p * q;
                    match next.iter_mut().find(|(_, u)| *u == t) {
                        Some((r, _)) => *r += mass,
                        None => next.push((mass, t)),
                    }
                }
            }
            if !self.level(next, steps - 1, budget, count, best) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == pick.len() {
                    return true;
                }
                pick[i] += 1;
                if pick[i] < options[i].len().max(1) {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    }
}
