use std::collections::{BTreeMap, VecDeque};

use num_traits::Zero;
use rayon::prelude::*;

use crate::ast::Rational;

use super::ReachableMdp;

/// Backward-induction tables. `values[j][s]` is the minimal expected ξ after
/// `j` further steps from `s`; `decisions[j][s]` is the lowest-index choice
/// attaining it, `None` at absorbing states and for `j = 0`.
#[derive(Debug, Clone)]
pub struct Induction {
    pub values: Vec<Vec<Rational>>,
    pub decisions: Vec<Vec<Option<usize>>>,
}

impl Induction {
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    /// `W_k`: the minimum from the initial state after `k` steps.
    pub fn at_initial(&self, mdp: &ReachableMdp, k: usize) -> &Rational {
        &self.values[k][mdp.initial]
    }
}

/// Computes value tables for horizons `0..=horizon`. Absorbing states keep
/// their value, so a run that cannot move contributes its current ξ.
pub fn min_instantaneous_reward(mdp: &ReachableMdp, horizon: usize) -> Induction {
    let mut values = vec![mdp.xi.clone()];
    let mut decisions = vec![vec![None; mdp.len()]];
    for _ in 0..horizon {
        let prev = values.last().expect("layer zero exists");
        let (layer, chosen): (Vec<Rational>, Vec<Option<usize>>) = (0..mdp.len())
            .into_par_iter()
            .map(|s| {
                let mut best: Option<(Rational, usize)> = None;
                for (i, c) in mdp.choices[s].iter().enumerate() {
                    let v = c
                        .outcomes
                        .iter()
                        .fold(Rational::zero(), |acc, (p, t)| acc + p * &prev[*t]);
                    if best.as_ref().is_none_or(|(b, _)| v < *b) {
                        best = Some((v, i));
                    }
                }
                match best {
                    Some((v, i)) => (v, Some(i)),
                    None => (prev[s].clone(), None),
                }
            })
            .unzip();
        values.push(layer);
        decisions.push(chosen);
    }
    Induction { values, decisions }
}

/// A history-independent, step-dependent scheduler: the choice index taken
/// at `(state, steps remaining)`, for pairs reachable under itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduler {
    pub horizon: usize,
    pub decisions: BTreeMap<(usize, usize), usize>,
}

/// Restricts the minimizing decisions for `horizon` to what they reach from
/// the initial state.
pub fn extract_scheduler(mdp: &ReachableMdp, tables: &Induction, horizon: usize) -> Scheduler {
    let mut decisions = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::from([(mdp.initial, horizon)]);
    seen.insert((mdp.initial, horizon));
    while let Some((s, j)) = queue.pop_front() {
        if j == 0 {
            continue;
        }
        let Some(c) = tables.decisions[j][s] else {
            continue;
        };
        decisions.insert((s, j), c);
        for (_, t) in &mdp.choices[s][c].outcomes {
            if seen.insert((*t, j - 1)) {
                queue.push_back((*t, j - 1));
            }
        }
    }
    Scheduler { horizon, decisions }
}

/// Expected ξ after following `scheduler` for its horizon from the initial
/// state. `None` when the scheduler leaves a reachable non-absorbing pair
/// undecided.
pub fn replay(mdp: &ReachableMdp, scheduler: &Scheduler) -> Option<Rational> {
    let mut dist: BTreeMap<usize, Rational> =
        BTreeMap::from([(mdp.initial, Rational::from_integer(1.into()))]);
    for j in (1..=scheduler.horizon).rev() {
        let mut next: BTreeMap<usize, Rational> = BTreeMap::new();
        for (s, p) in dist {
            if mdp.is_absorbing(s) {
                *next.entry(s).or_insert_with(Rational::zero) += p;
                continue;
            }
            let c = *scheduler.decisions.get(&(s, j))?;
            for (q, t) in &mdp.choices[s].get(c)?.outcomes {
                *next.entry(*t).or_insert_with(Rational::zero) += &p * q;
            }
        }
        dist = next;
    }
    Some(
        dist.into_iter()
            .fold(Rational::zero(), |acc, (s, p)| acc + p * &mdp.xi[s]),
    )
}
