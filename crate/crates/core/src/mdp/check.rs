use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::ast::{evaluate_rational, format_rational, Machine, Rational, Value};
use crate::error::Error;
use crate::exact;
use crate::prism::{PrismModel, MAX_COUNT};
use crate::translate::translate;
use crate::wp::{check_properties, Valuation};

use super::{
    build_mdp, extract_scheduler, min_instantaneous_reward, BuildOptions, MdpError, ReachableMdp,
    Scheduler, DEFAULT_STATE_CAP,
};

/// Version of the serialized report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckVerdict {
    /// No violation within the checked horizons.
    #[serde(rename = "SAFE-UP-TO-BOUND")]
    Safe,
    #[serde(rename = "UNSAFE")]
    Unsafe,
}

impl fmt::Display for CheckVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckVerdict::Safe => "SAFE-UP-TO-BOUND",
            CheckVerdict::Unsafe => "UNSAFE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub state_cap: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// `W_k` and the padded reward `W_k + MAX_COUNT` a model checker reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HorizonValue {
    pub k: usize,
    #[serde(serialize_with = "exact::rational")]
    pub value: Rational,
    #[serde(serialize_with = "exact::rational")]
    pub padded: Rational,
}

/// One decision of the minimizing scheduler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchedulerStep {
    pub steps_remaining: usize,
    #[serde(serialize_with = "exact::assignment")]
    pub state: Vec<(String, i64)>,
    /// Action label; empty for the idle step.
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub machine: String,
    #[serde(serialize_with = "exact::valuation")]
    pub constants: Valuation,
    pub max_count: u64,
    #[serde(serialize_with = "exact::rational")]
    pub initial_expectation: Rational,
    pub reachable_states: usize,
    pub horizons: Vec<HorizonValue>,
    pub verdict: CheckVerdict,
    pub first_violating_horizon: Option<usize>,
    /// Present exactly when the verdict is unsafe.
    pub scheduler: Option<Vec<SchedulerStep>>,
}

impl CheckReport {
    pub fn value_at(&self, k: usize) -> Option<&Rational> {
        self.horizons.get(k).map(|h| &h.value)
    }
}

/// Translates and checks a machine for horizons `0..=max_count + 1`.
pub fn check_expectations(
    machine: &Machine,
    constants: &Valuation,
    max_count: u64,
    options: CheckOptions,
) -> Result<CheckReport, Error> {
    check_properties(machine, constants)?;
    let model = translate(machine)?;
    Ok(check_model(&model, constants, max_count, options)?)
}

/// Checks an already translated model. `constants` must bind every model
/// constant except `MAX_COUNT`.
pub fn check_model(
    model: &PrismModel,
    constants: &Valuation,
    max_count: u64,
    options: CheckOptions,
) -> Result<CheckReport, MdpError> {
    if constants.contains_key(MAX_COUNT) {
        return Err(MdpError::BadConstant {
            name: MAX_COUNT.to_string(),
            value: constants[MAX_COUNT].to_string(),
            expected: "given as the maximum count, not as a constant",
        });
    }
    let mut bound = constants.clone();
    bound.insert(MAX_COUNT.to_string(), Value::Int(BigInt::from(max_count)));
    let mdp = build_mdp(
        model,
        &bound,
        BuildOptions {
            state_cap: options.state_cap,
        },
    )?;
    let e = evaluate_rational(&model.initial, &mdp.constants)?;
    let horizon = usize::try_from(max_count).expect("count fits in memory") + 1;
    let tables = min_instantaneous_reward(&mdp, horizon);
    let offset = Rational::from_integer(BigInt::from(max_count));
    let horizons: Vec<HorizonValue> = (0..=horizon)
        .map(|k| {
            let value = tables.at_initial(&mdp, k).clone();
            HorizonValue {
                k,
                padded: &value + &offset,
                value,
            }
        })
        .collect();
    let first = horizons.iter().find(|h| h.value < e).map(|h| h.k);
    let scheduler = first.map(|k| steps(&mdp, &extract_scheduler(&mdp, &tables, k)));
    let mut shown = mdp.constants.clone();
    shown.remove(MAX_COUNT);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        machine: model.source.clone(),
        constants: shown,
        max_count,
        initial_expectation: e,
        reachable_states: mdp.len(),
        horizons,
        verdict: if first.is_some() {
            CheckVerdict::Unsafe
        } else {
            CheckVerdict::Safe
        },
        first_violating_horizon: first,
        scheduler,
    })
}

fn steps(mdp: &ReachableMdp, scheduler: &Scheduler) -> Vec<SchedulerStep> {
    let mut out: Vec<_> = scheduler
        .decisions
        .iter()
        .map(|(&(s, j), &c)| (j, s, c))
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    out.into_iter()
        .map(|(j, s, c)| SchedulerStep {
            steps_remaining: j,
            state: mdp.describe(s),
            action: mdp.choices[s][c].action.clone(),
        })
        .collect()
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "machine: {}", self.machine)?;
        let constants: Vec<String> = self
            .constants
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(f, "constants: {}", constants.join(", "))?;
        writeln!(f, "max_count: {}", self.max_count)?;
        writeln!(f, "reachable_states: {}", self.reachable_states)?;
        writeln!(
            f,
            "initial_expectation: {}",
            format_rational(&self.initial_expectation)
        )?;
        writeln!(f, "horizons:")?;
        writeln!(f, "  {:>4}  {:>16}  {:>16}", "k", "W_k", "W_k + MAX_COUNT")?;
        for h in &self.horizons {
            writeln!(
                f,
                "  {:>4}  {:>16}  {:>16}",
                h.k,
                format_rational(&h.value),
                format_rational(&h.padded)
            )?;
        }
        writeln!(f, "verdict: {}", self.verdict)?;
        if let Some(k) = self.first_violating_horizon {
            writeln!(f, "first_violating_horizon: {k}")?;
        }
        if let Some(steps) = &self.scheduler {
            writeln!(f, "scheduler:")?;
            for s in steps {
                let state: Vec<String> = s.state.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writeln!(
                    f,
                    "  {:>4}  ({})  [{}]",
                    s.steps_remaining,
                    state.join(", "),
                    s.action
                )?;
            }
        }
        Ok(())
    }
}
