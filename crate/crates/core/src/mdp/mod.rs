//! Exact finite-horizon analysis of translated models: reachable-state
//! construction, minimal expected instantaneous reward by backward
//! induction, and minimizing schedulers.

mod build;
mod check;
mod induction;

pub use build::{build_mdp, BuildOptions, Choice, ReachableMdp, DEFAULT_STATE_CAP};
pub use check::{
    check_expectations, check_model, CheckOptions, CheckReport, CheckVerdict, HorizonValue,
    SchedulerStep, SCHEMA_VERSION,
};
pub use induction::{extract_scheduler, min_instantaneous_reward, replay, Induction, Scheduler};

use crate::ast::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MdpError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("constant `{0}` is not bound")]
    UnboundConstant(String),
    #[error("`{0}` is not a constant of the model")]
    UnknownConstant(String),
    #[error("constant `{name}` must be {expected}, got {value}")]
    BadConstant {
        name: String,
        value: String,
        expected: &'static str,
    },
    #[error("variable `{name}` has an empty range [{low}..{high}]")]
    EmptyRange { name: String, low: i64, high: i64 },
    #[error(
        "`{name}` takes value {value} outside [{low}..{high}] in state {state} under [{action}]"
    )]
    OutOfRange {
        name: String,
        value: String,
        low: i64,
        high: i64,
        state: String,
        action: String,
    },
    #[error("probability {value} of [{action}] is outside [0, 1] in state {state}")]
    BadProbability {
        action: String,
        value: String,
        state: String,
    },
    #[error("probabilities of [{action}] sum to {mass}, not 1, in state {state}")]
    MassNotOne {
        action: String,
        mass: String,
        state: String,
    },
    #[error("more than {0} reachable states")]
    StateCap(usize),
}
