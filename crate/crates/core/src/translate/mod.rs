//! Translation of a machine into a PRISM MDP with a step counter and an
//! expectation-derived reward structure.

mod entail;
mod normalize;

use std::collections::{BTreeSet, HashMap};

use crate::ast::{CmpOp, Expr, Machine, Operation, SubstKind, TypeSet};
use crate::prism::{
    Branch, ConstDecl, ConstType, FormulaDef, GuardedCommand, Label, ModelType, Module, PrismModel,
    RewardStructure, VarDecl, COUNT, COUNTER_MODULE, EXPECTATIONS_LABEL, MAX_COUNT,
};

use entail::Entailment;
use normalize::{normalize, Alt};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("`{0}` is reserved by the translation")]
    Reserved(String),
    #[error("variable `{0}` has no typing atom")]
    Untyped(String),
    #[error("variable `{0}` is REAL-typed; only INT and NATURAL variables can be translated")]
    RealVariable(String),
    #[error(
        "INITIALISATION must assign every variable exactly once with a constant expression: {0}"
    )]
    Initialisation(String),
    #[error("probability `{0}` of a PCHOICE must be constant")]
    StateDependentProbability(String),
}

/// Translates a well-formed machine.
pub fn translate(machine: &Machine) -> Result<PrismModel, TranslateError> {
    check_reserved(machine)?;
    let bound = machine.bound_name().to_string();
    let constants = constants(machine);
    let formulas = formulas(machine);
    let variables = variables(machine, &bound)?;
    let integral = integral_names(&constants, &variables);

    let mut commands = Vec::new();
    for op in &machine.operations {
        commands.extend(operation_commands(
            machine, op, &formulas, &variables, &integral,
        )?);
    }

    let main = Module {
        name: machine.name.clone(),
        variables,
        commands,
    };

    let xi = machine.expectations.random_variable.clone();
    let e = machine.expectations.initial.clone();
    let max_plus_one = Expr::var(MAX_COUNT) + Expr::int(1);
    let count = Expr::var(COUNT);
    let counter_guard = Expr::compare(
        CmpOp::Le,
        count.clone() + Expr::int(1),
        max_plus_one.clone(),
    );
    let step = Branch {
        probability: Expr::int(1),
        updates: vec![(COUNT.to_string(), count.clone() + Expr::int(1))],
    };
    let mut labels: Vec<&str> = Vec::new();
    for c in &main.commands {
        if !labels.contains(&c.action.as_str()) {
            labels.push(&c.action);
        }
    }
    for op in &machine.operations {
        if !labels.contains(&op.name.as_str()) {
            labels.push(&op.name);
        }
    }
    let counter_commands = labels
        .iter()
        .map(|l| l.to_string())
        .chain(std::iter::once(String::new()))
        .map(|action| GuardedCommand {
            action,
            guard: vec![counter_guard.clone()],
            branches: vec![step.clone()],
        })
        .collect();
    let counter = Module {
        name: COUNTER_MODULE.to_string(),
        variables: vec![VarDecl {
            name: COUNT.to_string(),
            low: Expr::int(0),
            high: max_plus_one.clone(),
            init: Expr::int(0),
        }],
        commands: counter_commands,
    };

    Ok(PrismModel {
        model_type: ModelType::Mdp,
        source: machine.name.clone(),
        constants,
        formulas,
        main,
        label: Label {
            name: EXPECTATIONS_LABEL.to_string(),
            expr: Expr::compare(CmpOp::Ge, xi.clone(), e.clone()),
        },
        counter,
        rewards: RewardStructure {
            guard: Expr::compare(CmpOp::Eq, count, max_plus_one),
            value: xi.clone(),
            offset: Expr::var(MAX_COUNT),
        },
        random_variable: xi,
        initial: e,
        bound,
    })
}

fn check_reserved(machine: &Machine) -> Result<(), TranslateError> {
    let mut declared: Vec<&String> = machine
        .all_constants()
        .chain(machine.variables.iter())
        .collect();
    let outputs = machine.undeclared_outputs();
    declared.extend(outputs.iter());
    for name in declared {
        let synthesized_bound = machine.params.is_empty() && name == machine.bound_name();
        let formula_like = name
            .strip_prefix("formula")
            .is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
        if name == MAX_COUNT || name == COUNT || synthesized_bound || formula_like {
            return Err(TranslateError::Reserved(name.clone()));
        }
    }
    if machine.name == COUNTER_MODULE {
        return Err(TranslateError::Reserved(machine.name.clone()));
    }
    Ok(())
}

/// Parameters, then CONSTANTS, then the synthesized bound if any, then
/// `MAX_COUNT`. A constant is `double` when PROPERTIES types it REAL.
fn constants(machine: &Machine) -> Vec<ConstDecl> {
    let mut out: Vec<ConstDecl> = machine
        .all_constants()
        .map(|name| ConstDecl {
            name: name.clone(),
            ty: match machine.constant_type(name) {
                Some(TypeSet::Real) => ConstType::Double,
                _ => ConstType::Int,
            },
            value: None,
        })
        .collect();
    if machine.params.is_empty() {
        out.push(ConstDecl {
            name: machine.bound_name().to_string(),
            ty: ConstType::Int,
            value: None,
        });
    }
    out.push(ConstDecl {
        name: MAX_COUNT.to_string(),
        ty: ConstType::Int,
        value: None,
    });
    out
}

/// Non-typing atoms of INVARIANT, then of PROPERTIES, numbered in order.
fn formulas(machine: &Machine) -> Vec<FormulaDef> {
    machine
        .invariant_predicates()
        .chain(machine.property_predicates())
        .enumerate()
        .map(|(i, p)| FormulaDef {
            name: format!("formula{i}"),
            predicate: p.clone(),
            free_identifiers: p.free_identifiers(),
        })
        .collect()
}

/// Formulas sharing an identifier with the operation's guards, probabilities,
/// right-hand sides or assignment targets, in formula order.
pub fn select_formulas<'a>(op: &Operation, formulas: &'a [FormulaDef]) -> Vec<&'a FormulaDef> {
    let touched: BTreeSet<String> = op.body.identifiers().into_iter().collect();
    formulas
        .iter()
        .filter(|f| !f.free_identifiers.is_disjoint(&touched))
        .collect()
}

fn variables(machine: &Machine, bound: &str) -> Result<Vec<VarDecl>, TranslateError> {
    let init = initial_values(machine)?;
    let b = Expr::var(bound);
    let mut out = Vec::new();
    for v in &machine.variables {
        let low = match machine.variable_type(v) {
            Some(TypeSet::Natural) => Expr::int(0),
            Some(TypeSet::Int) => -b.clone(),
            Some(TypeSet::Real) => return Err(TranslateError::RealVariable(v.clone())),
            None => return Err(TranslateError::Untyped(v.clone())),
        };
        let value = init
            .get(v)
            .cloned()
            .ok_or_else(|| TranslateError::Initialisation(format!("`{v}` is not assigned")))?;
        out.push(VarDecl {
            name: v.clone(),
            low,
            high: b.clone(),
            init: value,
        });
    }
    // Output parameters become INT state variables starting at zero.
    for o in machine.undeclared_outputs() {
        out.push(VarDecl {
            name: o,
            low: -b.clone(),
            high: b.clone(),
            init: Expr::int(0),
        });
    }
    Ok(out)
}

fn initial_values(machine: &Machine) -> Result<HashMap<String, Expr>, TranslateError> {
    let alts = normalize(&machine.initialisation)?;
    let [alt] = alts.as_slice() else {
        return Err(TranslateError::Initialisation(
            "conditional initialisation".to_string(),
        ));
    };
    if !alt.conds.is_empty() || alt.branches.len() != 1 {
        return Err(TranslateError::Initialisation(
            "initialisation must be deterministic".to_string(),
        ));
    }
    let mut out = HashMap::new();
    for (v, e) in &alt.branches[0].updates {
        if let Some(x) = e
            .free_identifiers()
            .iter()
            .find(|x| !machine.is_constant(x))
        {
            return Err(TranslateError::Initialisation(format!(
                "`{v}` is initialised from `{x}`"
            )));
        }
        out.insert(v.clone(), e.clone());
    }
    Ok(out)
}

/// Identifiers known to hold integers: INT and NATURAL variables, outputs,
/// and constants that are not `double`.
fn integral_names(constants: &[ConstDecl], variables: &[VarDecl]) -> BTreeSet<String> {
    constants
        .iter()
        .filter(|c| c.ty == ConstType::Int)
        .map(|c| c.name.clone())
        .chain(variables.iter().map(|v| v.name.clone()))
        .collect()
}

fn operation_commands(
    machine: &Machine,
    op: &Operation,
    formulas: &[FormulaDef],
    variables: &[VarDecl],
    integral: &BTreeSet<String>,
) -> Result<Vec<GuardedCommand>, TranslateError> {
    check_probabilities(machine, op)?;
    let selected = select_formulas(op, formulas);
    let alts = normalize(&op.body)?;
    alts.into_iter()
        .map(|alt| {
            let mut guard = alt.conds.clone();
            guard.extend(selected.iter().map(|f| Expr::var(&f.name)));
            guard.extend(range_guards(&alt, &selected, variables, integral));
            let branches = alt
                .branches
                .into_iter()
                .map(|b| Branch {
                    probability: b.probability,
                    updates: b.updates,
                })
                .collect();
            Ok(GuardedCommand {
                action: op.name.clone(),
                guard,
                branches,
            })
        })
        .collect()
}

fn check_probabilities(machine: &Machine, op: &Operation) -> Result<(), TranslateError> {
    let mut result = Ok(());
    op.body.walk(&mut |s| {
        if let SubstKind::Choice { probability, .. } = &s.kind {
            if probability
                .free_identifiers()
                .iter()
                .any(|x| !machine.is_constant(x))
            {
                result = Err(TranslateError::StateDependentProbability(
                    probability.to_string(),
                ));
            }
        }
    });
    result
}

/// Conjuncts keeping every update inside its variable's declared range,
/// omitting those the rest of the guard and the declared ranges already
/// imply. Updates with non-linear right-hand sides get no range guard.
pub(crate) fn range_guards(
    alt: &Alt,
    selected: &[&FormulaDef],
    variables: &[VarDecl],
    integral: &BTreeSet<String>,
) -> Vec<Expr> {
    let mut ctx = Entailment::new(integral.clone());
    for c in &alt.conds {
        ctx.assume(c);
    }
    for f in selected {
        ctx.assume(&f.predicate);
    }
    for v in variables {
        let x = Expr::var(&v.name);
        ctx.assume(&Expr::compare(CmpOp::Ge, x.clone(), v.low.clone()));
        ctx.assume(&Expr::compare(CmpOp::Le, x, v.high.clone()));
    }
    let mut out: Vec<Expr> = Vec::new();
    for branch in &alt.branches {
        for (var, value) in &branch.updates {
            let Some(decl) = variables.iter().find(|v| &v.name == var) else {
                continue;
            };
            if entail::Linear::of(value).is_none() {
                continue;
            }
            for goal in [
                Expr::compare(CmpOp::Le, value.clone(), decl.high.clone()),
                Expr::compare(CmpOp::Ge, value.clone(), decl.low.clone()),
            ] {
                if !out.contains(&goal) && !ctx.implies(&goal) {
                    out.push(goal);
                }
            }
        }
    }
    out
}
