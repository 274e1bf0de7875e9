//! Seeded generator of small two-variable machines with linear updates.

use rand::seq::SliceRandom;
use rand::Rng;

const VARS: [&str; 2] = ["x", "y"];

fn probability(rng: &mut impl Rng) -> &'static str {
    ["frac (1, 2)", "frac (1, 3)", "frac (3, 4)", "frac (2, 5)"]
        .choose(rng)
        .unwrap()
}

fn assignment(rng: &mut impl Rng) -> String {
    let v = *VARS.choose(rng).unwrap();
    match rng.gen_range(0..4) {
        0 => format!("{v} := {v} + {}", rng.gen_range(1..=2)),
        1 => format!("{v} := {v} - {}", rng.gen_range(1..=2)),
        2 => format!("{v} := {}", rng.gen_range(0..=1)),
        _ => {
            let w = if v == "x" { "y" } else { "x" };
            format!("{v} := {v} + {w}")
        }
    }
}

fn condition(rng: &mut impl Rng) -> String {
    let v = *VARS.choose(rng).unwrap();
    let op = *["<", "<=", ">", ">=", "="].choose(rng).unwrap();
    format!("{v} {op} {}", rng.gen_range(0..=2))
}

/// A substitution of nesting depth at most `depth`.
pub fn substitution(rng: &mut impl Rng, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => "skip".to_string(),
            1 => format!(
                "x := x + {} || y := y - {}",
                rng.gen_range(0..=1),
                rng.gen_range(0..=1)
            ),
            _ => assignment(rng),
        };
    }
    match rng.gen_range(0..3) {
        0 => format!(
            "PCHOICE {} OF {} OR {} END",
            probability(rng),
            substitution(rng, depth - 1),
            substitution(rng, depth - 1)
        ),
        1 => format!(
            "IF {} THEN {} ELSE {} END",
            condition(rng),
            substitution(rng, depth - 1),
            substitution(rng, depth - 1)
        ),
        _ => format!(
            "PRE {} THEN {} END",
            condition(rng),
            substitution(rng, depth - 1)
        ),
    }
}

/// Source of a machine `Gen (N)` with variables `x : NATURAL`, `y : INT`,
/// a linear random variable and `ops` operations.
pub fn machine_source(rng: &mut impl Rng, ops: usize) -> String {
    let a = rng.gen_range(-2..=2);
    let b = rng.gen_range(-2..=2);
    let c = rng.gen_range(-1..=1);
    let e = rng.gen_range(-1..=1);
    let x0 = rng.gen_range(0..=1);
    let y0 = rng.gen_range(0..=1);
    let bodies: Vec<String> = (0..ops)
        .map(|i| format!("Op{i} = {}", substitution(rng, 2)))
        .collect();
    format!(
        "MACHINE Gen (N)\n\
         VARIABLES x, y\n\
         INVARIANT x : NATURAL & y : INT\n\
         EXPECTATIONS {e} |=> {}\n\
         INITIALISATION x, y := {x0}, {y0}\n\
         OPERATIONS\n    {}\nEND\n",
        linear(a, b, c),
        bodies.join(";\n    ")
    )
}

fn linear(a: i64, b: i64, c: i64) -> String {
    let mut out = format!("{a} * x");
    for (k, term) in [(b, " * y"), (c, "")] {
        let sign = if k < 0 { '-' } else { '+' };
        out.push_str(&format!(" {sign} {}{term}", k.abs()));
    }
    out
}
