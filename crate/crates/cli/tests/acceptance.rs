//! Acceptance criteria, one PASS/FAIL line each. Run with `--nocapture` to
//! see the lines; the test fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use common::generate::machine_source;
use common::*;
use pbcheck_core::ast::format_rational;
use pbcheck_core::parser::parse_substitution;
use pbcheck_core::wp::{expected_value, outcomes};
use pbcheck_core::{
    check_expectations, check_obligations, emit, translate, CheckOptions, CheckVerdict, StateBox,
    Value,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

type Verdict = Result<String, String>;

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pbcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbcheck"))
        .args(args)
        .output()
        .unwrap()
}

fn json(o: &Output) -> Json {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stderr));
    })
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run(n: u32, title: &str, budget: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
        Err(d) => (false, d),
    };
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n} {status}: {title}: {detail} [{elapsed:.2?}]");
    ok
}

const LIBRARY: [&str; 6] = [
    "--const",
    "totalBooks=1",
    "--const",
    "cost=1",
    "--const",
    "pp=1/2",
];

fn unsafe_library() -> Verdict {
    let path = example("library_unsafe.pb");
    let mut args = vec!["check", &path, "--max-count", "2", "--format", "structured"];
    args.extend(LIBRARY);
    let o = pbcheck(&args);
    ensure(
        o.status.code() == Some(2),
        format!("exit {:?}", o.status.code()),
    )?;
    let r = json(&o);
    let w3 = &r["horizons"][3]["value"]["exact"];
    ensure(w3 == "-1/4", format!("W_3 = {w3}"))?;
    ensure(
        r["verdict"] == "UNSAFE",
        format!("verdict {}", r["verdict"]),
    )?;
    ensure(
        r["first_violating_horizon"] == 3,
        format!("first violation at {}", r["first_violating_horizon"]),
    )?;
    Ok("W_3 = -1/4, UNSAFE at k = 3, exit 2".into())
}

fn safe_library() -> Verdict {
    let path = example("library_safe.pb");
    let mut args = vec!["check", &path, "--max-count", "2", "--format", "structured"];
    args.extend(LIBRARY);
    let o = pbcheck(&args);
    ensure(
        o.status.code() == Some(0),
        format!("exit {:?}", o.status.code()),
    )?;
    let r = json(&o);
    ensure(
        r["verdict"] == "SAFE-UP-TO-BOUND",
        format!("verdict {}", r["verdict"]),
    )?;
    for h in r["horizons"].as_array().unwrap() {
        ensure(
            h["value"]["exact"] == "0",
            format!("W_{} = {}", h["k"], h["value"]["exact"]),
        )?;
    }
    let m = machine(LIBRARY_SAFE);
    let mut runs = 0;
    for books in 1..=3 {
        for max_count in 0..=5 {
            let report = check_expectations(
                &m,
                &library_constants(books),
                max_count,
                CheckOptions::default(),
            )
            .map_err(|e| e.to_string())?;
            for h in &report.horizons {
                ensure(
                    h.value >= rat(0, 1),
                    format!("books={books} max={max_count} W_{} < 0", h.k),
                )?;
            }
            ensure(report.verdict == CheckVerdict::Safe, "unsafe verdict")?;
            runs += 1;
        }
    }
    Ok(format!(
        "W_k = 0 for k in 0..=3 and SAFE-UP-TO-BOUND; {runs} further bounds all non-negative"
    ))
}

fn demon_obligations() -> Verdict {
    let path = example("demon.pb");
    let o = pbcheck(&[
        "obligations",
        &path,
        "--bound",
        "3",
        "--format",
        "structured",
    ]);
    ensure(
        o.status.code() == Some(2),
        format!("exit {:?}", o.status.code()),
    )?;
    let r = json(&o);
    ensure(r["init"]["verdict"] == "holds", "INITIALISATION fails")?;
    let ops = r["operations"].as_array().unwrap();
    let op = |name: &str| ops.iter().find(|o| o["operation"] == name).unwrap();
    ensure(op("OpX")["verdict"] == "holds", "OpX fails")?;
    let opy = op("OpY");
    ensure(opy["verdict"] == "fails", "OpY holds")?;
    let w = &opy["witnesses"][0];
    ensure(
        w["state"]["cc"] == 1,
        format!("first witness {}", w["state"]),
    )?;
    ensure(
        w["lhs"]["exact"] == "1" && w["rhs"]["exact"] == "0",
        "witness values",
    )?;
    Ok("OpY fails at cc=1 (xi = 1 > wp = 0); OpX and INITIALISATION hold".into())
}

fn demon_value() -> Verdict {
    let dist = vec![
        (bind(&[("cc", Value::int(0))]), rat(1, 2)),
        (bind(&[("cc", Value::int(-1))]), rat(1, 2)),
    ];
    let cc = pbcheck_core::parser::parse_expr("cc").unwrap();
    let literal = expected_value(&dist, &cc).map_err(|e| e.to_string())?;
    ensure(
        literal == rat(-1, 2),
        format!("literal distribution gives {literal}"),
    )?;

    // INIT; OpX; (OpY if nn >= 0 else skip), with the output assigned after
    // the probabilistic choice.
    let fragment = parse_substitution(
        "cc := 0 ; PCHOICE frac (1, 2) OF cc := cc + 1 OR cc := cc - 1 END ; nn := cc ; \
         IF nn >= 0 THEN cc := 0 ELSE skip END",
    )
    .unwrap();
    let start = bind(&[("cc", Value::int(0)), ("nn", Value::int(0))]);
    let forward: Vec<_> = outcomes(&fragment, &start)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|(p, s)| (s, p))
        .collect();
    let executed = expected_value(&forward, &cc).map_err(|e| e.to_string())?;
    ensure(
        executed == rat(-1, 2),
        format!("executed fragment gives {executed}"),
    )?;

    let constants = bind(&[("BOUND", Value::int(3))]);
    let report = check_expectations(&machine(DEMON), &constants, 2, CheckOptions::default())
        .map_err(|e| e.to_string())?;
    let w3 = report.value_at(3).unwrap().clone();
    ensure(w3 == rat(-1, 2), format!("W_3 = {w3}"))?;
    let mut oracle = Oracle::new(machine(DEMON), constants, 2);
    let (enumerated, policies) = oracle.enumerate_policies(3, 1_000_000).unwrap();
    ensure(enumerated == w3, format!("enumeration gives {enumerated}"))?;
    Ok(format!(
        "expected cc = -1/2 over the endpoint distribution; W_3 = -1/2, matching {policies} enumerated schedules"
    ))
}

/// Splits at `sep` outside parentheses and brackets.
fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect()
}

fn canonical_command(stmt: &str) -> String {
    let (lhs, rhs) = stmt.split_once("->").unwrap();
    let (action, guard) = lhs.split_once(']').unwrap();
    let mut guard: Vec<String> = split_top(guard, '&').iter().map(|g| squash(g)).collect();
    guard.sort();
    let mut branches: Vec<String> = split_top(rhs, '+')
        .iter()
        .map(|b| {
            let parts = split_top(b, ':');
            let (p, u) = match parts.as_slice() {
                [u] => (String::new(), u.clone()),
                [p, u] => (squash(p), u.clone()),
                _ => panic!("branch {b}"),
            };
            let mut u: Vec<String> = split_top(&u, '&').iter().map(|x| squash(x)).collect();
            u.sort();
            format!("{p}:{}", u.join("&"))
        })
        .collect();
    branches.sort();
    format!(
        "{}]{}->{}",
        squash(action),
        guard.join("&"),
        branches.join("+")
    )
}

/// Blocks of statements with order inside each block ignored, comments and
/// the model-type line dropped, and whitespace removed.
fn canonical(text: &str) -> Vec<Vec<String>> {
    let mut blocks = vec![Vec::new()];
    let mut pending = String::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with("//") || line == "mdp" {
            continue;
        }
        if line.starts_with("module ")
            || line == "rewards"
            || line == "endmodule"
            || line == "endrewards"
        {
            blocks.push(vec![squash(line)]);
            continue;
        }
        pending.push(' ');
        pending.push_str(line);
        if line.ends_with(';') {
            let stmt = pending.trim().trim_end_matches(';').to_string();
            pending.clear();
            let stmt = if stmt.starts_with('[') {
                canonical_command(&stmt)
            } else {
                squash(&stmt)
            };
            blocks.last_mut().unwrap().push(stmt);
        }
    }
    for b in &mut blocks {
        b.sort();
    }
    blocks
}

fn golden_translation() -> Verdict {
    let text = emit(&translate(&machine(LIBRARY_UNSAFE)).map_err(|e| e.to_string())?);
    let golden = include_str!("../../core/tests/golden/library_unsafe.nm");
    ensure(text == golden, "emitted text differs from the golden file")?;
    let reference = include_str!("fixtures/reference_listing.nm");
    ensure(
        canonical(&text) == canonical(reference),
        "emitted model differs from the reference listing beyond ordering",
    )?;
    for needle in [
        "[EndLoan] (loansEnded < loansStarted) & formula0 & formula1 & formula2 & formula3",
        "(count = MAX_COUNT + 1) : (pp * loansEnded - booksLost) + MAX_COUNT;",
        "    [] (count + 1 <= MAX_COUNT + 1) -> (count' = count + 1);",
    ] {
        ensure(text.contains(needle), format!("missing `{needle}`"))?;
    }
    Ok(
        "byte-equal to golden; equal to the reference listing up to declaration and conjunct order"
            .into(),
    )
}

fn theorem_cross_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut accepted = 0;
    let mut attempts = 0;
    let mut cases = vec![(machine(LIBRARY_SAFE), library_constants(1))];
    while accepted < 50 {
        attempts += 1;
        ensure(
            attempts <= 5000,
            format!("only {accepted} passing machines generated"),
        )?;
        let m = machine(&machine_source(&mut rng, 2));
        let constants = bind(&[("N", Value::int(1 + attempts % 3))]);
        let state_box = StateBox::for_machine(&m, &constants).map_err(|e| e.to_string())?;
        let obligations =
            check_obligations(&m, &constants, &state_box, 1).map_err(|e| e.to_string())?;
        if obligations.all_hold() {
            accepted += 1;
            cases.push((m, constants));
        }
    }
    for (m, constants) in &cases {
        let report = check_expectations(m, constants, 3, CheckOptions::default())
            .map_err(|e| e.to_string())?;
        for h in &report.horizons {
            ensure(
                h.value >= report.initial_expectation,
                format!(
                    "W_{} = {} < e = {} for\n{}",
                    h.k,
                    format_rational(&h.value),
                    format_rational(&report.initial_expectation),
                    pbcheck_core::pretty_print(m)
                ),
            )?;
        }
    }
    Ok(format!(
        "W_k >= e for k <= 4 on the safe library and {accepted} generated machines ({attempts} drawn)"
    ))
}

fn oracle_equivalence() -> Verdict {
    let demon = |b| bind(&[("BOUND", Value::int(b))]);
    let fixtures = [
        ("library_unsafe", LIBRARY_UNSAFE, library_constants(1), 3),
        ("library_unsafe", LIBRARY_UNSAFE, library_constants(2), 3),
        ("library_safe", LIBRARY_SAFE, library_constants(1), 3),
        ("library_safe", LIBRARY_SAFE, library_constants(3), 3),
        ("demon", DEMON, demon(3), 3),
    ];
    let mut compared = 0;
    let mut policies = 0;
    for (name, src, constants, max_count) in fixtures {
        let m = machine(src);
        let report = check_expectations(&m, &constants, max_count, CheckOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(report.reachable_states <= 5000, format!("{name} too large"))?;
        let mut oracle = Oracle::new(m, constants, max_count);
        for h in &report.horizons {
            let (value, count) = oracle
                .enumerate_policies(h.k, 50_000_000)
                .ok_or_else(|| format!("{name}: policy budget exceeded at k = {}", h.k))?;
            ensure(
                value == h.value,
                format!("{name} k={}: {} vs {}", h.k, value, h.value),
            )?;
            compared += 1;
            policies += count;
        }
    }
    Ok(format!(
        "{compared} (fixture, horizon) values equal across {policies} enumerated policies"
    ))
}

#[test]
fn canonical_form_ignores_only_order() {
    let a = "module M\nx : [0..1] init 0;\n[A] (x > 0) & f -> p : (x' = 0) + (1 - p) : (x' = 1);\nendmodule\n";
    let reordered = "module M\nx:[0..1] init 0;\n[A] f & (x > 0) -> (1 - p): (x' = 1) + p: (x' = 0);\nendmodule\n";
    let changed = "module M\nx : [0..1] init 0;\n[A] (x >= 0) & f -> p : (x' = 0) + (1 - p) : (x' = 1);\nendmodule\n";
    assert_eq!(canonical(a), canonical(reordered));
    assert_ne!(canonical(a), canonical(changed));
}

#[test]
fn acceptance() {
    let s = Duration::from_secs;
    let results = [
        run(1, "unsafe library reproduction", s(1), unsafe_library),
        run(2, "safe library reproduction", s(5), safe_library),
        run(3, "Demon obligation failure", s(1), demon_obligations),
        run(4, "Demon distribution value", s(1), demon_value),
        run(5, "golden translation", s(1), golden_translation),
        run(6, "theorem cross-check", s(60), theorem_cross_check),
        run(7, "oracle equivalence", s(60), oracle_equivalence),
    ];
    let failed: Vec<usize> = (1..=results.len()).filter(|i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
