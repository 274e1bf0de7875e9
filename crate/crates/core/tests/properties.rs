//! Property tests over exact values, the expectation transformer, the
//! printer and the reachable MDP.

mod common;

use std::collections::HashMap;

use common::generate::{machine_source, substitution};
use common::*;
use num_traits::Zero;
use pbcheck_core::ast::{evaluate, evaluate_bool, evaluate_rational, parse_decimal};
use pbcheck_core::mdp::{build_mdp, BuildOptions, ReachableMdp};
use pbcheck_core::parser::{parse_expr, parse_substitution};
use pbcheck_core::prism::{PrismModel, COUNT, MAX_COUNT};
use pbcheck_core::wp::{expected_value, outcomes, wp_eval, WpError};
use pbcheck_core::{
    check_expectations, pretty_print, translate, CheckOptions, Expr, Machine, Rational, Valuation,
    Value,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(x: i64, y: i64) -> Valuation {
    bind(&[
        ("x", Value::int(x)),
        ("y", Value::int(y)),
        ("N", Value::int(3)),
    ])
}

fn linear(a: i64, b: i64, c: i64) -> Expr {
    parse_expr(&format!("{a} * x + ({b}) * y + ({c})")).unwrap()
}

fn random_sub(seed: u64) -> pbcheck_core::Substitution {
    let text = substitution(&mut ChaCha8Rng::seed_from_u64(seed), 3);
    parse_substitution(&text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn random_machine(seed: u64) -> Machine {
    machine(&machine_source(&mut ChaCha8Rng::seed_from_u64(seed), 2))
}

fn built(seed: u64, n: i64, max_count: u64) -> (PrismModel, ReachableMdp) {
    let model = translate(&random_machine(seed)).unwrap();
    let constants = bind(&[
        ("N", Value::int(n)),
        (MAX_COUNT, Value::int(max_count as i64)),
    ]);
    let mdp = build_mdp(&model, &constants, BuildOptions::default()).unwrap();
    (model, mdp)
}

fn env(mdp: &ReachableMdp, s: usize) -> Valuation {
    let mut v = mdp.constants.clone();
    for (k, x) in mdp.describe(s) {
        v.insert(k, Value::int(x));
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fractions_normalize(n in -1000i64..1000, d in 1i64..1000, k in 1i64..20) {
        let a: Value = format!("{n}/{d}").parse().unwrap();
        let b: Value = format!("{}/{}", n * k, d * k).parse().unwrap();
        prop_assert_eq!(a.as_rational(), b.as_rational());
        prop_assert_eq!(a.as_rational().unwrap(), rat(n, d));
    }

    #[test]
    fn decimals_are_exact(whole in 0i64..1000, frac in 0i64..1000) {
        let r = parse_decimal(&format!("{whole}.{frac:03}")).unwrap();
        prop_assert_eq!(r, rat(whole * 1000 + frac, 1000));
    }

    #[test]
    fn substitution_into_expressions_is_sound(
        a in -3i64..=3, b in -3i64..=3, c in -3i64..=3,
        x in -3i64..=3, y in -3i64..=3, k in -2i64..=2,
    ) {
        let e = linear(a, b, c);
        let f = parse_expr(&format!("y + ({k})")).unwrap();
        let bindings = HashMap::from([("x".to_string(), f.clone())]);
        let s = state(x, y);
        let mut t = s.clone();
        t.insert("x".into(), evaluate(&f, &s).unwrap());
        prop_assert_eq!(
            evaluate(&e.substitute(&bindings), &s).unwrap(),
            evaluate(&e, &t).unwrap()
        );
    }

    #[test]
    fn wp_agrees_with_forward_distribution(
        seed in any::<u64>(), a in -2i64..=2, b in -2i64..=2, x in 0i64..=3, y in -3i64..=3,
    ) {
        let sub = random_sub(seed);
        let post = linear(a, b, 1);
        let s = state(x, y);
        match (wp_eval(&sub, &post, &s), outcomes(&sub, &s)) {
            (Ok(w), Ok(dist)) => {
                let dist: Vec<_> = dist.into_iter().map(|(p, v)| (v, p)).collect();
                let mass: Rational = dist.iter().map(|(_, p)| p.clone()).sum();
                prop_assert_eq!(mass, rat(1, 1));
                prop_assert_eq!(w, expected_value(&dist, &post).unwrap());
            }
            (Err(WpError::PreconditionFalse), Err(WpError::PreconditionFalse)) => {}
            (l, r) => prop_assert!(false, "{:?} vs {:?}", l, r),
        }
    }

    #[test]
    fn wp_scales_and_is_monotone(
        seed in any::<u64>(), c in 0i64..=4, k in 0i64..=3, x in 0i64..=3, y in -3i64..=3,
    ) {
        let sub = random_sub(seed);
        let post = linear(1, -1, 0);
        let s = state(x, y);
        let Ok(base) = wp_eval(&sub, &post, &s) else { return Ok(()) };
        let scaled = wp_eval(&sub, &(Expr::int(c) * post.clone()), &s).unwrap();
        prop_assert_eq!(scaled, rat(c, 1) * &base);
        let raised = wp_eval(&sub, &(post.clone() + Expr::int(k)), &s).unwrap();
        prop_assert!(raised >= base);
        prop_assert_eq!(raised, base + rat(k, 1));
    }

    #[test]
    fn pretty_printing_round_trips(seed in any::<u64>()) {
        let m = random_machine(seed);
        let printed = pretty_print(&m);
        let again = machine(&printed);
        prop_assert_eq!(&m, &again);
        prop_assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn reprinted_machines_check_identically(seed in any::<u64>(), n in 1i64..=2) {
        let m = random_machine(seed);
        let again = machine(&pretty_print(&m));
        let constants = bind(&[("N", Value::int(n))]);
        let check = |m: &Machine| check_expectations(m, &constants, 2, CheckOptions::default()).unwrap();
        prop_assert_eq!(check(&m), check(&again));
    }

    #[test]
    fn every_step_advances_the_counter(seed in any::<u64>(), n in 1i64..=3, max_count in 0u64..=3) {
        let (_, mdp) = built(seed, n, max_count);
        let last = max_count as i64 + 1;
        for s in 0..mdp.len() {
            let count = mdp.value_of(s, COUNT).unwrap();
            prop_assert_eq!(mdp.is_absorbing(s), count == last);
            for c in &mdp.choices[s] {
                let mass: Rational = c.outcomes.iter().map(|(p, _)| p.clone()).sum();
                prop_assert_eq!(mass, rat(1, 1));
                for (p, t) in &c.outcomes {
                    prop_assert!(!p.is_zero());
                    prop_assert_eq!(mdp.value_of(*t, COUNT).unwrap(), count + 1);
                }
            }
            prop_assert!(count == last || mdp.choices[s].iter().any(|c| c.action.is_empty()));
        }
    }

    #[test]
    fn label_holds_exactly_when_xi_reaches_e(seed in any::<u64>(), n in 1i64..=3) {
        let (model, mdp) = built(seed, n, 2);
        for s in 0..mdp.len() {
            let v = env(&mdp, s);
            let e = evaluate_rational(&model.initial, &v).unwrap();
            let label = evaluate_bool(&model.label.expr, &v).unwrap();
            prop_assert_eq!(label, mdp.xi[s] >= e);
        }
    }

    #[test]
    fn horizons_are_monotone_and_padded(seed in any::<u64>(), n in 1i64..=3, max_count in 0u64..=4) {
        let m = random_machine(seed);
        let constants = bind(&[("N", Value::int(n))]);
        let r = check_expectations(&m, &constants, max_count, CheckOptions::default()).unwrap();
        prop_assert_eq!(r.horizons.len() as u64, max_count + 2);
        for w in r.horizons.windows(2) {
            prop_assert!(w[1].value <= w[0].value);
        }
        for h in &r.horizons {
            prop_assert_eq!(&h.padded - rat(max_count as i64, 1), h.value.clone());
        }
    }
}
