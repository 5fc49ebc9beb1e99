mod common;

use std::collections::BTreeSet;

use common::{p, ref_depth, ref_free, ref_on};
use ea_strata::gen::{FormulaGen, GenConfig, TagMode};
use ea_strata::ordinal::{ord_parse, ord_render, Ordinal};
use ea_strata::syntax::{
    alpha_equal, close, depth, free_vars, free_vars_ordered, on_set, parse_formula, render_formula, substitute,
    universal_closure, Formula, SyntaxError, Term, MAX_NESTING,
};
use proptest::prelude::*;

fn tags(mode: u8) -> TagMode {
    match mode % 3 {
        0 => TagMode::None,
        1 => TagMode::Plain,
        _ => TagMode::Indexed(["0", "3", "w", "w+1", "w*2+5"].map(|s| s.parse().unwrap()).to_vec()),
    }
}

fn formula(seed: u64, mode: u8) -> Formula {
    FormulaGen::new(seed, GenConfig::default().with_tags(tags(mode))).formula()
}

/// Rename every binder to a fresh name, keeping free variables.
fn rename_bound(phi: &Formula, env: &mut Vec<(String, String)>, next: &mut usize) -> Formula {
    fn term(t: &Term, env: &[(String, String)]) -> Term {
        match t {
            Term::Var(v) => Term::Var(env.iter().rev().find(|(a, _)| a == v).map_or(v.clone(), |(_, b)| b.clone())),
            Term::Zero => Term::Zero,
            Term::Succ(a) => Term::succ(term(a, env)),
            Term::Plus(a, b) => Term::plus(term(a, env), term(b, env)),
            Term::Times(a, b) => Term::times(term(a, env), term(b, env)),
        }
    }
    match phi {
        Formula::Eq(a, b) => Formula::Eq(term(a, env), term(b, env)),
        Formula::In(a, b) => Formula::In(term(a, env), term(b, env)),
        Formula::Not(a) => Formula::not(rename_bound(a, env, next)),
        Formula::Implies(a, b) => {
            let l = rename_bound(a, env, next);
            Formula::implies(l, rename_bound(b, env, next))
        }
        Formula::Op(t, a) => Formula::op(*t, rename_bound(a, env, next)),
        Formula::Forall(x, a) => {
            let fresh = format!("r{next}");
            *next += 1;
            env.push((x.clone(), fresh.clone()));
            let body = rename_bound(a, env, next);
            env.pop();
            Formula::Forall(fresh, Box::new(body))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), mode in any::<u8>()) {
        let phi = formula(seed, mode);
        let text = render_formula(&phi);
        prop_assert_eq!(parse_formula(&text).unwrap(), phi.clone());
        prop_assert_eq!(phi.to_string(), text);
    }

    #[test]
    fn measures_match_reference(seed in any::<u64>(), mode in any::<u8>()) {
        let phi = formula(seed, mode);
        prop_assert_eq!(depth(&phi), ref_depth(&phi));
        let mut on = BTreeSet::new();
        ref_on(&phi, &mut on);
        prop_assert_eq!(on_set(&phi), on);
        prop_assert_eq!(free_vars_ordered(&phi), ref_free(&phi));
    }

    #[test]
    fn bound_renaming_is_alpha_equal(seed in any::<u64>(), mode in any::<u8>()) {
        let phi = formula(seed, mode);
        let renamed = rename_bound(&phi, &mut Vec::new(), &mut 0);
        prop_assert!(alpha_equal(&phi, &renamed));
        prop_assert!(alpha_equal(&renamed, &phi));
        prop_assert_eq!(free_vars(&phi), free_vars(&renamed));
    }

    #[test]
    fn ground_substitution_removes_the_variable(seed in any::<u64>(), n in 0u64..5) {
        let phi = formula(seed, 1);
        let out = substitute(&phi, "x", &Term::numeral(n)).unwrap();
        prop_assert!(!free_vars(&out).contains("x"));
        let rest: BTreeSet<String> = free_vars(&phi).into_iter().filter(|v| v != "x").collect();
        prop_assert_eq!(free_vars(&out), rest);
    }

    #[test]
    fn closure_yields_sentences(seed in any::<u64>(), mode in any::<u8>()) {
        let phi = formula(seed, mode);
        let c = close(&phi);
        prop_assert!(c.is_sentence());
        prop_assert_eq!(on_set(&c), on_set(&phi));
        prop_assert_eq!(universal_closure(&phi, &free_vars_ordered(&phi)).unwrap(), c);
    }

    #[test]
    fn ordinals_round_trip(limit in 0u64..50, offset in 0u64..50) {
        let a = Ordinal::new(limit, offset);
        prop_assert_eq!(ord_parse(&ord_render(a)).unwrap(), a);
        let b = Ordinal::new(offset, limit);
        prop_assert_eq!(a < b, (limit, offset) < (offset, limit));
    }
}

#[test]
fn capture_is_reported() {
    let err = substitute(&p("forall y. (x=y)"), "x", &Term::var("y")).unwrap_err();
    assert_eq!(err, SyntaxError::Capture { var: "x".into(), binder: "y".into() });
    // renaming first avoids the capture
    let phi = rename_bound(&p("forall y. (x=y)"), &mut Vec::new(), &mut 0);
    assert_eq!(substitute(&phi, "x", &Term::var("y")).unwrap(), p("forall r0. (y=r0)"));
}

#[test]
fn closure_needs_every_free_variable() {
    assert_eq!(
        universal_closure(&p("x=y"), &["x".into()]),
        Err(SyntaxError::ClosureMissing("y".into()))
    );
    assert_eq!(universal_closure(&p("x=y"), &["y".into(), "x".into()]).unwrap(), p("forall y. forall x. (x=y)"));
}

#[test]
fn deep_or_malformed_input_is_rejected_cleanly() {
    let deep = format!("{}0=0{}", "(".repeat(MAX_NESTING + 10), ")".repeat(MAX_NESTING + 10));
    assert!(parse_formula(&deep).is_err());
    let ks = format!("{}(0=0)", "K ".repeat(MAX_NESTING + 10));
    assert!(parse_formula(&ks).is_err());
    for bad in ["", "K", "0=", "forall . 0=0", "K^{w*w}(0=0)", "(0=0", "0=0)", "x y", "K^{}(0=0)"] {
        assert!(parse_formula(bad).is_err(), "{bad:?}");
    }
}
