//! Reference implementations shared by the integration suites. They are
//! written independently of the library and only touch its data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ea_strata::ordinal::Ordinal;
use ea_strata::semantics::{Element, FiniteStructure};
use ea_strata::syntax::{parse_formula, Formula, OperatorTag, Term};

pub fn p(s: &str) -> Formula {
    parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn o(s: &str) -> Ordinal {
    s.parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn ords(items: &[&str]) -> BTreeSet<Ordinal> {
    items.iter().map(|s| o(s)).collect()
}

/// Nesting depth of operators.
pub fn ref_depth(phi: &Formula) -> usize {
    match phi {
        Formula::Eq(..) | Formula::In(..) => 0,
        Formula::Not(a) | Formula::Forall(_, a) => ref_depth(a),
        Formula::Implies(a, b) => ref_depth(a).max(ref_depth(b)),
        Formula::Op(_, a) => 1 + ref_depth(a),
    }
}

pub fn ref_on(phi: &Formula, out: &mut BTreeSet<Ordinal>) {
    match phi {
        Formula::Eq(..) | Formula::In(..) => {}
        Formula::Not(a) | Formula::Forall(_, a) => ref_on(a, out),
        Formula::Implies(a, b) => {
            ref_on(a, out);
            ref_on(b, out);
        }
        Formula::Op(t, a) => {
            if let OperatorTag::Indexed(x) = t {
                out.insert(*x);
            }
            ref_on(a, out);
        }
    }
}

/// Erase every superscript.
pub fn ref_erase(phi: &Formula) -> Formula {
    match phi {
        Formula::Eq(..) | Formula::In(..) => phi.clone(),
        Formula::Not(a) => Formula::Not(Box::new(ref_erase(a))),
        Formula::Implies(a, b) => Formula::Implies(Box::new(ref_erase(a)), Box::new(ref_erase(b))),
        Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(ref_erase(a))),
        Formula::Op(_, a) => Formula::Op(OperatorTag::Plain, Box::new(ref_erase(a))),
    }
}

/// Operator key of a body, rebuilt from the documented convention: free
/// occurrences become `v0, v1, …` left to right, a bound variable becomes
/// `b{k}` where `k` counts the binders enclosing its own binder.
pub fn ref_key(body: &Formula) -> (Formula, Vec<String>) {
    struct K {
        bound: Vec<String>,
        args: Vec<String>,
    }
    impl K {
        fn term(&mut self, t: &Term) -> Term {
            match t {
                Term::Var(v) => {
                    for k in (0..self.bound.len()).rev() {
                        if self.bound[k] == *v {
                            return Term::Var(format!("b{k}"));
                        }
                    }
                    self.args.push(v.clone());
                    Term::Var(format!("v{}", self.args.len() - 1))
                }
                Term::Zero => Term::Zero,
                Term::Succ(a) => Term::Succ(Box::new(self.term(a))),
                Term::Plus(a, b) => {
                    let l = self.term(a);
                    Term::Plus(Box::new(l), Box::new(self.term(b)))
                }
                Term::Times(a, b) => {
                    let l = self.term(a);
                    Term::Times(Box::new(l), Box::new(self.term(b)))
                }
            }
        }
        fn formula(&mut self, f: &Formula) -> Formula {
            match f {
                Formula::Eq(a, b) => {
                    let l = self.term(a);
                    Formula::Eq(l, self.term(b))
                }
                Formula::In(a, b) => {
                    let l = self.term(a);
                    Formula::In(l, self.term(b))
                }
                Formula::Not(a) => Formula::Not(Box::new(self.formula(a))),
                Formula::Implies(a, b) => {
                    let l = self.formula(a);
                    Formula::Implies(Box::new(l), Box::new(self.formula(b)))
                }
                Formula::Op(t, a) => Formula::Op(*t, Box::new(self.formula(a))),
                Formula::Forall(x, a) => {
                    let name = format!("b{}", self.bound.len());
                    self.bound.push(x.clone());
                    let inner = self.formula(a);
                    self.bound.pop();
                    Formula::Forall(name, Box::new(inner))
                }
            }
        }
    }
    let mut k = K { bound: Vec::new(), args: Vec::new() };
    let key = k.formula(body);
    (key, k.args)
}

pub type Env = BTreeMap<String, Element>;

fn ref_term(m: &FiniteStructure, t: &Term, s: &Env) -> Element {
    let a = m.arithmetic();
    match t {
        Term::Var(v) => *s.get(v).unwrap_or_else(|| panic!("unassigned {v}")),
        Term::Zero => a.zero(),
        Term::Succ(x) => a.succ(ref_term(m, x, s)),
        Term::Plus(x, y) => a.plus(ref_term(m, x, s), ref_term(m, y, s)),
        Term::Times(x, y) => a.times(ref_term(m, x, s), ref_term(m, y, s)),
    }
}

/// Tarskian evaluation in a finite structure, asking the oracle directly at
/// every operator node.
pub fn ref_eval(m: &FiniteStructure, phi: &Formula, s: &Env) -> bool {
    match phi {
        Formula::Eq(a, b) => ref_term(m, a, s) == ref_term(m, b, s),
        Formula::In(a, b) => m.arithmetic().in_rel(ref_term(m, a, s), ref_term(m, b, s)),
        Formula::Not(a) => !ref_eval(m, a, s),
        Formula::Implies(a, b) => !ref_eval(m, a, s) || ref_eval(m, b, s),
        Formula::Forall(x, a) => (0..m.universe_size()).all(|v| {
            let mut s2 = s.clone();
            s2.insert(x.clone(), v);
            ref_eval(m, a, &s2)
        }),
        Formula::Op(tag, body) => {
            let (key, vars) = ref_key(body);
            let args: Vec<Element> = vars.iter().map(|v| s[v]).collect();
            m.oracle().answer(*tag, &key, &args)
        }
    }
}

/// Every assignment of `vars` into a universe of `size` elements.
pub fn all_envs(vars: &[String], size: u32) -> Vec<Env> {
    let mut out = vec![Env::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..size).map(move |x| {
                    let mut e = e.clone();
                    e.insert(v.clone(), x);
                    e
                })
            })
            .collect();
    }
    out
}

/// Free variables, collected without the library.
pub fn ref_free(phi: &Formula) -> Vec<String> {
    fn term(t: &Term, bound: &[String], out: &mut Vec<String>) {
        match t {
            Term::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Zero => {}
            Term::Succ(a) => term(a, bound, out),
            Term::Plus(a, b) | Term::Times(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
        }
    }
    fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match f {
            Formula::Eq(a, b) | Formula::In(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Not(a) | Formula::Op(_, a) => go(a, bound, out),
            Formula::Implies(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Forall(x, a) => {
                bound.push(x.clone());
                go(a, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(phi, &mut Vec::new(), &mut out);
    out
}

/// Close a premise set under modus ponens and report whether `goal` appears.
pub fn mp_derives(premises: &[Formula], goal: &Formula) -> bool {
    let mut known: HashSet<Formula> = premises.iter().cloned().collect();
    loop {
        let new: Vec<Formula> = known
            .iter()
            .filter_map(|f| match f {
                Formula::Implies(a, b) if known.contains(a) && !known.contains(b) => Some((**b).clone()),
                _ => None,
            })
            .collect();
        if new.is_empty() {
            return known.contains(goal);
        }
        known.extend(new);
    }
}
