//! Terms and formulas of the base logic over the arithmetic signature
//! `(0, S, +, ·)` plus the uninterpreted binary relation `In`.
//!
//! A single [`Formula`] type covers all three languages: arithmetic formulas
//! (no operator nodes), epistemic formulas (only [`OperatorTag::Plain`]) and
//! stratified formulas (only [`OperatorTag::Indexed`]).

mod canonical;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ordinal::Ordinal;

pub use canonical::{slot_canonical, SlotCanonical};
pub use parse::{parse_formula, parse_term, render_formula, ParseError, MAX_NESTING, MAX_NUMERAL};

pub type Var = String;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Zero,
    Succ(Box<Term>),
    Plus(Box<Term>, Box<Term>),
    Times(Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorTag {
    Plain,
    Indexed(Ordinal),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    /// `In(x, e)` stands for `x ∈ W_e`.
    In(Term, Term),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Op(OperatorTag, Box<Formula>),
}

/// Which operator language a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Language {
    /// No operator nodes at all; belongs to every language.
    Arithmetic,
    /// Only plain `K`.
    Epistemic,
    /// Only `K^α`.
    Stratified,
    /// Both tag kinds occur.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("cannot substitute for `{var}`: the term would be captured by the binder `forall {binder}`")]
    Capture { var: Var, binder: Var },
    #[error("assignment has no value for free variable `{0}`")]
    MissingAssignment(Var),
    #[error("closure variable list misses free variable `{0}`")]
    ClosureMissing(Var),
}

/// A finite map from variables to naturals, used to form `φ^s`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<Var, u64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, value: u64) -> Self {
        self.0.insert(var.to_string(), value);
        self
    }

    pub fn get(&self, var: &str) -> Option<u64> {
        self.0.get(var).copied()
    }

    /// `s(x|a)`.
    pub fn updated(&self, var: &str, value: u64) -> Self {
        self.clone().with(var, value)
    }
}

impl FromIterator<(Var, u64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, u64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Box::new(t))
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn times(a: Term, b: Term) -> Term {
        Term::Times(Box::new(a), Box::new(b))
    }

    /// The numeral `S(...S(0))` with `n` successors.
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::Zero, |t, _| Term::succ(t))
    }

    /// If this term is a numeral, its value.
    pub fn as_numeral(&self) -> Option<u64> {
        let mut n = 0u64;
        let mut t = self;
        loop {
            match t {
                Term::Zero => return Some(n),
                Term::Succ(inner) => {
                    n += 1;
                    t = inner;
                }
                _ => return None,
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Zero => true,
            Term::Succ(t) => t.is_ground(),
            Term::Plus(a, b) | Term::Times(a, b) => a.is_ground() && b.is_ground(),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::Zero => false,
            Term::Succ(t) => t.contains_var(x),
            Term::Plus(a, b) | Term::Times(a, b) => a.contains_var(x) || b.contains_var(x),
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Zero => {}
            Term::Succ(t) => t.vars_into(out),
            Term::Plus(a, b) | Term::Times(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
        }
    }

    /// Replace every occurrence of `x` by `u`. Terms have no binders.
    pub fn substitute(&self, x: &str, u: &Term) -> Term {
        match self {
            Term::Var(v) if v == x => u.clone(),
            Term::Var(_) | Term::Zero => self.clone(),
            Term::Succ(t) => Term::succ(t.substitute(x, u)),
            Term::Plus(a, b) => Term::plus(a.substitute(x, u), b.substitute(x, u)),
            Term::Times(a, b) => Term::times(a.substitute(x, u), b.substitute(x, u)),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero => 1,
            Term::Succ(t) => 1 + t.node_count(),
            Term::Plus(a, b) | Term::Times(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    pub fn op(tag: OperatorTag, f: Formula) -> Formula {
        Formula::Op(tag, Box::new(f))
    }

    /// Plain `K φ`.
    pub fn k(f: Formula) -> Formula {
        Formula::op(OperatorTag::Plain, f)
    }

    /// `K^α φ`.
    pub fn k_at(alpha: Ordinal, f: Formula) -> Formula {
        Formula::op(OperatorTag::Indexed(alpha), f)
    }

    /// `φ ∧ ψ ≡ ¬(φ → ¬ψ)`.
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    /// `φ ∨ ψ ≡ ¬φ → ψ`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    /// `φ ↔ ψ ≡ (φ → ψ) ∧ (ψ → φ)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// `∃x φ ≡ ¬∀x ¬φ`.
    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::not(Formula::forall(x, Formula::not(f)))
    }

    /// `φ₁ → φ₂ → … → ψ`, right-nested.
    pub fn implies_chain(premises: impl IntoIterator<Item = Formula>, conclusion: Formula) -> Formula {
        let premises: Vec<Formula> = premises.into_iter().collect();
        premises
            .into_iter()
            .rev()
            .fold(conclusion, |acc, p| Formula::implies(p, acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::In(..))
    }

    pub fn language(&self) -> Language {
        let (mut plain, mut indexed) = (false, false);
        self.visit_tags(&mut |t| match t {
            OperatorTag::Plain => plain = true,
            OperatorTag::Indexed(_) => indexed = true,
        });
        match (plain, indexed) {
            (false, false) => Language::Arithmetic,
            (true, false) => Language::Epistemic,
            (false, true) => Language::Stratified,
            (true, true) => Language::Mixed,
        }
    }

    /// Operator-free.
    pub fn is_arithmetic(&self) -> bool {
        self.language() == Language::Arithmetic
    }

    /// All operator tags are plain `K`.
    pub fn is_epistemic(&self) -> bool {
        matches!(self.language(), Language::Arithmetic | Language::Epistemic)
    }

    /// All operator tags carry superscripts.
    pub fn is_stratified(&self) -> bool {
        matches!(self.language(), Language::Arithmetic | Language::Stratified)
    }

    fn visit_tags(&self, f: &mut impl FnMut(OperatorTag)) {
        match self {
            Formula::Eq(..) | Formula::In(..) => {}
            Formula::Not(a) | Formula::Forall(_, a) => a.visit_tags(f),
            Formula::Implies(a, b) => {
                a.visit_tags(f);
                b.visit_tags(f);
            }
            Formula::Op(t, a) => {
                f(*t);
                a.visit_tags(f);
            }
        }
    }

    /// Number of formula and term nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Eq(a, b) | Formula::In(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Op(_, a) => 1 + a.node_count(),
            Formula::Implies(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// The number of operator nodes.
    pub fn operator_count(&self) -> usize {
        let mut n = 0;
        self.visit_tags(&mut |_| n += 1);
        n
    }

    pub fn is_sentence(&self) -> bool {
        free_vars(self).is_empty()
    }
}

/// `FV(φ)`.
pub fn free_vars(phi: &Formula) -> BTreeSet<Var> {
    free_vars_ordered(phi).into_iter().collect()
}

/// Free variables in order of first occurrence (left to right).
pub fn free_vars_ordered(phi: &Formula) -> Vec<Var> {
    fn go(phi: &Formula, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let term = |t: &Term, bound: &Vec<Var>, out: &mut Vec<Var>| {
            let mut vs = Vec::new();
            t.vars_into(&mut vs);
            for v in vs {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match phi {
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

fn is_free_in(x: &str, phi: &Formula) -> bool {
    match phi {
        Formula::Eq(a, b) | Formula::In(a, b) => a.contains_var(x) || b.contains_var(x),
        Formula::Not(a) | Formula::Op(_, a) => is_free_in(x, a),
        Formula::Implies(a, b) => is_free_in(x, a) || is_free_in(x, b),
        Formula::Forall(y, a) => y != x && is_free_in(x, a),
    }
}

/// `φ(x|u)`: substitute `u` for the free occurrences of `x`.
///
/// Fails when some free occurrence of `x` sits under a binder for a variable of
/// `u`.
pub fn substitute(phi: &Formula, x: &str, u: &Term) -> Result<Formula, SyntaxError> {
    let mut u_vars = Vec::new();
    u.vars_into(&mut u_vars);
    subst_inner(phi, x, u, &u_vars)
}

fn subst_inner(phi: &Formula, x: &str, u: &Term, u_vars: &[Var]) -> Result<Formula, SyntaxError> {
    Ok(match phi {
        Formula::Eq(a, b) => Formula::Eq(a.substitute(x, u), b.substitute(x, u)),
        Formula::In(a, b) => Formula::In(a.substitute(x, u), b.substitute(x, u)),
        Formula::Not(a) => Formula::not(subst_inner(a, x, u, u_vars)?),
        Formula::Implies(a, b) => {
            Formula::implies(subst_inner(a, x, u, u_vars)?, subst_inner(b, x, u, u_vars)?)
        }
        Formula::Op(t, a) => Formula::op(*t, subst_inner(a, x, u, u_vars)?),
        Formula::Forall(y, a) => {
            if y == x || !is_free_in(x, a) {
                phi.clone()
            } else if u_vars.contains(y) {
                return Err(SyntaxError::Capture {
                    var: x.to_string(),
                    binder: y.clone(),
                });
            } else {
                Formula::forall(y, subst_inner(a, x, u, u_vars)?)
            }
        }
    })
}

/// True iff `psi` is an alphabetic variant of `phi`.
pub fn alpha_equal(phi: &Formula, psi: &Formula) -> bool {
    fn var_eq(a: &str, b: &str, env: &[(Var, Var)]) -> bool {
        for (l, r) in env.iter().rev() {
            match (l == a, r == b) {
                (true, true) => return true,
                (false, false) => continue,
                _ => return false,
            }
        }
        a == b
    }
    fn term_eq(s: &Term, t: &Term, env: &[(Var, Var)]) -> bool {
        match (s, t) {
            (Term::Var(a), Term::Var(b)) => var_eq(a, b, env),
            (Term::Zero, Term::Zero) => true,
            (Term::Succ(a), Term::Succ(b)) => term_eq(a, b, env),
            (Term::Plus(a1, a2), Term::Plus(b1, b2)) | (Term::Times(a1, a2), Term::Times(b1, b2)) => {
                term_eq(a1, b1, env) && term_eq(a2, b2, env)
            }
            _ => false,
        }
    }
    fn go(phi: &Formula, psi: &Formula, env: &mut Vec<(Var, Var)>) -> bool {
        match (phi, psi) {
            (Formula::Eq(a, b), Formula::Eq(c, d)) | (Formula::In(a, b), Formula::In(c, d)) => {
                term_eq(a, c, env) && term_eq(b, d, env)
            }
            (Formula::Not(a), Formula::Not(b)) => go(a, b, env),
            (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
            (Formula::Op(t1, a), Formula::Op(t2, b)) => t1 == t2 && go(a, b, env),
            (Formula::Forall(x, a), Formula::Forall(y, b)) => {
                env.push((x.clone(), y.clone()));
                let r = go(a, b, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(phi, psi, &mut Vec::new())
}

/// `φ^s`: replace each free variable by the numeral of its value under `s`.
pub fn assign_substitute(phi: &Formula, s: &Assignment) -> Result<Formula, SyntaxError> {
    let mut out = phi.clone();
    for x in free_vars_ordered(phi) {
        let value = s.get(&x).ok_or_else(|| SyntaxError::MissingAssignment(x.clone()))?;
        // numerals are ground, so substitution cannot capture
        out = substitute(&out, &x, &Term::numeral(value))?;
    }
    Ok(out)
}

/// `∀x₁ ⋯ ∀xₙ φ` with `x₁` outermost.
pub fn universal_closure(phi: &Formula, vars: &[Var]) -> Result<Formula, SyntaxError> {
    if let Some(missing) = free_vars_ordered(phi).into_iter().find(|v| !vars.contains(v)) {
        return Err(SyntaxError::ClosureMissing(missing));
    }
    Ok(vars
        .iter()
        .rev()
        .fold(phi.clone(), |acc, x| Formula::forall(x, acc)))
}

/// Universal closure over the free variables in first-occurrence order.
pub fn close(phi: &Formula) -> Formula {
    let vars = free_vars_ordered(phi);
    universal_closure(phi, &vars).expect("closure over own free variables")
}

/// Nesting depth of operators; indexed and plain operators count alike.
pub fn depth(phi: &Formula) -> usize {
    match phi {
        Formula::Eq(..) | Formula::In(..) => 0,
        Formula::Not(a) | Formula::Forall(_, a) => depth(a),
        Formula::Implies(a, b) => depth(a).max(depth(b)),
        Formula::Op(_, a) => depth(a) + 1,
    }
}

/// `On(φ)`: every superscript occurring in `φ`.
pub fn on_set(phi: &Formula) -> BTreeSet<Ordinal> {
    let mut out = BTreeSet::new();
    phi.visit_tags(&mut |t| {
        if let OperatorTag::Indexed(a) = t {
            out.insert(a);
        }
    });
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        parse::render_term_into(self, &mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorTag::Plain => write!(f, "K"),
            OperatorTag::Indexed(a) => write!(f, "K^{{{a}}}"),
        }
    }
}
