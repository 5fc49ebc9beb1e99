//! Proving and refuting base-logic formulas.
//!
//! Operators are abstracted into fresh predicate symbols keyed by
//! `(tag, slot-canonical body)`; the result is an ordinary first-order formula
//! with equality, handed to a bounded tableau. Refutations always come with a
//! finite countermodel of the original formula, checked by evaluation.

mod tableau;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ordinal::{omega_times, Ordinal};
use crate::semantics::{countermodel_search_counted, eval, render_structure, Countermodel};
use crate::stratify::{apply_ordinal_map, collapse_map, stratify, OrdinalMap, StratifierSpec, StratifyError};
use crate::syntax::{close, on_set, slot_canonical, Formula, OperatorTag, Term, Var};
use crate::theory::StratifiedFragment;

use tableau::{Input, Outcome};

/// A first-order formula over the arithmetic signature, `In` and the fresh
/// predicate symbols `P0, P1, …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fol {
    Eq(Term, Term),
    In(Term, Term),
    Pred(usize, Vec<Term>),
    Not(Box<Fol>),
    Implies(Box<Fol>, Box<Fol>),
    Forall(Var, Box<Fol>),
}

impl fmt::Display for Fol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fol::Eq(a, b) => write!(f, "({a}={b})"),
            Fol::In(a, b) => write!(f, "In({a},{b})"),
            Fol::Pred(p, args) => {
                let args: Vec<String> = args.iter().map(Term::to_string).collect();
                if args.is_empty() {
                    write!(f, "P{p}")
                } else {
                    write!(f, "P{p}({})", args.join(","))
                }
            }
            Fol::Not(a) => write!(f, "~{a}"),
            Fol::Implies(a, b) => write!(f, "({a} -> {b})"),
            Fol::Forall(x, a) => write!(f, "forall {x}. {a}"),
        }
    }
}

/// The identity of a fresh predicate symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredicateKey {
    pub tag: OperatorTag,
    pub body: Formula,
}

impl fmt::Display for PredicateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Formula::op(self.tag, self.body.clone()))
    }
}

/// Assigns fresh symbols to operator keys. Sharing one abstractor across
/// several formulas gives them a common key table.
#[derive(Clone, Debug, Default)]
pub struct Abstractor {
    keys: Vec<PredicateKey>,
    index: HashMap<PredicateKey, usize>,
}

impl Abstractor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn abstract_formula(&mut self, phi: &Formula) -> Fol {
        match phi {
            Formula::Eq(a, b) => Fol::Eq(a.clone(), b.clone()),
            Formula::In(a, b) => Fol::In(a.clone(), b.clone()),
            Formula::Not(a) => Fol::Not(Box::new(self.abstract_formula(a))),
            Formula::Implies(a, b) => {
                Fol::Implies(Box::new(self.abstract_formula(a)), Box::new(self.abstract_formula(b)))
            }
            Formula::Forall(x, a) => Fol::Forall(x.clone(), Box::new(self.abstract_formula(a))),
            Formula::Op(tag, body) => {
                let c = slot_canonical(body);
                let key = PredicateKey { tag: *tag, body: c.key };
                let next = self.keys.len();
                let id = *self.index.entry(key.clone()).or_insert_with(|| next);
                if id == next {
                    self.keys.push(key);
                }
                Fol::Pred(id, c.args.into_iter().map(Term::Var).collect())
            }
        }
    }

    pub fn keys(&self) -> &[PredicateKey] {
        &self.keys
    }
}

/// A formula with its operators replaced by fresh predicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractedFormula {
    pub formula: Fol,
    /// `key_table[i]` is the key of `Pi`.
    pub key_table: Vec<PredicateKey>,
    pub source: Formula,
}

impl fmt::Display for AbstractedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula)?;
        for (i, k) in self.key_table.iter().enumerate() {
            write!(f, "\nP{i} := {k}")?;
        }
        Ok(())
    }
}

pub fn abstract_operators(phi: &Formula) -> AbstractedFormula {
    let mut a = Abstractor::new();
    let formula = a.abstract_formula(phi);
    AbstractedFormula { formula, key_table: a.keys, source: phi.clone() }
}

#[derive(Clone, Debug)]
enum Prop {
    Atom(usize),
    Not(Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
}

/// Rename bound variables by nesting level so alphabetic variants compare equal.
fn alpha_normal(f: &Fol, env: &mut Vec<Var>) -> Fol {
    fn term(t: &Term, env: &[Var]) -> Term {
        match t {
            Term::Var(v) => match env.iter().rposition(|b| b == v) {
                Some(level) => Term::Var(format!("%{level}")),
                None => t.clone(),
            },
            Term::Zero => Term::Zero,
            Term::Succ(a) => Term::succ(term(a, env)),
            Term::Plus(a, b) => Term::plus(term(a, env), term(b, env)),
            Term::Times(a, b) => Term::times(term(a, env), term(b, env)),
        }
    }
    match f {
        Fol::Eq(a, b) => Fol::Eq(term(a, env), term(b, env)),
        Fol::In(a, b) => Fol::In(term(a, env), term(b, env)),
        Fol::Pred(p, args) => Fol::Pred(*p, args.iter().map(|a| term(a, env)).collect()),
        Fol::Not(a) => Fol::Not(Box::new(alpha_normal(a, env))),
        Fol::Implies(a, b) => Fol::Implies(Box::new(alpha_normal(a, env)), Box::new(alpha_normal(b, env))),
        Fol::Forall(x, a) => {
            let level = env.len();
            env.push(x.clone());
            let body = alpha_normal(a, env);
            env.pop();
            Fol::Forall(format!("%{level}"), Box::new(body))
        }
    }
}

fn skeleton(f: &Fol, atoms: &mut HashMap<Fol, usize>) -> Prop {
    match f {
        Fol::Not(a) => Prop::Not(Box::new(skeleton(a, atoms))),
        Fol::Implies(a, b) => Prop::Implies(Box::new(skeleton(a, atoms)), Box::new(skeleton(b, atoms))),
        other => {
            let key = alpha_normal(other, &mut Vec::new());
            let next = atoms.len();
            Prop::Atom(*atoms.entry(key).or_insert(next))
        }
    }
}

fn prop_eval(p: &Prop, v: &[Option<bool>]) -> Result<bool, usize> {
    match p {
        Prop::Atom(i) => v[*i].ok_or(*i),
        Prop::Not(a) => prop_eval(a, v).map(|b| !b),
        Prop::Implies(a, b) => match prop_eval(a, v) {
            Ok(false) => Ok(true),
            Ok(true) => prop_eval(b, v),
            Err(i) => match prop_eval(b, v) {
                Ok(true) => Ok(true),
                _ => Err(i),
            },
        },
    }
}

fn prop_taut(p: &Prop, v: &mut Vec<Option<bool>>) -> bool {
    match prop_eval(p, v) {
        Ok(b) => b,
        Err(i) => [false, true].into_iter().all(|b| {
            v[i] = Some(b);
            let r = prop_taut(p, v);
            v[i] = None;
            r
        }),
    }
}

/// Is the propositional skeleton a tautology? Atoms are the atomic formulas
/// and the maximal quantified subformulas, compared up to bound-variable names.
pub fn taut_check(phi: &AbstractedFormula) -> bool {
    let mut atoms = HashMap::new();
    let p = skeleton(&phi.formula, &mut atoms);
    prop_taut(&p, &mut vec![None; atoms.len()])
}

/// Resource limits for one proof attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Tableau rule applications per run.
    pub steps: usize,
    /// Largest universe tried by the countermodel search.
    pub max_universe: u32,
    /// Partial evaluations allowed to the countermodel search.
    pub oracle_budget: usize,
}

impl Budget {
    /// The default shape for a single budget number. Zero disables everything.
    pub fn new(n: usize) -> Self {
        Budget {
            steps: n,
            max_universe: if n == 0 { 0 } else { 3 },
            oracle_budget: n.saturating_mul(20),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(1000)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProofStatus {
    Proved,
    Refuted,
    Unknown,
}

impl ProofStatus {
    pub fn name(self) -> &'static str {
        match self {
            ProofStatus::Proved => "proved",
            ProofStatus::Refuted => "refuted",
            ProofStatus::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BudgetSpent {
    pub tableau_steps: usize,
    pub instantiations: usize,
    pub branches: usize,
    pub tableau_runs: usize,
    pub countermodel_candidates: usize,
}

impl BudgetSpent {
    fn absorb(&mut self, s: tableau::Stats) {
        self.tableau_steps += s.steps;
        self.instantiations += s.instantiations;
        self.branches += s.branches;
        self.tableau_runs += 1;
    }
}

#[derive(Clone, Debug)]
pub struct ProofReport {
    pub status: ProofStatus,
    /// Indices into the premise list; empty unless proved.
    pub used_premises: Vec<usize>,
    /// Present exactly when refuted; it falsifies the goal under the premises.
    pub countermodel: Option<Countermodel>,
    pub spent: BudgetSpent,
}

impl ProofReport {
    fn unknown(spent: BudgetSpent) -> Self {
        ProofReport { status: ProofStatus::Unknown, used_premises: Vec::new(), countermodel: None, spent }
    }

    pub fn is_proved(&self) -> bool {
        self.status == ProofStatus::Proved
    }

    pub fn is_refuted(&self) -> bool {
        self.status == ProofStatus::Refuted
    }

    pub fn witness<'a>(&self, premises: &'a [Formula]) -> Vec<&'a Formula> {
        self.used_premises.iter().map(|&i| &premises[i]).collect()
    }

    /// Structured text: status, witness premises, countermodel, counters.
    pub fn render(&self, premises: &[Formula]) -> String {
        let mut out = format!("status: {}\n", self.status);
        for p in self.witness(premises) {
            out.push_str(&format!("witness: {p}\n"));
        }
        if let Some(m) = &self.countermodel {
            out.push_str(&format!("countermodel: variant {} assignment {}\n", m.variant.name(), m.assignment));
            for line in render_structure(m.structure.arithmetic(), &m.oracle).lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        let s = &self.spent;
        out.push_str(&format!(
            "budget: steps={} instantiations={} branches={} runs={} candidates={}\n",
            s.tableau_steps, s.instantiations, s.branches, s.tableau_runs, s.countermodel_candidates
        ));
        out
    }
}

fn refute_with_search(goal: &Formula, budget: Budget, mut spent: BudgetSpent) -> ProofReport {
    let (found, tried) =
        countermodel_search_counted(goal, budget.max_universe, budget.oracle_budget);
    spent.countermodel_candidates += tried;
    match found {
        Some(m) => {
            debug_assert!(!eval(&m.structure, goal, &m.assignment).unwrap_or(true));
            ProofReport { status: ProofStatus::Refuted, used_premises: Vec::new(), countermodel: Some(m), spent }
        }
        None => ProofReport::unknown(spent),
    }
}

/// Try to prove or refute a formula within the budget.
pub fn prove_bounded(phi: &AbstractedFormula, budget: Budget) -> ProofReport {
    let mut spent = BudgetSpent::default();
    let (outcome, stats) = tableau::run(vec![Input { sign: false, formula: phi.formula.clone(), tag: None }], budget.steps);
    spent.absorb(stats);
    match outcome {
        Outcome::Closed(_) => {
            ProofReport { status: ProofStatus::Proved, used_premises: Vec::new(), countermodel: None, spent }
        }
        Outcome::Open | Outcome::Exhausted => refute_with_search(&phi.source, budget, spent),
    }
}

/// [`prove_bounded`] on the abstraction of `phi`.
pub fn prove_formula(phi: &Formula, budget: Budget) -> ProofReport {
    prove_bounded(&abstract_operators(phi), budget)
}

/// Subsets with more premises than this are minimized greedily instead of by
/// enumeration.
const MAX_ENUMERATED_CORE: usize = 12;

fn closes(goal: &Fol, premises: &[(usize, Fol)], subset: &[usize], budget: Budget, spent: &mut BudgetSpent) -> Option<BTreeSet<u32>> {
    let mut inputs: Vec<Input> = subset
        .iter()
        .map(|&i| Input { sign: true, formula: premises[i].1.clone(), tag: Some(premises[i].0 as u32) })
        .collect();
    inputs.push(Input { sign: false, formula: goal.clone(), tag: None });
    let (outcome, stats) = tableau::run(inputs, budget.steps);
    spent.absorb(stats);
    match outcome {
        Outcome::Closed(d) => Some(d),
        _ => None,
    }
}

fn combinations(items: &[usize], k: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            if go(items, k, i + 1, cur, visit) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(items, k, 0, &mut Vec::new(), &mut visit)
}

/// Does `premises ⊨ phi`? A proof reports the first premise subset, by size
/// and then lexicographically, whose implication the tableau closes. The
/// enumeration runs over the premises the first full proof actually used.
pub fn entails(premises: &[Formula], phi: &Formula, budget: Budget) -> ProofReport {
    let mut spent = BudgetSpent::default();
    let closed: Vec<Formula> = premises.iter().map(close).collect();
    let mut abs = Abstractor::new();
    let goal = abs.abstract_formula(phi);
    let fol: Vec<(usize, Fol)> = closed.iter().enumerate().map(|(i, p)| (i, abs.abstract_formula(p))).collect();
    let all: Vec<usize> = (0..fol.len()).collect();

    let Some(core) = closes(&goal, &fol, &all, budget, &mut spent) else {
        let chain = Formula::implies_chain(closed.iter().cloned(), phi.clone());
        return refute_with_search(&chain, budget, spent);
    };
    let core: Vec<usize> = core.into_iter().map(|i| i as usize).collect();

    let used = if core.len() <= MAX_ENUMERATED_CORE {
        let mut found = None;
        for k in 0..=core.len() {
            if combinations(&core, k, |subset| {
                if closes(&goal, &fol, subset, budget, &mut spent).is_some() {
                    found = Some(subset.to_vec());
                    true
                } else {
                    false
                }
            }) {
                break;
            }
        }
        found.unwrap_or(core)
    } else {
        let mut kept = core;
        let mut i = 0;
        while i < kept.len() {
            let trial: Vec<usize> = kept.iter().copied().filter(|&x| x != kept[i]).collect();
            if closes(&goal, &fol, &trial, budget, &mut spent).is_some() {
                kept = trial;
            } else {
                i += 1;
            }
        }
        kept
    };
    ProofReport { status: ProofStatus::Proved, used_premises: used, countermodel: None, spent }
}

#[derive(Clone, Debug)]
pub struct UpwardReport {
    pub plain: ProofReport,
    pub stratified: ProofReport,
    pub stratified_premises: Vec<Formula>,
    pub stratified_goal: Formula,
}

impl UpwardReport {
    /// One side proved while the other refuted.
    pub fn disagrees(&self) -> bool {
        matches!(
            (self.plain.status, self.stratified.status),
            (ProofStatus::Proved, ProofStatus::Refuted) | (ProofStatus::Refuted, ProofStatus::Proved)
        )
    }

    /// Both proved with the same premise indices.
    pub fn witnesses_correspond(&self) -> bool {
        self.plain.is_proved() && self.stratified.is_proved() && self.plain.used_premises == self.stratified.used_premises
    }
}

/// Run `T ⊨ φ` and `T⁺ ⊨ φ⁺` side by side.
pub fn upward_check(
    theory: &[Formula],
    phi: &Formula,
    x: &StratifierSpec,
    budget: Budget,
) -> Result<UpwardReport, StratifyError> {
    let stratified_premises = theory.iter().map(|t| stratify(t, x)).collect::<Result<Vec<_>, _>>()?;
    let stratified_goal = stratify(phi, x)?;
    Ok(UpwardReport {
        plain: entails(theory, phi, budget),
        stratified: entails(&stratified_premises, &stratified_goal, budget),
        stratified_premises,
        stratified_goal,
    })
}

#[derive(Debug, Clone, Error)]
pub enum CollapseError {
    #[error("n must be positive")]
    ZeroN,
    #[error("goal mentions {0}, which is not below w*{1}")]
    GoalTooHigh(Ordinal, u64),
    #[error("no proof of the goal from the premises within the budget (status {0})")]
    NoCore(ProofStatus),
    #[error("rewritten premise {0} is not in the fragment below w*{1}; the fragment is not uniform")]
    OutsideFragment(Formula, u64),
    #[error("the rewritten premises do not prove the goal within the budget (status {0})")]
    ReproofFailed(ProofStatus),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
}

#[derive(Clone, Debug)]
pub struct CollapseReport {
    pub original: ProofReport,
    pub core: Vec<Formula>,
    pub map: OrdinalMap,
    pub rewritten: Vec<Formula>,
    pub reproof: ProofReport,
}

/// Push a proof of `phi` below `ω·n`: find a proof core, collapse its
/// superscripts with [`collapse_map`], and re-prove `phi` from the rewritten
/// premises, each of which must lie in the fragment below `ω·n`.
pub fn verify_collapse(
    premises: &StratifiedFragment,
    phi: &Formula,
    n: u64,
    budget: Budget,
) -> Result<CollapseReport, CollapseError> {
    if n == 0 {
        return Err(CollapseError::ZeroN);
    }
    let bound = omega_times(n);
    if let Some(&a) = on_set(phi).iter().find(|a| **a >= bound) {
        return Err(CollapseError::GoalTooHigh(a, n));
    }
    let members: Vec<Formula> = premises.iter().cloned().collect();
    let original = entails(&members, phi, budget);
    if !original.is_proved() {
        return Err(CollapseError::NoCore(original.status));
    }
    let core: Vec<Formula> = original.witness(&members).into_iter().cloned().collect();
    let mut supers = on_set(phi);
    for c in &core {
        supers.extend(on_set(c));
    }
    let map = collapse_map(&supers, n)?;
    let rewritten: Vec<Formula> = core.iter().map(|c| apply_ordinal_map(c, &map)).collect();
    for r in &rewritten {
        if !premises.contains(r) || on_set(r).iter().any(|a| *a >= bound) {
            return Err(CollapseError::OutsideFragment(r.clone(), n));
        }
    }
    let reproof = entails(&rewritten, phi, budget);
    if !reproof.is_proved() {
        return Err(CollapseError::ReproofFailed(reproof.status));
    }
    Ok(CollapseReport { original, core, map, rewritten, reproof })
}
