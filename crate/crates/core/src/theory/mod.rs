//! Background theories as finite presentations.
//!
//! Schemas are instantiated over a finite operand pool, closed under `K` a
//! bounded number of times, and stratified into finite samples of `T⊕`.
//! Stratified fragments can be restricted below an ordinal and checked for
//! closure under order-preserving superscript maps over a finite pool.

mod file;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::prove::{abstract_operators, prove_formula, taut_check, Budget, ProofStatus};
use crate::stratify::{apply_ordinal_map, recognize_stratified, stratify, OrdinalMap, StratifierSpec, StratifyError};
use crate::syntax::{
    assign_substitute, close, depth, free_vars, free_vars_ordered, on_set, parse_formula, substitute,
    universal_closure, Assignment, Formula, SyntaxError, Term, Var,
};

pub use file::{parse_theory, render_theory, TheoryFileError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemaId {
    E1,
    E2,
    E2prime,
    E3,
    E4,
    AssignedValidity,
    Mechanicalness,
    EAInduction,
    PAAxiom,
}

impl SchemaId {
    pub const ALL: [SchemaId; 9] = [
        SchemaId::E1,
        SchemaId::E2,
        SchemaId::E2prime,
        SchemaId::E3,
        SchemaId::E4,
        SchemaId::AssignedValidity,
        SchemaId::Mechanicalness,
        SchemaId::EAInduction,
        SchemaId::PAAxiom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemaId::E1 => "E1",
            SchemaId::E2 => "E2",
            SchemaId::E2prime => "E2prime",
            SchemaId::E3 => "E3",
            SchemaId::E4 => "E4",
            SchemaId::AssignedValidity => "AssignedValidity",
            SchemaId::Mechanicalness => "Mechanicalness",
            SchemaId::EAInduction => "EAInduction",
            SchemaId::PAAxiom => "PAAxiom",
        }
    }

    /// Schemas taking two operands.
    pub fn is_binary(self) -> bool {
        matches!(self, SchemaId::E2 | SchemaId::E2prime)
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemaId {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "E2'" {
            return Ok(SchemaId::E2prime);
        }
        SchemaId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| TheoryError::UnknownSchema(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("schema {schema} needs the parameter `{param}`")]
    MissingParameter { schema: SchemaId, param: &'static str },
    #[error("E2prime side condition fails: depth {phi} > depth {psi}")]
    DepthCondition { phi: usize, psi: usize },
    #[error("witness variable `{0}` occurs free in the operand")]
    WitnessFree(Var),
    #[error("operand is not certified valid (prover status {0})")]
    NotValid(ProofStatus),
    #[error("there are only {0} arithmetic axioms")]
    BadIndex(usize),
    #[error("`{0}` is not a sentence")]
    NotSentence(Formula),
    #[error("`{0}` is not an L_EA formula")]
    NotEpistemic(Formula),
    #[error("`{0}` is not the image of any stratifier")]
    NotStratified(Formula),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
}

/// Parameters of a schema instance. Which ones are required depends on the
/// schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemaArgs {
    pub phi: Option<Formula>,
    pub psi: Option<Formula>,
    pub assignment: Option<Assignment>,
    /// Closure order; defaults to first occurrence.
    pub closure_vars: Option<Vec<Var>>,
    /// The induction variable, or the `x` of Mechanicalness.
    pub var: Option<Var>,
    /// The `e` of Mechanicalness.
    pub witness: Option<Var>,
    /// Which arithmetic axiom.
    pub index: Option<usize>,
    /// When present, E1 and AssignedValidity operands must be proved valid.
    pub validity_budget: Option<Budget>,
}

impl SchemaArgs {
    pub fn phi(phi: Formula) -> Self {
        SchemaArgs { phi: Some(phi), ..Self::default() }
    }

    pub fn pair(phi: Formula, psi: Formula) -> Self {
        SchemaArgs { phi: Some(phi), psi: Some(psi), ..Self::default() }
    }

    pub fn index(i: usize) -> Self {
        SchemaArgs { index: Some(i), ..Self::default() }
    }
}

fn need<'a, T>(v: &'a Option<T>, schema: SchemaId, param: &'static str) -> Result<&'a T, TheoryError> {
    v.as_ref().ok_or(TheoryError::MissingParameter { schema, param })
}

fn check_valid(phi: &Formula, budget: Option<Budget>) -> Result<(), TheoryError> {
    if let Some(b) = budget {
        let r = prove_formula(phi, b);
        if !r.is_proved() {
            return Err(TheoryError::NotValid(r.status));
        }
    }
    Ok(())
}

/// The arithmetic axioms, one sentence per line of the bundled data file.
pub fn pa_axioms() -> &'static [Formula] {
    static AXIOMS: OnceLock<Vec<Formula>> = OnceLock::new();
    AXIOMS.get_or_init(|| {
        include_str!("pa_axioms.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| parse_formula(l).expect("bundled axioms parse"))
            .collect()
    })
}

/// Build one schema instance as a sentence.
pub fn instantiate_schema(id: SchemaId, args: &SchemaArgs) -> Result<Formula, TheoryError> {
    let k = Formula::k;
    let body = match id {
        SchemaId::PAAxiom => {
            let i = *need(&args.index, id, "index")?;
            return pa_axioms().get(i).cloned().ok_or(TheoryError::BadIndex(pa_axioms().len()));
        }
        SchemaId::E1 => {
            let phi = need(&args.phi, id, "phi")?;
            check_valid(phi, args.validity_budget)?;
            k(phi.clone())
        }
        SchemaId::E2 | SchemaId::E2prime => {
            let phi = need(&args.phi, id, "phi")?;
            let psi = need(&args.psi, id, "psi")?;
            if id == SchemaId::E2prime && depth(phi) > depth(psi) {
                return Err(TheoryError::DepthCondition { phi: depth(phi), psi: depth(psi) });
            }
            Formula::implies(
                k(Formula::implies(phi.clone(), psi.clone())),
                Formula::implies(k(phi.clone()), k(psi.clone())),
            )
        }
        SchemaId::E3 => {
            let phi = need(&args.phi, id, "phi")?;
            Formula::implies(k(phi.clone()), phi.clone())
        }
        SchemaId::E4 => {
            let phi = need(&args.phi, id, "phi")?;
            Formula::implies(k(phi.clone()), k(k(phi.clone())))
        }
        SchemaId::AssignedValidity => {
            let phi = need(&args.phi, id, "phi")?;
            let s = need(&args.assignment, id, "assignment")?;
            check_valid(phi, args.validity_budget)?;
            k(assign_substitute(phi, s)?)
        }
        SchemaId::Mechanicalness => {
            let phi = need(&args.phi, id, "phi")?;
            let x = args.var.clone().unwrap_or_else(|| "x".into());
            let e = args.witness.clone().unwrap_or_else(|| "e".into());
            if e == x || free_vars(phi).contains(&e) {
                return Err(TheoryError::WitnessFree(e));
            }
            let member = Formula::In(Term::var(&x), Term::var(&e));
            Formula::exists(&e, Formula::forall(&x, Formula::iff(k(phi.clone()), member)))
        }
        SchemaId::EAInduction => {
            let phi = need(&args.phi, id, "phi")?;
            let x = args
                .var
                .clone()
                .or_else(|| free_vars_ordered(phi).into_iter().next())
                .unwrap_or_else(|| "x".into());
            let base = substitute(phi, &x, &Term::Zero)?;
            let step = substitute(phi, &x, &Term::succ(Term::var(&x)))?;
            Formula::implies(
                base,
                Formula::implies(
                    Formula::forall(&x, Formula::implies(phi.clone(), step)),
                    Formula::forall(&x, phi.clone()),
                ),
            )
        }
    };
    Ok(match &args.closure_vars {
        Some(vars) => universal_closure(&body, vars)?,
        None => close(&body),
    })
}

/// `F, F ∪ KF, …` iterated `steps` times, in a stable order without repeats.
pub fn k_close(fragment: &[Formula], steps: usize) -> Vec<Formula> {
    let mut seen: HashSet<Formula> = HashSet::new();
    let mut out: Vec<Formula> = Vec::new();
    for f in fragment {
        if seen.insert(f.clone()) {
            out.push(f.clone());
        }
    }
    let mut frontier = out.clone();
    for _ in 0..steps {
        let mut next = Vec::new();
        for f in &frontier {
            let kf = Formula::k(f.clone());
            if seen.insert(kf.clone()) {
                out.push(kf.clone());
                next.push(kf);
            }
        }
        frontier = next;
    }
    out
}

/// Where a member of an expanded presentation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Base,
    Instance(SchemaId),
    /// `Kφ` added by closing a member `φ` under `K`.
    KClosure,
}

/// A finite presentation of an `L_EA` theory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoryPresentation {
    pub base_sentences: Vec<Formula>,
    /// Schemas instantiated over every operand in `pool`.
    pub schemas: BTreeSet<SchemaId>,
    /// Individually listed instances.
    pub instances: Vec<(SchemaId, SchemaArgs)>,
    /// Operands for `schemas`; the base sentences when empty.
    pub pool: Vec<Formula>,
    pub k_closure_depth: usize,
}

impl TheoryPresentation {
    pub fn new(base_sentences: Vec<Formula>) -> Self {
        TheoryPresentation { base_sentences, ..Self::default() }
    }

    pub fn with_schema(mut self, id: SchemaId) -> Self {
        self.schemas.insert(id);
        self
    }

    pub fn with_pool(mut self, pool: Vec<Formula>) -> Self {
        self.pool = pool;
        self
    }

    pub fn with_k_closure(mut self, depth: usize) -> Self {
        self.k_closure_depth = depth;
        self
    }

    fn operands(&self) -> &[Formula] {
        if self.pool.is_empty() {
            &self.base_sentences
        } else {
            &self.pool
        }
    }

    /// Instances of a pooled schema. Operands failing a side condition are
    /// skipped; E1 and AssignedValidity keep only operands whose propositional
    /// skeleton is a tautology, which certifies validity.
    fn pooled_instances(&self, id: SchemaId) -> Vec<Formula> {
        let ops = self.operands();
        let certified = |phi: &Formula| taut_check(&abstract_operators(phi));
        let mut out = Vec::new();
        match id {
            SchemaId::PAAxiom => out.extend(pa_axioms().iter().cloned()),
            _ if id.is_binary() => {
                for phi in ops {
                    for psi in ops {
                        out.extend(instantiate_schema(id, &SchemaArgs::pair(phi.clone(), psi.clone())).ok());
                    }
                }
            }
            SchemaId::E1 => {
                for phi in ops.iter().filter(|p| certified(p)) {
                    out.extend(instantiate_schema(id, &SchemaArgs::phi(phi.clone())).ok());
                }
            }
            SchemaId::AssignedValidity => {
                for phi in ops.iter().filter(|p| certified(p)) {
                    let zeros = Assignment(free_vars(phi).into_iter().map(|v| (v, 0)).collect());
                    let args = SchemaArgs { assignment: Some(zeros), ..SchemaArgs::phi(phi.clone()) };
                    out.extend(instantiate_schema(id, &args).ok());
                }
            }
            SchemaId::EAInduction => {
                for phi in ops {
                    for x in free_vars_ordered(phi) {
                        let args = SchemaArgs { var: Some(x), ..SchemaArgs::phi(phi.clone()) };
                        out.extend(instantiate_schema(id, &args).ok());
                    }
                }
            }
            _ => {
                for phi in ops {
                    out.extend(instantiate_schema(id, &SchemaArgs::phi(phi.clone())).ok());
                }
            }
        }
        out
    }

    /// The finite theory with the origin of each member.
    pub fn expand_tagged(&self) -> Result<Vec<(Formula, Origin)>, TheoryError> {
        let mut members: Vec<(Formula, Origin)> = Vec::new();
        let mut seen = HashSet::new();
        let mut add = |f: Formula, o: Origin, members: &mut Vec<(Formula, Origin)>| {
            if seen.insert(f.clone()) {
                members.push((f, o));
            }
        };
        for b in &self.base_sentences {
            if !b.is_sentence() {
                return Err(TheoryError::NotSentence(b.clone()));
            }
            if !b.is_epistemic() {
                return Err(TheoryError::NotEpistemic(b.clone()));
            }
            add(b.clone(), Origin::Base, &mut members);
        }
        for (id, args) in &self.instances {
            add(instantiate_schema(*id, args)?, Origin::Instance(*id), &mut members);
        }
        for id in &self.schemas {
            for f in self.pooled_instances(*id) {
                add(f, Origin::Instance(*id), &mut members);
            }
        }
        let mut frontier: Vec<Formula> = members.iter().map(|(f, _)| f.clone()).collect();
        for _ in 0..self.k_closure_depth {
            let mut next = Vec::new();
            for f in frontier {
                let kf = Formula::k(f);
                let before = members.len();
                add(kf.clone(), Origin::KClosure, &mut members);
                if members.len() > before {
                    next.push(kf);
                }
            }
            frontier = next;
        }
        Ok(members)
    }

    pub fn expand(&self) -> Result<Vec<Formula>, TheoryError> {
        Ok(self.expand_tagged()?.into_iter().map(|(f, _)| f).collect())
    }
}

/// A finite set of `L_{ω·ω}` sentences in insertion order.
#[derive(Clone, Debug, Default)]
pub struct StratifiedFragment {
    members: Vec<Formula>,
    index: HashSet<Formula>,
    raw: bool,
}

impl PartialEq for StratifiedFragment {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}

impl Eq for StratifiedFragment {}

impl StratifiedFragment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every member must be a stratifier image of some `L_EA` sentence.
    pub fn from_stratified(members: impl IntoIterator<Item = Formula>) -> Result<Self, TheoryError> {
        let mut out = Self::new();
        for m in members {
            if !m.is_sentence() {
                return Err(TheoryError::NotSentence(m));
            }
            if recognize_stratified(&m).is_none() {
                return Err(TheoryError::NotStratified(m));
            }
            out.insert(m);
        }
        Ok(out)
    }

    /// Arbitrary `L_{ω·ω}` sentences, without the image check.
    pub fn raw(members: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Self { raw: true, ..Self::default() };
        for m in members {
            out.insert(m);
        }
        out
    }

    pub fn is_raw(&self) -> bool {
        self.raw
    }

    /// Add a member; `false` if it was already present.
    pub fn insert(&mut self, f: Formula) -> bool {
        if self.index.insert(f.clone()) {
            self.members.push(f);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains(f)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Formula> {
        self.members.iter()
    }

    pub fn members(&self) -> &[Formula] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_subset(&self, other: &StratifiedFragment) -> bool {
        self.members.iter().all(|m| other.contains(m))
    }
}

impl<'a> IntoIterator for &'a StratifiedFragment {
    type Item = &'a Formula;
    type IntoIter = std::slice::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

fn check_oplus_input(phi: &Formula) -> Result<(), TheoryError> {
    if !phi.is_sentence() {
        return Err(TheoryError::NotSentence(phi.clone()));
    }
    if !phi.is_epistemic() {
        return Err(TheoryError::NotEpistemic(phi.clone()));
    }
    Ok(())
}

/// `{φ⁺ : ⁺ given by some X in specs}`.
pub fn oplus_sample(phi: &Formula, specs: &[StratifierSpec]) -> Result<StratifiedFragment, TheoryError> {
    check_oplus_input(phi)?;
    let mut out = StratifiedFragment::new();
    for x in specs {
        out.insert(stratify(phi, x)?);
    }
    Ok(out)
}

/// A finite sample of `T⊕`: each member paired with the index of the first
/// theory member it stratifies.
pub fn oplus_theory(theory: &[Formula], specs: &[StratifierSpec]) -> Result<Vec<(Formula, usize)>, TheoryError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, phi) in theory.iter().enumerate() {
        check_oplus_input(phi)?;
        for x in specs {
            let s = stratify(phi, x)?;
            if seen.insert(s.clone()) {
                out.push((s, i));
            }
        }
    }
    Ok(out)
}

/// A stratifier family that exercises small finite levels and the first few
/// limits.
pub fn default_specs() -> Vec<StratifierSpec> {
    let w = Ordinal::OMEGA;
    vec![
        StratifierSpec::all_from(Ordinal::ZERO),
        StratifierSpec::all_from(Ordinal::finite(1)),
        StratifierSpec::all_from(Ordinal::finite(2)),
        StratifierSpec::all_from(w),
        StratifierSpec::all_from(Ordinal::new(1, 1)),
        StratifierSpec::all_from(Ordinal::new(2, 0)),
        StratifierSpec::veristratifier(),
    ]
}

/// `T ∩ α`: members whose superscripts are all below `alpha`.
pub fn restrict(fragment: &StratifiedFragment, alpha: Ordinal) -> StratifiedFragment {
    let mut out = StratifiedFragment { raw: fragment.raw, ..StratifiedFragment::default() };
    for m in fragment.iter() {
        if on_set(m).iter().all(|a| *a < alpha) {
            out.insert(m.clone());
        }
    }
    out
}

/// A member whose image under an order-preserving map is missing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformityViolation {
    pub member: Formula,
    pub map: OrdinalMap,
    pub missing: Formula,
}

/// Every strictly increasing map from `domain` into `pool`, identity included.
pub fn order_preserving_maps(domain: &BTreeSet<Ordinal>, pool: &BTreeSet<Ordinal>) -> Vec<OrdinalMap> {
    let dom: Vec<Ordinal> = domain.iter().copied().collect();
    let targets: Vec<Ordinal> = pool.iter().copied().collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(dom: &[Ordinal], targets: &[Ordinal], start: usize, cur: &mut Vec<Ordinal>, out: &mut Vec<OrdinalMap>) {
        if cur.len() == dom.len() {
            out.push(OrdinalMap::new(dom.iter().copied().zip(cur.iter().copied())));
            return;
        }
        let remaining = dom.len() - cur.len();
        for i in start..targets.len() {
            if targets.len() - i < remaining {
                break;
            }
            cur.push(targets[i]);
            go(dom, targets, i + 1, cur, out);
            cur.pop();
        }
    }
    go(&dom, &targets, 0, &mut cur, &mut out);
    out
}

/// Violations of closure under order-preserving maps with domain and range
/// inside `pool`. A map only matters through its restriction to `On(φ)`, so
/// maps are enumerated with exactly that domain.
pub fn check_uniform(fragment: &StratifiedFragment, pool: &BTreeSet<Ordinal>) -> Vec<UniformityViolation> {
    let mut out = Vec::new();
    for m in fragment.iter() {
        let on = on_set(m);
        if !on.is_subset(pool) {
            continue;
        }
        for h in order_preserving_maps(&on, pool) {
            if h.is_identity() {
                continue;
            }
            let image = apply_ordinal_map(m, &h);
            if !fragment.contains(&image) {
                out.push(UniformityViolation { member: m.clone(), map: h, missing: image });
            }
        }
    }
    out
}

/// The least superset of `fragment` with no violations over `pool`. One pass
/// suffices because maps into the pool compose.
pub fn uniform_closure(fragment: &StratifiedFragment, pool: &BTreeSet<Ordinal>) -> StratifiedFragment {
    let mut out = fragment.clone();
    for v in check_uniform(fragment, pool) {
        out.insert(v.missing);
    }
    out
}
