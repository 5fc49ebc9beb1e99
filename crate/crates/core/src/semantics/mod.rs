//! Finite base-logic structures with operator oracles.
//!
//! A structure is a finite first-order part (universe, arithmetic tables and
//! the `In` relation) plus an [`OperatorOracle`] that answers operator queries.
//! Queries are keyed by the slot-canonical form of the body (see
//! [`slot_canonical`]), so every oracle automatically satisfies assignment
//! locality, alphabetic invariance and weak substitution.
//!
//! The wrappers [`lift_plus`], [`lower_minus`] and [`map_structure`] build the
//! structures `M⁺`, `M⁻` and `h(M)` by rewriting queries before handing them to
//! the wrapped structure.

mod file;
mod search;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::stratify::{apply_ordinal_map, destratify_lenient, stratify_with_on, OrdinalMap, StratifierSpec};
use crate::syntax::{free_vars_ordered, slot_canonical, Formula, OperatorTag, Term, Var};

pub use file::{parse_structure, render_structure, StructureFileError};
pub use search::{countermodel_search, countermodel_search_counted, Countermodel};

pub type Element = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("assignment has no value for free variable `{0}`")]
    MissingAssignment(Var),
    #[error("element {element} is outside a universe of size {size}")]
    OutOfUniverse { element: Element, size: u32 },
    #[error("invalid structure: {0}")]
    Invalid(String),
}

/// The fixed family of arithmetic tables used by the countermodel search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableVariant {
    /// Arithmetic modulo the universe size.
    Cyclic,
    /// Standard arithmetic truncated at the largest element.
    Saturating,
    /// `S(x) = x`, `x + y = max(x, y)`, `x · y = min(x, y)`.
    Stuck,
}

impl TableVariant {
    pub const ALL: [TableVariant; 3] = [TableVariant::Cyclic, TableVariant::Saturating, TableVariant::Stuck];

    pub fn name(self) -> &'static str {
        match self {
            TableVariant::Cyclic => "cyclic",
            TableVariant::Saturating => "saturating",
            TableVariant::Stuck => "stuck",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        TableVariant::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// The first-order part of a finite structure. Tables are row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arithmetic {
    size: u32,
    zero: Element,
    succ: Vec<Element>,
    plus: Vec<Element>,
    times: Vec<Element>,
    in_rel: Vec<bool>,
}

impl Arithmetic {
    pub fn new(
        size: u32,
        zero: Element,
        succ: Vec<Element>,
        plus: Vec<Element>,
        times: Vec<Element>,
        in_rel: Vec<bool>,
    ) -> Result<Self, SemanticsError> {
        if size == 0 {
            return Err(SemanticsError::Invalid("universe must be non-empty".into()));
        }
        let n = size as usize;
        let check_len = |name: &str, len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(SemanticsError::Invalid(format!("{name} table has {len} entries, expected {want}")))
            }
        };
        check_len("succ", succ.len(), n)?;
        check_len("plus", plus.len(), n * n)?;
        check_len("times", times.len(), n * n)?;
        check_len("in", in_rel.len(), n * n)?;
        for &e in std::iter::once(&zero).chain(&succ).chain(&plus).chain(&times) {
            if e >= size {
                return Err(SemanticsError::OutOfUniverse { element: e, size });
            }
        }
        Ok(Arithmetic { size, zero, succ, plus, times, in_rel })
    }

    /// Tables from the fixed family; `In` is empty.
    pub fn from_variant(size: u32, variant: TableVariant) -> Self {
        assert!(size >= 1, "universe must be non-empty");
        let top = size - 1;
        let elems: Vec<Element> = (0..size).collect();
        let table = |f: &dyn Fn(u64, u64) -> Element| -> Vec<Element> {
            elems
                .iter()
                .flat_map(|&a| elems.iter().map(move |&b| (a, b)))
                .map(|(a, b)| f(a as u64, b as u64))
                .collect()
        };
        let n = size as u64;
        let (succ, plus, times) = match variant {
            TableVariant::Cyclic => (
                elems.iter().map(|&a| (a + 1) % size).collect(),
                table(&|a, b| ((a + b) % n) as Element),
                table(&|a, b| ((a * b) % n) as Element),
            ),
            TableVariant::Saturating => (
                elems.iter().map(|&a| (a + 1).min(top)).collect(),
                table(&|a, b| (a + b).min(top as u64) as Element),
                table(&|a, b| (a * b).min(top as u64) as Element),
            ),
            TableVariant::Stuck => (
                elems.clone(),
                table(&|a, b| a.max(b) as Element),
                table(&|a, b| a.min(b) as Element),
            ),
        };
        Arithmetic {
            size,
            zero: 0,
            succ,
            plus,
            times,
            in_rel: vec![false; (size * size) as usize],
        }
    }

    pub fn with_in_relation(mut self, in_rel: Vec<bool>) -> Result<Self, SemanticsError> {
        if in_rel.len() != (self.size * self.size) as usize {
            return Err(SemanticsError::Invalid("in table has the wrong size".into()));
        }
        self.in_rel = in_rel;
        Ok(self)
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn zero(&self) -> Element {
        self.zero
    }

    pub fn succ(&self, a: Element) -> Element {
        self.succ[a as usize]
    }

    pub fn plus(&self, a: Element, b: Element) -> Element {
        self.plus[(a * self.size + b) as usize]
    }

    pub fn times(&self, a: Element, b: Element) -> Element {
        self.times[(a * self.size + b) as usize]
    }

    pub fn in_rel(&self, a: Element, b: Element) -> bool {
        self.in_rel[(a * self.size + b) as usize]
    }
}

/// Answers `M ⊨ K φ[s]` given the operator tag, the slot-canonical body and
/// the values of its slots.
pub trait OperatorOracle: fmt::Debug + Send + Sync {
    fn answer(&self, tag: OperatorTag, key: &Formula, args: &[Element]) -> bool;
}

/// A finite table of oracle answers with a default for unlisted queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableOracle {
    entries: HashMap<Formula, HashMap<(OperatorTag, Vec<Element>), bool>>,
    default: bool,
}

impl TableOracle {
    pub fn new(default: bool) -> Self {
        TableOracle { entries: HashMap::new(), default }
    }

    /// Record the answer for `tag body` at the given values of the body's free
    /// variable occurrences (in left-to-right order).
    pub fn set(&mut self, tag: OperatorTag, body: &Formula, args: Vec<Element>, value: bool) {
        let key = slot_canonical(body).key;
        self.entries.entry(key).or_default().insert((tag, args), value);
    }

    pub fn default_answer(&self) -> bool {
        self.default
    }

    /// Entries sorted for stable output.
    pub fn entries(&self) -> Vec<(OperatorTag, &Formula, &[Element], bool)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .flat_map(|(k, m)| m.iter().map(move |((t, a), b)| (*t, k, a.as_slice(), *b)))
            .collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl OperatorOracle for TableOracle {
    fn answer(&self, tag: OperatorTag, key: &Formula, args: &[Element]) -> bool {
        self.entries
            .get(key)
            .and_then(|m| m.get(&(tag, args.to_vec())))
            .copied()
            .unwrap_or(self.default)
    }
}

/// A total pseudo-random oracle: the answer is a hash of the query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashOracle {
    pub seed: u64,
}

impl OperatorOracle for HashOracle {
    fn answer(&self, tag: OperatorTag, key: &Formula, args: &[Element]) -> bool {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.seed.hash(&mut h);
        tag.hash(&mut h);
        key.hash(&mut h);
        args.hash(&mut h);
        h.finish() & 1 == 1
    }
}

/// A finite structure for the base logic.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    arith: Arc<Arithmetic>,
    oracle: Arc<dyn OperatorOracle>,
}

impl FiniteStructure {
    pub fn new(arith: Arithmetic, oracle: impl OperatorOracle + 'static) -> Self {
        FiniteStructure { arith: Arc::new(arith), oracle: Arc::new(oracle) }
    }

    pub fn with_shared(arith: Arc<Arithmetic>, oracle: Arc<dyn OperatorOracle>) -> Self {
        FiniteStructure { arith, oracle }
    }

    pub fn arithmetic(&self) -> &Arithmetic {
        &self.arith
    }

    pub fn oracle(&self) -> &dyn OperatorOracle {
        self.oracle.as_ref()
    }

    pub fn universe_size(&self) -> u32 {
        self.arith.size
    }
}

/// An assignment into the universe of a finite structure.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvalAssignment(pub BTreeMap<Var, Element>);

impl EvalAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, value: Element) -> Self {
        self.0.insert(var.to_string(), value);
        self
    }

    pub fn get(&self, var: &str) -> Option<Element> {
        self.0.get(var).copied()
    }

    /// Every assignment of `vars` into a universe of the given size, in
    /// lexicographic order.
    pub fn enumerate(vars: &[Var], size: u32) -> impl Iterator<Item = EvalAssignment> + '_ {
        let total = (size as u64).checked_pow(vars.len() as u32).unwrap_or(u64::MAX);
        (0..total).map(move |mut code| {
            let mut s = EvalAssignment::new();
            for v in vars.iter().rev() {
                s.0.insert(v.clone(), (code % size as u64) as Element);
                code /= size as u64;
            }
            s
        })
    }
}

impl fmt::Display for EvalAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// A formula with its operator keys computed once.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Eq(Term, Term),
    In(Term, Term),
    Not(Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Forall(Var, Box<Compiled>),
    Op { tag: OperatorTag, key: Arc<Formula>, args: Vec<Var> },
}

impl Compiled {
    pub(crate) fn new(phi: &Formula) -> Compiled {
        match phi {
            Formula::Eq(a, b) => Compiled::Eq(a.clone(), b.clone()),
            Formula::In(a, b) => Compiled::In(a.clone(), b.clone()),
            Formula::Not(a) => Compiled::Not(Box::new(Compiled::new(a))),
            Formula::Implies(a, b) => Compiled::Implies(Box::new(Compiled::new(a)), Box::new(Compiled::new(b))),
            Formula::Forall(v, a) => Compiled::Forall(v.clone(), Box::new(Compiled::new(a))),
            Formula::Op(tag, body) => {
                let c = slot_canonical(body);
                Compiled::Op { tag: *tag, key: Arc::new(c.key), args: c.args }
            }
        }
    }
}

/// A query the evaluator could not answer from a partial interpretation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Query {
    Op(OperatorTag, Arc<Formula>, Vec<Element>),
    In(Element, Element),
}

/// Three-valued result of evaluation under a partial interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Val {
    True,
    False,
    Open(Query),
}

pub(crate) trait Interp {
    fn arith(&self) -> &Arithmetic;
    fn op(&self, tag: OperatorTag, key: &Arc<Formula>, args: &[Element]) -> Option<bool>;
    fn in_rel(&self, a: Element, b: Element) -> Option<bool>;
}

struct Total<'a>(&'a FiniteStructure);

impl Interp for Total<'_> {
    fn arith(&self) -> &Arithmetic {
        &self.0.arith
    }

    fn op(&self, tag: OperatorTag, key: &Arc<Formula>, args: &[Element]) -> Option<bool> {
        Some(self.0.oracle.answer(tag, key, args))
    }

    fn in_rel(&self, a: Element, b: Element) -> Option<bool> {
        Some(self.0.arith.in_rel(a, b))
    }
}

fn lookup(env: &[(Var, Element)], v: &str) -> Element {
    env.iter()
        .rev()
        .find(|(name, _)| name == v)
        .map(|(_, e)| *e)
        .expect("free variables are checked before evaluation")
}

fn eval_term(ar: &Arithmetic, t: &Term, env: &[(Var, Element)]) -> Element {
    match t {
        Term::Var(v) => lookup(env, v),
        Term::Zero => ar.zero,
        Term::Succ(a) => ar.succ(eval_term(ar, a, env)),
        Term::Plus(a, b) => ar.plus(eval_term(ar, a, env), eval_term(ar, b, env)),
        Term::Times(a, b) => ar.times(eval_term(ar, a, env), eval_term(ar, b, env)),
    }
}

/// Kleene evaluation: a query is reported only when the result depends on it.
pub(crate) fn eval_partial<I: Interp>(interp: &I, c: &Compiled, env: &mut Vec<(Var, Element)>) -> Val {
    let ar = interp.arith();
    match c {
        Compiled::Eq(a, b) => bool_val(eval_term(ar, a, env) == eval_term(ar, b, env)),
        Compiled::In(a, b) => {
            let (x, y) = (eval_term(ar, a, env), eval_term(ar, b, env));
            match interp.in_rel(x, y) {
                Some(v) => bool_val(v),
                None => Val::Open(Query::In(x, y)),
            }
        }
        Compiled::Not(a) => match eval_partial(interp, a, env) {
            Val::True => Val::False,
            Val::False => Val::True,
            open => open,
        },
        Compiled::Implies(a, b) => match eval_partial(interp, a, env) {
            Val::False => Val::True,
            Val::True => eval_partial(interp, b, env),
            open => match eval_partial(interp, b, env) {
                Val::True => Val::True,
                _ => open,
            },
        },
        Compiled::Forall(v, a) => {
            let mut pending = None;
            for e in 0..ar.size {
                env.push((v.clone(), e));
                let r = eval_partial(interp, a, env);
                env.pop();
                match r {
                    Val::False => return Val::False,
                    Val::True => {}
                    open => {
                        if pending.is_none() {
                            pending = Some(open);
                        }
                    }
                }
            }
            pending.unwrap_or(Val::True)
        }
        Compiled::Op { tag, key, args } => {
            let values: Vec<Element> = args.iter().map(|v| lookup(env, v)).collect();
            match interp.op(*tag, key, &values) {
                Some(v) => bool_val(v),
                None => Val::Open(Query::Op(*tag, key.clone(), values)),
            }
        }
    }
}

fn bool_val(b: bool) -> Val {
    if b {
        Val::True
    } else {
        Val::False
    }
}

/// `M ⊨ φ[s]`.
pub fn eval(m: &FiniteStructure, phi: &Formula, s: &EvalAssignment) -> Result<bool, SemanticsError> {
    let mut env = Vec::with_capacity(s.0.len());
    for v in free_vars_ordered(phi) {
        let e = s.get(&v).ok_or_else(|| SemanticsError::MissingAssignment(v.clone()))?;
        if e >= m.universe_size() {
            return Err(SemanticsError::OutOfUniverse { element: e, size: m.universe_size() });
        }
        env.push((v, e));
    }
    match eval_partial(&Total(m), &Compiled::new(phi), &mut env) {
        Val::True => Ok(true),
        Val::False => Ok(false),
        Val::Open(_) => unreachable!("total interpretations answer every query"),
    }
}

#[derive(Debug)]
struct LiftOracle {
    inner: FiniteStructure,
    spec: StratifierSpec,
}

impl OperatorOracle for LiftOracle {
    fn answer(&self, tag: OperatorTag, key: &Formula, args: &[Element]) -> bool {
        match (tag, stratify_with_on(key, &self.spec)) {
            (OperatorTag::Plain, Ok((plus, on))) => {
                let alpha = self.spec.least_excluding(&on);
                self.inner.oracle.answer(OperatorTag::Indexed(alpha), &plus, args)
            }
            // outside the epistemic language: pass through untouched
            _ => self.inner.oracle.answer(tag, key, args),
        }
    }
}

#[derive(Debug)]
struct LowerOracle {
    inner: FiniteStructure,
}

impl OperatorOracle for LowerOracle {
    fn answer(&self, _tag: OperatorTag, key: &Formula, args: &[Element]) -> bool {
        self.inner.oracle.answer(OperatorTag::Plain, &destratify_lenient(key), args)
    }
}

#[derive(Debug)]
struct MappedOracle {
    inner: FiniteStructure,
    h: OrdinalMap,
}

impl OperatorOracle for MappedOracle {
    fn answer(&self, tag: OperatorTag, key: &Formula, args: &[Element]) -> bool {
        let tag = match tag {
            OperatorTag::Indexed(a) => OperatorTag::Indexed(self.h.get(a).unwrap_or(a)),
            OperatorTag::Plain => OperatorTag::Plain,
        };
        self.inner.oracle.answer(tag, &apply_ordinal_map(key, &self.h), args)
    }
}

/// `M⁺`: answers `K φ` as `M` answers `(K φ)⁺`.
pub fn lift_plus(m: &FiniteStructure, spec: &StratifierSpec) -> FiniteStructure {
    FiniteStructure {
        arith: m.arith.clone(),
        oracle: Arc::new(LiftOracle { inner: m.clone(), spec: spec.clone() }),
    }
}

/// `M⁻`: answers every `K^α φ` as `M` answers `K φ⁻`.
pub fn lower_minus(m: &FiniteStructure) -> FiniteStructure {
    FiniteStructure {
        arith: m.arith.clone(),
        oracle: Arc::new(LowerOracle { inner: m.clone() }),
    }
}

/// `h(M)`: answers `K^α φ` as `M` answers `h(K^α φ)`.
pub fn map_structure(m: &FiniteStructure, h: &OrdinalMap) -> FiniteStructure {
    FiniteStructure {
        arith: m.arith.clone(),
        oracle: Arc::new(MappedOracle { inner: m.clone(), h: h.clone() }),
    }
}
