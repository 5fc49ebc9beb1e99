//! Bounded approximations of intended structures.
//!
//! In the intended structure of a stratified theory `T`, `K^α φ` holds at `s`
//! exactly when `T ∩ α ⊨ φ^s`; a plain `K` consults all of `T`. That relation
//! is undecidable, so [`BoundedIntendedStructure::knows`] answers with a
//! checked proof, a checked countermodel, or an explicit unknown.

mod e2;
mod walk;

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::ordinal::Ordinal;
use crate::prove::{entails, Budget, ProofStatus};
use crate::semantics::Countermodel;
use crate::syntax::{assign_substitute, free_vars, Assignment, Formula, OperatorTag, SyntaxError, Term};
use crate::theory::{restrict, StratifiedFragment};

pub use e2::{check_e2_counterexample, E2Report, E2Verdict, SubQuery};
pub use walk::{alpha_grid, truth_induction_walk, Case, LevelTally, WalkReport, WalkViolation};

/// A tri-state answer to a knowledge query.
#[derive(Clone, Debug)]
pub enum Knowledge {
    /// The pool proves the query; `witness` is the premise subset used.
    Holds { witness: Vec<Formula> },
    /// A countermodel of the entailment exists.
    Fails { countermodel: Box<Countermodel> },
    Unknown,
}

impl Knowledge {
    pub fn label(&self) -> &'static str {
        match self {
            Knowledge::Holds { .. } => "holds",
            Knowledge::Fails { .. } => "fails",
            Knowledge::Unknown => "unknown",
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Knowledge::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Knowledge::Fails { .. })
    }
}

/// Kleene truth values for evaluation in the intended structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn implies(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::True) => Truth::True,
            (Truth::True, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "TRUE",
            Truth::False => "FALSE",
            Truth::Unknown => "UNKNOWN",
        })
    }
}

/// How many values a quantifier is tried at before giving up. A false instance
/// refutes the quantifier; passing instances prove nothing.
pub const QUANTIFIER_SAMPLES: u64 = 4;

/// The intended structure of a finite pool, with a shared answer cache.
#[derive(Debug)]
pub struct BoundedIntendedStructure {
    pool: StratifiedFragment,
    budget: Budget,
    cache: RwLock<HashMap<(OperatorTag, Formula), Knowledge>>,
}

impl BoundedIntendedStructure {
    pub fn new(pool: StratifiedFragment, budget: Budget) -> Self {
        BoundedIntendedStructure { pool, budget, cache: RwLock::new(HashMap::new()) }
    }

    pub fn pool(&self) -> &StratifiedFragment {
        &self.pool
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// The premises a query under `tag` may use.
    pub fn premises_for(&self, tag: OperatorTag) -> StratifiedFragment {
        match tag {
            OperatorTag::Plain => self.pool.clone(),
            OperatorTag::Indexed(alpha) => restrict(&self.pool, alpha),
        }
    }

    /// Does the structure satisfy `tag φ` at `s`?
    pub fn knows(&self, tag: OperatorTag, phi: &Formula, s: &Assignment) -> Result<Knowledge, SyntaxError> {
        let instance = assign_substitute(phi, s)?;
        let key = (tag, instance);
        if let Some(k) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(k.clone());
        }
        let premises: Vec<Formula> = self.premises_for(tag).members().to_vec();
        let report = entails(&premises, &key.1, self.budget);
        let answer = match report.status {
            ProofStatus::Proved => Knowledge::Holds { witness: report.witness(&premises).into_iter().cloned().collect() },
            ProofStatus::Refuted => Knowledge::Fails {
                countermodel: Box::new(report.countermodel.expect("refuted reports carry a countermodel")),
            },
            ProofStatus::Unknown => Knowledge::Unknown,
        };
        // a concurrent writer may have won; its answer stands
        let mut cache = self.cache.write().expect("cache lock");
        Ok(cache.entry(key).or_insert(answer).clone())
    }

    /// Number of cached answers.
    pub fn cached(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    /// Three-valued truth of `φ` at `s` over the naturals.
    pub fn evaluate(&self, phi: &Formula, s: &Assignment) -> Result<Truth, SyntaxError> {
        if let Some(v) = free_vars(phi).into_iter().find(|v| s.get(v).is_none()) {
            return Err(SyntaxError::MissingAssignment(v));
        }
        Ok(self.eval(phi, s))
    }

    fn eval(&self, phi: &Formula, s: &Assignment) -> Truth {
        match phi {
            Formula::Eq(a, b) => match (nat(a, s), nat(b, s)) {
                (Some(x), Some(y)) => truth(x == y),
                _ => Truth::Unknown,
            },
            Formula::In(..) => Truth::Unknown,
            Formula::Not(a) => self.eval(a, s).not(),
            Formula::Implies(a, b) => {
                let l = self.eval(a, s);
                if l == Truth::False {
                    return Truth::True;
                }
                l.implies(self.eval(b, s))
            }
            Formula::Forall(x, a) => {
                if !free_vars(a).contains(x) {
                    return self.eval(a, s);
                }
                let refuted = (0..QUANTIFIER_SAMPLES).any(|n| self.eval(a, &s.updated(x, n)) == Truth::False);
                if refuted {
                    Truth::False
                } else {
                    Truth::Unknown
                }
            }
            Formula::Op(tag, body) => {
                let local = Assignment(
                    free_vars(body).into_iter().map(|v| (v.clone(), s.get(&v).expect("checked"))).collect(),
                );
                match self.knows(*tag, body, &local).expect("assignment covers the body") {
                    Knowledge::Holds { .. } => Truth::True,
                    Knowledge::Fails { .. } => Truth::False,
                    Knowledge::Unknown => Truth::Unknown,
                }
            }
        }
    }
}

fn truth(b: bool) -> Truth {
    if b {
        Truth::True
    } else {
        Truth::False
    }
}

/// Value of a term in the standard model; `None` on overflow.
fn nat(t: &Term, s: &Assignment) -> Option<u64> {
    match t {
        Term::Var(v) => s.get(v),
        Term::Zero => Some(0),
        Term::Succ(a) => nat(a, s)?.checked_add(1),
        Term::Plus(a, b) => nat(a, s)?.checked_add(nat(b, s)?),
        Term::Times(a, b) => nat(a, s)?.checked_mul(nat(b, s)?),
    }
}

/// The level at which a member first enters `T ∩ α`: one above its largest
/// superscript.
pub fn entry_level(phi: &Formula) -> Ordinal {
    crate::syntax::on_set(phi)
        .iter()
        .next_back()
        .map_or(Ordinal::ZERO, |a| a.successor())
}
