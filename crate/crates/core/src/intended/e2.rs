//! Desk check that closure under modus ponens inside `K` does not survive
//! stratification.
//!
//! `T` is the `K`-closure of the `E2` instances over `{1=0, K(1=0)}` together
//! with `K(1=0)` and `K(1=0) → (1=0)`. Under the stratifier given by
//! `X = {0, 1, 2, …}` the `E2` instance
//! `K(K(1=0) → (1=0)) → KK(1=0) → K(1=0)` becomes
//! `K^1(K^0(1=0) → (1=0)) → K^1 K^0(1=0) → K^0(1=0)`, whose antecedents hold in
//! the intended structure of `T⊕` while the conclusion fails.

use std::fmt::Write as _;

use super::{BoundedIntendedStructure, Knowledge, Truth};
use crate::ordinal::Ordinal;
use crate::prove::Budget;
use crate::stratify::{stratify, StratifierSpec};
use crate::syntax::{parse_formula, Assignment, Formula, OperatorTag};
use crate::theory::{
    default_specs, instantiate_schema, oplus_theory, restrict, SchemaArgs, SchemaId, StratifiedFragment,
    TheoryPresentation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum E2Verdict {
    /// Both antecedents hold and the conclusion fails.
    ThetaFalse,
    /// Every sub-query resolved but `θ⁺` is not refuted.
    NoCounterexample,
    /// Some sub-query is unknown at this budget.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SubQuery {
    pub role: &'static str,
    pub query: Formula,
    pub answer: Knowledge,
}

#[derive(Clone, Debug)]
pub struct E2Report {
    pub theory: Vec<Formula>,
    pub sample_size: usize,
    /// `T⊕ ∩ 1`, the pool the antecedent queries consult.
    pub level_one_pool: Vec<Formula>,
    pub theta: Formula,
    pub theta_plus: Formula,
    pub queries: Vec<SubQuery>,
    pub verdict: E2Verdict,
    /// Why E2prime refuses the operands of `θ`.
    pub e2prime_rejection: Option<String>,
    /// The E2prime-admissible variant and its value.
    pub admissible_theta_plus: Formula,
    pub admissible_value: Truth,
}

fn p(s: &str) -> Formula {
    parse_formula(s).expect("fixed formula")
}

/// The theory used by the demonstration.
pub fn e2_theory() -> TheoryPresentation {
    TheoryPresentation {
        base_sentences: vec![p("K(1=0)"), p("K(1=0) -> (1=0)")],
        schemas: [SchemaId::E2].into_iter().collect(),
        instances: Vec::new(),
        pool: vec![p("1=0"), p("K(1=0)")],
        k_closure_depth: 2,
    }
}

fn describe(k: &Knowledge) -> String {
    match k {
        Knowledge::Holds { witness } => {
            let w: Vec<String> = witness.iter().map(Formula::to_string).collect();
            format!("holds, witness [{}]", w.join("; "))
        }
        Knowledge::Fails { countermodel } => format!(
            "fails, countermodel with {} elements ({} tables) at {}",
            countermodel.structure.universe_size(),
            countermodel.variant.name(),
            countermodel.assignment
        ),
        Knowledge::Unknown => "unknown at this budget".into(),
    }
}

/// Build the theory, stratify `θ`, and resolve its three sub-queries.
pub fn check_e2_counterexample(budget: Budget) -> E2Report {
    let theory = e2_theory().expand().expect("fixed theory expands");
    let sample = oplus_theory(&theory, &default_specs()).expect("fixed theory is stratifiable");
    let pool = StratifiedFragment::from_stratified(sample.into_iter().map(|(f, _)| f)).expect("stratifier images");
    let sample_size = pool.len();
    let level_one_pool = restrict(&pool, Ordinal::finite(1)).members().to_vec();
    let structure = BoundedIntendedStructure::new(pool, budget);

    let theta = instantiate_schema(SchemaId::E2, &SchemaArgs::pair(p("K(1=0)"), p("1=0"))).expect("E2 instance");
    let x = StratifierSpec::all_from(Ordinal::ZERO);
    let theta_plus = stratify(&theta, &x).expect("theta is in L_EA");

    let mut queries = Vec::new();
    let Formula::Implies(a, rest) = &theta_plus else { unreachable!("E2 instances are implications") };
    let Formula::Implies(b, c) = rest.as_ref() else { unreachable!("E2 instances are implications") };
    for (role, q) in [("antecedent", a), ("antecedent", b), ("conclusion", c)] {
        let Formula::Op(tag, body) = q.as_ref() else { unreachable!("operator formulas") };
        let answer = structure.knows(*tag, body, &Assignment::new()).expect("sentences need no assignment");
        queries.push(SubQuery { role, query: q.as_ref().clone(), answer });
    }
    let verdict = if queries.iter().any(|q| matches!(q.answer, Knowledge::Unknown)) {
        E2Verdict::Inconclusive
    } else if queries[0].answer.holds() && queries[1].answer.holds() && queries[2].answer.fails() {
        E2Verdict::ThetaFalse
    } else {
        E2Verdict::NoCounterexample
    };

    let e2prime_rejection = instantiate_schema(SchemaId::E2prime, &SchemaArgs::pair(p("K(1=0)"), p("1=0")))
        .err()
        .map(|e| e.to_string());
    let admissible = instantiate_schema(SchemaId::E2prime, &SchemaArgs::pair(p("1=0"), p("K(1=0)")))
        .expect("depth 0 <= depth 1");
    let admissible_theta_plus = stratify(&admissible, &x).expect("L_EA");
    let admissible_value = structure
        .evaluate(&admissible_theta_plus, &Assignment::new())
        .expect("sentence");

    E2Report {
        theory,
        sample_size,
        level_one_pool,
        theta,
        theta_plus,
        queries,
        verdict,
        e2prime_rejection,
        admissible_theta_plus,
        admissible_value,
    }
}

impl E2Report {
    /// Line-oriented trace ending in the verdict.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theory: {} members after K-closure", self.theory.len());
        let _ = writeln!(out, "T+ sample: {} members", self.sample_size);
        for m in &self.level_one_pool {
            let _ = writeln!(out, "level-1 pool member: {m}");
        }
        let _ = writeln!(out, "theta = {}", self.theta);
        let _ = writeln!(out, "theta+ = {}", self.theta_plus);
        for q in &self.queries {
            let _ = writeln!(out, "{} {}: {}", q.role, q.query, describe(&q.answer));
        }
        if let Some(r) = &self.e2prime_rejection {
            let _ = writeln!(out, "E2prime rejects (K(1=0), 1=0): {r}");
        }
        let _ = writeln!(out, "E2prime-admissible theta+ = {} evaluates {}", self.admissible_theta_plus, self.admissible_value);
        let _ = match self.verdict {
            E2Verdict::ThetaFalse => writeln!(out, "theta+ evaluates FALSE"),
            E2Verdict::NoCounterexample => writeln!(out, "theta+ is not refuted"),
            E2Verdict::Inconclusive => writeln!(out, "inconclusive: some sub-query is unknown at this budget"),
        };
        out
    }

    /// The tags of the three sub-queries, outermost first.
    pub fn levels(&self) -> Vec<OperatorTag> {
        self.queries
            .iter()
            .filter_map(|q| match &q.query {
                Formula::Op(t, _) => Some(*t),
                _ => None,
            })
            .collect()
    }
}
