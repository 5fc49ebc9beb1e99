//! Level-by-level truth check of a sampled `T⊕` in its own intended structure.
//!
//! Members are classified by how their unstratified source entered `T`:
//! base sentences and ordinary schema instances (case 1), `K`-closure members
//! `K^α φ⁺` (case 2) and truthfulness instances `K^α φ⁺ → φ⁺` (case 3). Each
//! level is checked after every lower one, so a truthfulness instance whose
//! antecedent holds may lean on the lower level already checked.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use super::{entry_level, BoundedIntendedStructure, Knowledge, Truth};
use crate::ordinal::{omega_times, Ordinal};
use crate::prove::Budget;
use crate::syntax::{on_set, Assignment, Formula, OperatorTag};
use crate::theory::{default_specs, oplus_theory, Origin, SchemaId, StratifiedFragment, TheoryError, TheoryPresentation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    Base,
    KClosure,
    Truthfulness,
}

impl Case {
    pub fn number(self) -> usize {
        match self {
            Case::Base => 1,
            Case::KClosure => 2,
            Case::Truthfulness => 3,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelTally {
    pub level: Ordinal,
    pub members: usize,
    /// Indexed by case number minus one.
    pub by_case: [usize; 3],
    pub holds: usize,
    /// Truthfulness instances settled by the lower levels.
    pub by_induction: usize,
    pub unknown: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkViolation {
    pub level: Ordinal,
    pub member: Formula,
    pub case: Case,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct WalkReport {
    pub levels: Vec<LevelTally>,
    pub violations: Vec<WalkViolation>,
    /// Sampled members below the top level; each is classified exactly once.
    pub sampled: usize,
    pub classified: usize,
    /// Sampled members with a superscript at or above the top level.
    pub beyond: usize,
}

impl WalkReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.levels {
            let _ = writeln!(
                out,
                "level {}: members={} case1={} case2={} case3={} holds={} by-induction={} unknown={} violations={}",
                t.level, t.members, t.by_case[0], t.by_case[1], t.by_case[2], t.holds, t.by_induction, t.unknown, t.violations
            );
        }
        for v in &self.violations {
            let _ = writeln!(out, "violation at level {} ({}): {} : {}", v.level, v.case, v.member, v.reason);
        }
        let _ = writeln!(
            out,
            "sampled={} classified={} beyond={} verdict={}",
            self.sampled,
            self.classified,
            self.beyond,
            if self.passed() { "pass" } else { "violation" }
        );
        out
    }
}

/// `ω·k + j` for `j ≤ 3`, every `k` up to the limit part of `alpha_max`, cut at
/// `alpha_max`, which is always the last level.
pub fn alpha_grid(alpha_max: Ordinal) -> Vec<Ordinal> {
    let mut out: Vec<Ordinal> = (0..=alpha_max.limit)
        .flat_map(|k| (0..=3).map(move |j| Ordinal::new(k, j)))
        .filter(|a| *a < alpha_max)
        .collect();
    out.push(alpha_max);
    out
}

enum Check {
    Holds,
    ByInduction,
    Unknown,
    Violation(String),
}

fn truth_check(t: Truth, what: &str) -> Check {
    match t {
        Truth::True => Check::Holds,
        Truth::False => Check::Violation(format!("{what} evaluates false")),
        Truth::Unknown => Check::Unknown,
    }
}

fn strip_closure(phi: &Formula) -> &Formula {
    match phi {
        Formula::Forall(_, a) => strip_closure(a),
        other => other,
    }
}

/// Walk the levels of [`alpha_grid`] checking every sampled member of
/// `T0⊕` below `alpha_max` in the bounded intended structure.
pub fn truth_induction_walk(t0: &TheoryPresentation, alpha_max: Ordinal, budget: Budget) -> Result<WalkReport, TheoryError> {
    let members = t0.expand_tagged()?;
    let formulas: Vec<Formula> = members.iter().map(|(f, _)| f.clone()).collect();
    let sample = oplus_theory(&formulas, &default_specs())?;
    let mut report = WalkReport::default();
    let mut kept = Vec::new();
    for (sigma, src) in sample {
        if on_set(&sigma).iter().all(|a| *a < alpha_max) {
            kept.push((sigma, members[src].1));
        } else {
            report.beyond += 1;
        }
    }
    report.sampled = kept.len();
    let pool = StratifiedFragment::from_stratified(kept.iter().map(|(f, _)| f.clone()))?;
    let structure = BoundedIntendedStructure::new(pool.clone(), budget);

    let mut done: HashSet<usize> = HashSet::new();
    for level in alpha_grid(alpha_max) {
        let mut tally = LevelTally { level, ..LevelTally::default() };
        for (i, (sigma, origin)) in kept.iter().enumerate() {
            if done.contains(&i) || entry_level(sigma) > level {
                continue;
            }
            done.insert(i);
            let case = match origin {
                Origin::KClosure => Case::KClosure,
                Origin::Instance(SchemaId::E3) => Case::Truthfulness,
                _ => Case::Base,
            };
            tally.members += 1;
            tally.by_case[case.number() - 1] += 1;
            let check = match case {
                Case::Base => truth_check(structure.evaluate(sigma, &Assignment::new())?, "member"),
                Case::KClosure => check_k_member(&structure, &pool, sigma)?,
                Case::Truthfulness => check_truthfulness(&structure, sigma)?,
            };
            match check {
                Check::Holds => tally.holds += 1,
                Check::ByInduction => tally.by_induction += 1,
                Check::Unknown => tally.unknown += 1,
                Check::Violation(reason) => {
                    tally.violations += 1;
                    report.violations.push(WalkViolation { level, member: sigma.clone(), case, reason });
                }
            }
        }
        report.classified += tally.members;
        report.levels.push(tally);
    }
    Ok(report)
}

/// `K^α φ⁺`: the body must already sit in the level-α pool, and then the
/// query holds with the body itself as witness.
fn check_k_member(
    structure: &BoundedIntendedStructure,
    pool: &StratifiedFragment,
    sigma: &Formula,
) -> Result<Check, TheoryError> {
    let Formula::Op(OperatorTag::Indexed(alpha), body) = sigma else {
        return Ok(Check::Violation("K-closure member without a top superscript".into()));
    };
    let in_pool = pool.contains(body) && on_set(body).iter().all(|a| a < alpha);
    if !in_pool {
        return Ok(Check::Violation(format!("body {body} is missing from the level-{alpha} pool")));
    }
    Ok(match structure.knows(OperatorTag::Indexed(*alpha), body, &Assignment::new())? {
        Knowledge::Holds { .. } => Check::Holds,
        Knowledge::Fails { .. } => Check::Violation("pool member not entailed by its own pool".into()),
        Knowledge::Unknown => Check::Unknown,
    })
}

/// `∀(K^α φ⁺ → φ⁺)`: evaluated directly when possible; otherwise a holding
/// antecedent puts `φ⁺` among the consequences of a lower level, which the
/// walk has already found true.
fn check_truthfulness(structure: &BoundedIntendedStructure, sigma: &Formula) -> Result<Check, TheoryError> {
    match structure.evaluate(sigma, &Assignment::new())? {
        Truth::True => return Ok(Check::Holds),
        Truth::False => return Ok(Check::Violation("truthfulness instance evaluates false".into())),
        Truth::Unknown => {}
    }
    if sigma.is_sentence() {
        if let Formula::Implies(ante, _) = strip_closure(sigma) {
            if let Formula::Op(tag @ OperatorTag::Indexed(alpha), body) = ante.as_ref() {
                if body.is_sentence() && *alpha < omega_times(u64::MAX) {
                    return Ok(match structure.knows(*tag, body, &Assignment::new())? {
                        Knowledge::Holds { .. } => Check::ByInduction,
                        Knowledge::Fails { .. } => Check::Holds,
                        Knowledge::Unknown => Check::Unknown,
                    });
                }
            }
        }
    }
    Ok(Check::Unknown)
}
