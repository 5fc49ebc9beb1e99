use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ea_strata::intended::{check_e2_counterexample, truth_induction_walk, E2Verdict, Knowledge};
use ea_strata::ordinal::{ord_parse, Ordinal};
use ea_strata::prove::{abstract_operators, entails, prove_formula, upward_check, Budget, ProofReport, ProofStatus};
use ea_strata::semantics::{countermodel_search, eval, parse_structure, render_structure, Countermodel, EvalAssignment};
use ea_strata::stratify::{
    apply_ordinal_map, collapse_map, destratify, destratify_lenient, recognize_stratified, stratify, OrdinalMap,
    StratifierSpec,
};
use ea_strata::syntax::{depth, free_vars_ordered, on_set, parse_formula, Assignment, Formula, Language};
use ea_strata::theory::{
    check_uniform, instantiate_schema, parse_theory, restrict, uniform_closure, SchemaArgs, SchemaId, StratifiedFragment,
    TheoryError, TheoryPresentation,
};
use serde_json::{json, Value};

use crate::output::{Code, Failure, Outcome};
use crate::{Command, FormulaInput, FormulaList, SchemaCmd};

type Result<T> = std::result::Result<T, Failure>;

pub fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Parse(input) => parse(input),
        Command::Depth(input) => {
            let phi = input.read()?;
            let d = depth(&phi);
            Ok(Outcome::new(Code::Ok).line(d.to_string()).record(json!({ "depth": d })))
        }
        Command::Onset(input) => {
            let on: Vec<String> = on_set(&input.read()?).iter().map(Ordinal::to_string).collect();
            Ok(Outcome::new(Code::Ok).line(format!("{{{}}}", on.join(", "))).record(json!({ "onset": on })))
        }
        Command::Stratify { x, input } => {
            let x = spec(x)?;
            let phi = input.read()?;
            let plus = stratify(&phi, &x).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(Outcome::new(Code::Ok)
                .line(plus.to_string())
                .record(json!({ "spec": x.to_string(), "formula": phi.to_string(), "stratified": plus.to_string() })))
        }
        Command::Destratify { lenient, input } => {
            let phi = input.read()?;
            let minus = if *lenient {
                destratify_lenient(&phi)
            } else {
                destratify(&phi).map_err(|e| Failure::usage(e.to_string()))?
            };
            Ok(Outcome::new(Code::Ok).line(minus.to_string()).record(json!({ "destratified": minus.to_string() })))
        }
        Command::Maph { h, input } => {
            let h: OrdinalMap = h.parse().map_err(|e: ea_strata::stratify::StratifyError| Failure::usage(e.to_string()))?;
            if !h.is_order_preserving() {
                return Err(Failure::violation(format!("map {h} is not order-preserving")));
            }
            let phi = input.read()?;
            let image = apply_ordinal_map(&phi, &h);
            let unmapped: Vec<String> =
                on_set(&phi).into_iter().filter(|a| h.get(*a).is_none()).map(|a| a.to_string()).collect();
            Ok(Outcome::new(Code::Ok)
                .line(image.to_string())
                .record(json!({ "map": h.to_string(), "image": image.to_string(), "unmapped": unmapped })))
        }
        Command::Collapse { n, supers } => {
            let set: BTreeSet<Ordinal> = ordinals(supers)?.into_iter().collect();
            let h = collapse_map(&set, *n).map_err(|e| Failure::usage(e.to_string()))?;
            let pairs: Vec<[String; 2]> = h.pairs().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
            Ok(Outcome::new(Code::Ok).line(h.to_string()).record(json!({ "n": n, "map": pairs })))
        }
        Command::Recognize(input) => {
            let sigma = input.read()?;
            Ok(match recognize_stratified(&sigma) {
                Some(x) => Outcome::new(Code::Ok)
                    .line(format!("image of {} along {x}", destratify_lenient(&sigma)))
                    .record(json!({ "image": true, "spec": x.to_string(), "source": destratify_lenient(&sigma).to_string() })),
                None => Outcome::new(Code::Violation)
                    .line("not the image of any stratifier")
                    .record(json!({ "image": false })),
            })
        }
        Command::Schema(args) => schema(args),
        Command::Restrict { alpha, members } => {
            let alpha = ordinal(alpha)?;
            let fragment = fragment(members)?;
            let kept: Vec<String> = restrict(&fragment, alpha).iter().map(Formula::to_string).collect();
            let mut out = Outcome::new(Code::Ok);
            for m in &kept {
                out = out.line(m.clone());
            }
            Ok(out.record(json!({ "alpha": alpha.to_string(), "members": kept })))
        }
        Command::Uniform { pool, close, members } => uniform(pool, *close, members),
        Command::Abstract(input) => {
            let a = abstract_operators(&input.read()?);
            let keys: Vec<Value> = a
                .key_table
                .iter()
                .enumerate()
                .map(|(i, k)| json!({ "predicate": format!("P{i}"), "key": k.to_string() }))
                .collect();
            Ok(Outcome::new(Code::Ok).text(&a.to_string()).record(json!({ "formula": a.formula.to_string(), "keys": keys })))
        }
        Command::Prove { budget, input } => {
            let phi = input.read()?;
            let r = prove_formula(&phi, Budget::new(budget.budget));
            Ok(proof_outcome(&r, &[]))
        }
        Command::Entails { theory, budget, input } => {
            let premises = load_theory(theory)?.expand().map_err(|e| Failure::usage(e.to_string()))?;
            let phi = input.read()?;
            let r = entails(&premises, &phi, Budget::new(budget.budget));
            Ok(proof_outcome(&r, &premises))
        }
        Command::Upward { x, theory, budget, input } => {
            let x = spec(x)?;
            let premises = match theory {
                Some(path) => load_theory(path)?.expand().map_err(|e| Failure::usage(e.to_string()))?,
                None => Vec::new(),
            };
            let phi = input.read()?;
            let r = upward_check(&premises, &phi, &x, Budget::new(budget.budget)).map_err(|e| Failure::usage(e.to_string()))?;
            let code = if r.disagrees() {
                Code::Violation
            } else if r.plain.status == ProofStatus::Unknown || r.stratified.status == ProofStatus::Unknown {
                Code::Unknown
            } else {
                Code::Ok
            };
            Ok(Outcome::new(code)
                .line(format!("plain: {}", r.plain.status))
                .line(format!("stratified goal: {}", r.stratified_goal))
                .line(format!("stratified: {}", r.stratified.status))
                .line(format!("witnesses correspond: {}", r.witnesses_correspond()))
                .record(json!({
                    "plain": r.plain.status.name(),
                    "stratified": r.stratified.status.name(),
                    "stratified_goal": r.stratified_goal.to_string(),
                    "stratified_premises": r.stratified_premises.iter().map(Formula::to_string).collect::<Vec<_>>(),
                    "plain_witness": r.plain.used_premises,
                    "stratified_witness": r.stratified.used_premises,
                })))
        }
        Command::Eval { model, assign, input } => {
            let text = read_file(model)?;
            let (m, _, _) = parse_structure(&text).map_err(|e| Failure::usage(format!("{}: {e}", model.display())))?;
            let mut s = EvalAssignment::new();
            for (var, value) in pairs(assign)? {
                let value = u32::try_from(value).map_err(|_| Failure::usage(format!("value {value} is too large")))?;
                s = s.with(&var, value);
            }
            let phi = input.read()?;
            let value = eval(&m, &phi, &s).map_err(|e| Failure::usage(e.to_string()))?;
            let code = if value { Code::Ok } else { Code::Violation };
            Ok(Outcome::new(code).line(value.to_string()).record(json!({ "value": value, "assignment": s.to_string() })))
        }
        Command::Countermodel { max_universe, oracle_budget, input } => {
            let phi = input.read()?;
            Ok(match countermodel_search(&phi, *max_universe, *oracle_budget) {
                Some(cm) => Outcome::new(Code::Violation).text(&countermodel_text(&cm)).record(countermodel_json(&cm)),
                None => Outcome::new(Code::Unknown)
                    .line(format!("no countermodel up to size {max_universe}"))
                    .record(json!({ "found": false, "max_universe": max_universe })),
            })
        }
        Command::E2Demo { budget } => e2_demo(budget.budget),
        Command::InductionWalk { alpha_max, theory, budget } => {
            let alpha = ordinal(alpha_max)?;
            let t0 = match theory {
                Some(path) => load_theory(path)?,
                None => TheoryPresentation::new(vec![formula("0=0")?]).with_schema(SchemaId::E3).with_k_closure(2),
            };
            let r = truth_induction_walk(&t0, alpha, Budget::new(budget.budget)).map_err(|e| Failure::usage(e.to_string()))?;
            let mut out = Outcome::new(if r.passed() { Code::Ok } else { Code::Violation }).text(&r.render());
            for t in &r.levels {
                out = out.record(json!({
                    "record": "level",
                    "level": t.level.to_string(),
                    "members": t.members,
                    "cases": t.by_case,
                    "holds": t.holds,
                    "by_induction": t.by_induction,
                    "unknown": t.unknown,
                    "violations": t.violations,
                }));
            }
            for v in &r.violations {
                out = out.record(json!({
                    "record": "violation",
                    "level": v.level.to_string(),
                    "case": v.case.number(),
                    "member": v.member.to_string(),
                    "reason": v.reason,
                }));
            }
            Ok(out.record(json!({
                "record": "summary",
                "sampled": r.sampled,
                "classified": r.classified,
                "beyond": r.beyond,
                "passed": r.passed(),
            })))
        }
    }
}

impl FormulaInput {
    fn read(&self) -> Result<Formula> {
        match (&self.formula, &self.file) {
            (Some(text), _) => formula(text),
            (None, Some(path)) => {
                let text = read_file(path)?;
                let body: Vec<&str> = text.lines().map(strip_comment).collect();
                formula(body.join(" ").trim())
            }
            (None, None) => Err(Failure::usage("no formula given")),
        }
    }
}

impl FormulaList {
    fn read(&self) -> Result<Vec<Formula>> {
        let mut out = self.formulas.iter().map(|f| formula(f)).collect::<Result<Vec<_>>>()?;
        if let Some(path) = &self.file {
            for line in read_file(path)?.lines().map(strip_comment).filter(|l| !l.is_empty()) {
                out.push(formula(line)?);
            }
        }
        Ok(out)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn formula(text: &str) -> Result<Formula> {
    parse_formula(text).map_err(|e| Failure::usage(format!("bad formula: {e}")))
}

fn ordinal(text: &str) -> Result<Ordinal> {
    ord_parse(text.trim()).map_err(|e| Failure::usage(format!("bad ordinal `{}`: {e}", text.trim())))
}

/// `0,w,w*2+1`, optionally inside braces or brackets.
fn ordinals(text: &str) -> Result<Vec<Ordinal>> {
    let inner = text.trim().trim_start_matches(['{', '[']).trim_end_matches(['}', ']']);
    inner.split(',').map(str::trim).filter(|t| !t.is_empty()).map(ordinal).collect()
}

fn spec(text: &str) -> Result<StratifierSpec> {
    text.parse().map_err(|e: ea_strata::stratify::StratifyError| Failure::usage(format!("bad stratifier: {e}")))
}

/// `x:1,y:0`.
fn pairs(text: &str) -> Result<Vec<(String, u64)>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|item| {
            let (v, n) = item.split_once(':').ok_or_else(|| Failure::usage(format!("`{item}` is not `var:value`")))?;
            let n = n.trim().parse().map_err(|_| Failure::usage(format!("bad value in `{item}`")))?;
            Ok((v.trim().to_string(), n))
        })
        .collect()
}

fn load_theory(path: &Path) -> Result<TheoryPresentation> {
    parse_theory(&read_file(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn fragment(list: &FormulaList) -> Result<StratifiedFragment> {
    StratifiedFragment::from_stratified(list.read()?).map_err(|e| Failure::usage(e.to_string()))
}

fn language(phi: &Formula) -> &'static str {
    match phi.language() {
        Language::Arithmetic => "arithmetic",
        Language::Epistemic => "epistemic",
        Language::Stratified => "stratified",
        Language::Mixed => "mixed",
    }
}

fn parse(input: &FormulaInput) -> Result<Outcome> {
    let phi = input.read()?;
    let free: Vec<String> = free_vars_ordered(&phi);
    Ok(Outcome::new(Code::Ok).line(phi.to_string()).record(json!({
        "formula": phi.to_string(),
        "language": language(&phi),
        "depth": depth(&phi),
        "nodes": phi.node_count(),
        "free": free,
        "sentence": phi.is_sentence(),
    })))
}

fn schema(args: &SchemaCmd) -> Result<Outcome> {
    let id: SchemaId = args.id.parse().map_err(|e: TheoryError| Failure::usage(e.to_string()))?;
    let opt = |t: &Option<String>| t.as_deref().map(formula).transpose();
    let assignment = match &args.assign {
        Some(text) => {
            let mut s = Assignment::new();
            for (v, n) in pairs(text)? {
                s = s.with(&v, n);
            }
            Some(s)
        }
        None => None,
    };
    let schema_args = SchemaArgs {
        phi: opt(&args.phi)?,
        psi: opt(&args.psi)?,
        assignment,
        closure_vars: args
            .closure
            .as_ref()
            .map(|c| c.split(',').map(str::trim).filter(|v| !v.is_empty()).map(str::to_string).collect()),
        var: args.var.clone(),
        witness: args.witness.clone(),
        index: args.index,
        validity_budget: args.check_validity.then(|| Budget::new(args.budget.budget)),
    };
    match instantiate_schema(id, &schema_args) {
        Ok(instance) => Ok(Outcome::new(Code::Ok)
            .line(instance.to_string())
            .record(json!({ "schema": id.name(), "instance": instance.to_string() }))),
        Err(e) => Err(match e {
            TheoryError::NotValid(ProofStatus::Unknown) => Failure::unknown(e.to_string()),
            TheoryError::DepthCondition { .. } | TheoryError::WitnessFree(_) | TheoryError::NotValid(_) => {
                Failure::violation(e.to_string())
            }
            _ => Failure::usage(e.to_string()),
        }),
    }
}

fn uniform(pool: &str, close: bool, members: &FormulaList) -> Result<Outcome> {
    let pool: BTreeSet<Ordinal> = ordinals(pool)?.into_iter().collect();
    let fragment = fragment(members)?;
    if close {
        let closed = uniform_closure(&fragment, &pool);
        let all: Vec<String> = closed.iter().map(Formula::to_string).collect();
        let mut out = Outcome::new(Code::Ok);
        for m in &all {
            out = out.line(m.clone());
        }
        return Ok(out.record(json!({ "closure": all })));
    }
    let violations = check_uniform(&fragment, &pool);
    if violations.is_empty() {
        return Ok(Outcome::new(Code::Ok).line("uniform").record(json!({ "uniform": true })));
    }
    let mut out = Outcome::new(Code::Violation);
    let mut missing = Vec::new();
    for v in &violations {
        out = out.line(format!("missing {} (image of {} under {})", v.missing, v.member, v.map));
        missing.push(json!({ "member": v.member.to_string(), "map": v.map.to_string(), "missing": v.missing.to_string() }));
    }
    Ok(out.record(json!({ "uniform": false, "violations": missing })))
}

fn status_code(status: ProofStatus) -> Code {
    match status {
        ProofStatus::Proved => Code::Ok,
        ProofStatus::Refuted => Code::Violation,
        ProofStatus::Unknown => Code::Unknown,
    }
}

fn proof_outcome(r: &ProofReport, premises: &[Formula]) -> Outcome {
    let witness: Vec<String> = r.witness(premises).iter().map(|f| f.to_string()).collect();
    let mut record = json!({
        "result": r.status.name(),
        "witness": witness,
        "steps": r.spent.tableau_steps,
        "candidates": r.spent.countermodel_candidates,
    });
    if let Some(cm) = &r.countermodel {
        record["countermodel"] = countermodel_json(cm);
    }
    Outcome::new(status_code(r.status)).text(&r.render(premises)).record(record)
}

fn countermodel_text(cm: &Countermodel) -> String {
    format!(
        "countermodel: variant {} assignment {}\n{}",
        cm.variant.name(),
        cm.assignment,
        render_structure(cm.structure.arithmetic(), &cm.oracle)
    )
}

fn countermodel_json(cm: &Countermodel) -> Value {
    json!({
        "found": true,
        "variant": cm.variant.name(),
        "assignment": cm.assignment.to_string(),
        "structure": render_structure(cm.structure.arithmetic(), &cm.oracle),
    })
}

fn e2_demo(budget: usize) -> Result<Outcome> {
    let r = check_e2_counterexample(Budget::new(budget));
    let code = match r.verdict {
        E2Verdict::ThetaFalse => Code::Ok,
        E2Verdict::NoCounterexample => Code::Violation,
        E2Verdict::Inconclusive => Code::Unknown,
    };
    let mut out = Outcome::new(code).text(&r.render());
    for q in &r.queries {
        let detail = match &q.answer {
            Knowledge::Holds { witness } => json!(witness.iter().map(Formula::to_string).collect::<Vec<_>>()),
            Knowledge::Fails { countermodel } => countermodel_json(countermodel),
            Knowledge::Unknown => Value::Null,
        };
        out = out.record(json!({
            "record": "query",
            "role": q.role,
            "query": q.query.to_string(),
            "answer": q.answer.label(),
            "detail": detail,
        }));
    }
    let verdict = match r.verdict {
        E2Verdict::ThetaFalse => "theta-false",
        E2Verdict::NoCounterexample => "no-counterexample",
        E2Verdict::Inconclusive => "inconclusive",
    };
    Ok(out.record(json!({
        "record": "summary",
        "theta": r.theta.to_string(),
        "theta_plus": r.theta_plus.to_string(),
        "level_one_pool": r.level_one_pool.iter().map(Formula::to_string).collect::<Vec<_>>(),
        "admissible_theta_plus": r.admissible_theta_plus.to_string(),
        "admissible_value": r.admissible_value.to_string(),
        "verdict": verdict,
    })))
}
