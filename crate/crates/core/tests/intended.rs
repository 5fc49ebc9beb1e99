mod common;

use std::sync::Arc;
use std::thread;

use common::{o, p, ref_eval, Env};
use ea_strata::intended::{
    check_e2_counterexample, truth_induction_walk, BoundedIntendedStructure, Case, Knowledge, Truth,
};
use ea_strata::prove::Budget;
use ea_strata::syntax::{Assignment, OperatorTag};
use ea_strata::theory::{SchemaId, StratifiedFragment, TheoryPresentation};

fn pool() -> StratifiedFragment {
    StratifiedFragment::from_stratified(
        ["K^{0}(1=0)", "K^{1}K^{0}(1=0)", "K^{w}(0=0)", "K^{0}(0=0) -> (0=0)"].map(p),
    )
    .unwrap()
}

#[test]
fn concurrent_queries_share_one_answer() {
    let b = Arc::new(BoundedIntendedStructure::new(pool(), Budget::default()));
    let queries = ["K^{0}(1=0)", "1=0", "0=0", "K^{1}K^{0}(1=0)", "K^{0}(0=0)"].map(p);
    let levels = ["0", "1", "2", "w", "w+1"].map(o);
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let b = Arc::clone(&b);
            let queries = queries.clone();
            thread::spawn(move || {
                let mut labels = Vec::new();
                for i in 0..queries.len() * levels.len() {
                    let j = (i + t) % (queries.len() * levels.len());
                    let (q, a) = (&queries[j / levels.len()], levels[j % levels.len()]);
                    let k = b.knows(OperatorTag::Indexed(a), q, &Assignment::new()).unwrap();
                    labels.push((j, k.label()));
                }
                labels.sort();
                labels
            })
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(results.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(b.cached(), queries.len() * levels.len());
    // no query is both held and failed
    assert!(results[0].iter().all(|(_, l)| *l != "unknown"));
}

#[test]
fn answers_carry_checkable_objects() {
    let b = BoundedIntendedStructure::new(pool(), Budget::default());
    for (q, level) in [("K^{0}(1=0)", "1"), ("1=0", "1"), ("K^{0}(0=0)", "w*2")] {
        let tag = OperatorTag::Indexed(o(level));
        match b.knows(tag, &p(q), &Assignment::new()).unwrap() {
            Knowledge::Holds { witness } => {
                assert!(witness.iter().all(|w| b.premises_for(tag).contains(w)));
            }
            Knowledge::Fails { countermodel } => {
                for prem in b.premises_for(tag).iter() {
                    assert!(ref_eval(&countermodel.structure, prem, &Env::new()));
                }
                assert!(!ref_eval(&countermodel.structure, &p(q), &Env::new()));
            }
            Knowledge::Unknown => panic!("{q} unresolved"),
        }
    }
}

#[test]
fn plain_queries_consult_the_whole_pool() {
    let b = BoundedIntendedStructure::new(pool(), Budget::default());
    assert!(b.knows(OperatorTag::Plain, &p("K^{w}(0=0)"), &Assignment::new()).unwrap().holds());
    assert!(b.knows(OperatorTag::Indexed(o("w")), &p("K^{w}(0=0)"), &Assignment::new()).unwrap().fails());
    assert_eq!(b.evaluate(&p("K^{w+1}K^{w}(0=0) -> K^{1}K^{0}(1=0)"), &Assignment::new()).unwrap(), Truth::True);
}

#[test]
fn e2_report_is_auditable() {
    let r = check_e2_counterexample(Budget::default());
    let text = r.render();
    assert!(text.contains("level-1 pool member: K^{0} (1=0)"), "{text}");
    assert!(text.contains("E2prime-admissible theta+"));
    assert_eq!(r.queries.len(), 3);
    assert_eq!(r.queries.iter().map(|q| q.role).collect::<Vec<_>>(), ["antecedent", "antecedent", "conclusion"]);
}

#[test]
fn walk_reports_cases_and_violations() {
    let t0 = TheoryPresentation::new(vec![p("0=0")]).with_schema(SchemaId::E3).with_k_closure(2);
    let r = truth_induction_walk(&t0, o("w*3"), Budget::default()).unwrap();
    assert!(r.passed(), "{}", r.render());
    assert!(r.render().contains("verdict=pass"));
    assert!(r.levels.iter().all(|l| l.violations == 0));

    let bad = TheoryPresentation::new(vec![p("1=0"), p("0=0")]).with_k_closure(1);
    let r = truth_induction_walk(&bad, o("w"), Budget::default()).unwrap();
    assert!(!r.passed());
    assert!(r.violations.iter().all(|v| v.case == Case::Base && v.level == o("0")));
    assert!(r.render().contains("verdict=violation"));

    let r = truth_induction_walk(&TheoryPresentation::default(), o("w*2"), Budget::default()).unwrap();
    assert!(r.passed());
    assert_eq!(r.classified, 0);
}
