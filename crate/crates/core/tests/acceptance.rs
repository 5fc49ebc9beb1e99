//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use common::{all_envs, mp_derives, o, ords, ref_depth, ref_erase, ref_eval, ref_free, ref_on, Env};
use ea_strata::gen::{FormulaGen, GenConfig, TagMode};
use ea_strata::intended::{check_e2_counterexample, truth_induction_walk, E2Verdict, Knowledge};
use ea_strata::ordinal::{omega_times, Ordinal};
use ea_strata::prove::{abstract_operators, taut_check, verify_collapse, Budget};
use ea_strata::semantics::{
    countermodel_search, eval, lift_plus, lower_minus, map_structure, Arithmetic, EvalAssignment, FiniteStructure,
    HashOracle, TableVariant,
};
use ea_strata::stratify::{
    apply_ordinal_map, destratify, recognize_stratified, stratify, OrdinalMap, StratifierSpec, Tail,
};
use ea_strata::syntax::{assign_substitute, parse_formula, render_formula, Formula, OperatorTag, Term};
use ea_strata::theory::{uniform_closure, SchemaId, StratifiedFragment, TheoryPresentation};
use rand::seq::SliceRandom;
use rand::Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: String) -> Outcome {
    Outcome { ok: true, detail }
}

fn fail(detail: String) -> Outcome {
    Outcome { ok: false, detail }
}

fn five_specs() -> Vec<StratifierSpec> {
    vec![
        StratifierSpec::all_from(Ordinal::ZERO),
        StratifierSpec::veristratifier(),
        StratifierSpec::all_from(o("w+2")),
        StratifierSpec::new([o("0"), o("w")], Tail::AllOrdinalsFrom(o("w*3"))).unwrap(),
        StratifierSpec::new([o("3")], Tail::LimitMultiplesFrom(2)).unwrap(),
    ]
}

fn epistemic(seed: u64, depth: usize, nodes: usize) -> FormulaGen {
    FormulaGen::new(seed, GenConfig::default().with_limits(depth, nodes))
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let specs = five_specs();
    let mut g = epistemic(1, 6, 60);
    let mut checked = 0;
    for _ in 0..10_000 {
        let phi = g.formula();
        for x in &specs {
            let plus = stratify(&phi, x).expect("L_EA input");
            if destratify(&plus).as_ref() != Ok(&phi) {
                return fail(format!("{phi} under {x} gave {plus}"));
            }
            checked += 1;
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(10) {
        return fail(format!("{checked} pairs took {}", secs(t)));
    }
    pass(format!("{checked}/{checked} (formula, spec) pairs in {}", secs(t)))
}

fn commutation() -> Outcome {
    let mut g = epistemic(2, 6, 60);
    for i in 0..1_000 {
        let phi = g.formula();
        let x = g.spec();
        let s = g.assignment(6);
        let lhs = stratify(&assign_substitute(&phi, &s).unwrap(), &x).unwrap();
        let rhs = assign_substitute(&stratify(&phi, &x).unwrap(), &s).unwrap();
        if lhs != rhs {
            return fail(format!("case {i}: {phi} under {x}: {lhs} vs {rhs}"));
        }
    }
    pass("1000/1000 (formula, assignment, spec) triples".into())
}

fn top_superscript(phi: &Formula) -> Ordinal {
    match phi {
        Formula::Op(OperatorTag::Indexed(a), _) => *a,
        other => panic!("not an operator formula: {other}"),
    }
}

fn depth_order() -> Outcome {
    // spread the pool over operator depths 0..=4
    let mut g = epistemic(3, 6, 40);
    let mut pool: Vec<Formula> = Vec::new();
    let mut per_depth = [0usize; 5];
    while pool.len() < 50 {
        let f = g.formula();
        let d = ref_depth(&f);
        if d < 5 && per_depth[d] < 10 {
            per_depth[d] += 1;
            pool.push(f);
        }
    }
    let specs = [StratifierSpec::all_from(Ordinal::ZERO), StratifierSpec::veristratifier(), five_specs()[3].clone()];
    let mut pairs = 0;
    for x in &specs {
        let tops: Vec<Ordinal> = pool.iter().map(|f| top_superscript(&stratify(&Formula::k(f.clone()), x).unwrap())).collect();
        for (i, fi) in pool.iter().enumerate() {
            for (j, fj) in pool.iter().enumerate() {
                let (di, dj) = (ref_depth(fi), ref_depth(fj));
                if (di < dj) != (tops[i] < tops[j]) || (di == dj) != (tops[i] == tops[j]) {
                    return fail(format!("{fi} / {fj} under {x}: depths {di},{dj} tops {},{}", tops[i], tops[j]));
                }
                pairs += 1;
            }
        }
    }
    pass(format!("{pairs}/{pairs} ordered pairs over 3 specs, depths {per_depth:?}"))
}

fn structures(rng: &mut impl Rng) -> Vec<FiniteStructure> {
    let mut out = Vec::new();
    for size in 1..=3u32 {
        for variant in TableVariant::ALL {
            let in_rel: Vec<bool> = (0..size * size).map(|_| rng.gen()).collect();
            let arith = Arithmetic::from_variant(size, variant).with_in_relation(in_rel).unwrap();
            out.push(FiniteStructure::new(arith, HashOracle { seed: rng.gen() }));
        }
    }
    out
}

fn to_eval(e: &Env) -> EvalAssignment {
    EvalAssignment(e.clone())
}

fn structure_maps() -> Outcome {
    let start = Instant::now();
    let levels = ["0", "1", "2", "w", "w+1", "w*2"].map(o).to_vec();
    let mut plain = epistemic(4, 5, 30);
    let mut strat = FormulaGen::new(5, GenConfig::default().with_limits(5, 30).with_tags(TagMode::Indexed(levels.clone())));
    let mut evals = 0usize;
    for round in 0..500 {
        let phi = plain.formula();
        let psi = strat.formula();
        let x = plain.spec();
        let h = {
            let rng = strat.rng();
            let targets = ["0", "3", "w", "w+5", "w*2", "w*4"].map(o);
            let mut pairs = Vec::new();
            for a in &levels {
                if rng.gen_bool(0.7) {
                    pairs.push((*a, *targets.choose(rng).unwrap()));
                }
            }
            OrdinalMap::new(pairs)
        };
        let phi_plus = stratify(&phi, &x).unwrap();
        let psi_minus = ref_erase(&psi);
        let psi_h = apply_ordinal_map(&psi, &h);
        let vars: Vec<String> = {
            let mut v = ref_free(&phi);
            v.extend(ref_free(&psi));
            v.sort();
            v.dedup();
            v
        };
        for m in structures(strat.rng()) {
            let (mp, mm, mh) = (lift_plus(&m, &x), lower_minus(&m), map_structure(&m, &h));
            for s in all_envs(&vars, m.universe_size()) {
                let es = to_eval(&s);
                let checks = [
                    (eval(&mp, &phi, &es).unwrap(), ref_eval(&m, &phi_plus, &s), "M+"),
                    (eval(&mm, &psi, &es).unwrap(), ref_eval(&m, &psi_minus, &s), "M-"),
                    (eval(&mh, &psi, &es).unwrap(), ref_eval(&m, &psi_h, &s), "h(M)"),
                ];
                for (lhs, rhs, which) in checks {
                    if lhs != rhs {
                        return fail(format!("round {round} {which}: phi={phi} psi={psi} X={x} h={h} at {es}"));
                    }
                }
                evals += 3;
            }
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        return fail(format!("{evals} equations took {}", secs(t)));
    }
    pass(format!("{evals}/{evals} equations over 1000 formulas, sizes 1-3, all table variants, in {}", secs(t)))
}

fn validity_transport() -> Outcome {
    let mut g = FormulaGen::new(6, GenConfig { max_numeral: 2, ..GenConfig::default().with_limits(4, 18) });
    let (mut down, mut up, mut taut) = (0, 0, 0);
    for _ in 0..200 {
        let phi = g.formula();
        let x = g.spec();
        let plus = stratify(&phi, &x).unwrap();
        if taut_check(&abstract_operators(&phi)) != taut_check(&abstract_operators(&plus)) {
            return fail(format!("taut_check disagrees on {phi} and {plus}"));
        }
        taut += 1;
        if let Some(cm) = countermodel_search(&phi, 2, 5_000) {
            let s = cm.assignment.0.clone();
            if ref_eval(&cm.structure, &phi, &s) {
                return fail(format!("reported countermodel does not refute {phi}"));
            }
            if ref_eval(&lower_minus(&cm.structure), &plus, &s) {
                return fail(format!("M- does not refute {plus}"));
            }
            down += 1;
        }
        if let Some(cm) = countermodel_search(&plus, 2, 5_000) {
            let s = cm.assignment.0.clone();
            if ref_eval(&cm.structure, &plus, &s) || ref_eval(&lift_plus(&cm.structure, &x), &phi, &s) {
                return fail(format!("M+ does not refute {phi}"));
            }
            up += 1;
        }
    }
    if down == 0 || up == 0 {
        return fail(format!("too few countermodels to test ({down} down, {up} up)"));
    }
    pass(format!("{down} countermodels moved to phi+, {up} moved back, taut_check agreed on {taut}/{taut}"))
}

fn k_at(a: Ordinal, f: Formula) -> Formula {
    Formula::k_at(a, f)
}

fn collapse() -> Outcome {
    let pool = ords(&["0", "1", "2", "3", "4", "5", "w", "w+1", "w+2", "w+3", "w*2", "w*2+3"]);
    let mut g = FormulaGen::new(
        7,
        GenConfig { vars: Vec::new(), quantifiers: false, allow_in: false, ..GenConfig::default() }
            .with_tags(TagMode::None)
            .with_limits(2, 12),
    );
    let mut worst = Duration::ZERO;
    for i in 0..100 {
        let n = 1 + (i % 2) as u64;
        let (lows, highs) = if n == 1 {
            (ords(&["0", "1", "2", "3"]), ords(&["w", "w+1", "w*2", "w*2+3"]))
        } else {
            (ords(&["0", "1", "w", "w+1"]), ords(&["w*2", "w*2+3"]))
        };
        let lows: Vec<Ordinal> = lows.into_iter().collect();
        let highs: Vec<Ordinal> = highs.into_iter().collect();
        let rng = g.rng();
        let l1 = *lows.choose(rng).unwrap();
        let h1 = *highs.choose(rng).unwrap();
        let chained = rng.gen_bool(0.5);
        let nested = rng.gen_bool(0.3);
        let (theta, theta2, psi) = (g.formula(), g.formula(), g.formula());
        let rng = g.rng();
        let goal = if nested {
            let inner = *lows.iter().filter(|a| **a < l1).collect::<Vec<_>>().choose(rng).copied().unwrap_or(&l1);
            if inner < l1 {
                k_at(l1, k_at(inner, psi))
            } else {
                k_at(l1, psi)
            }
        } else {
            k_at(l1, psi)
        };
        let mut raw = vec![k_at(h1, theta.clone())];
        if chained {
            let h2 = *highs.choose(rng).unwrap();
            raw.push(Formula::implies(k_at(h1, theta), k_at(h2, theta2.clone())));
            raw.push(Formula::implies(k_at(h2, theta2), goal.clone()));
        } else {
            raw.push(Formula::implies(k_at(h1, theta), goal.clone()));
        }
        let distractor = k_at(**pool.iter().collect::<Vec<_>>().choose(rng).unwrap(), g.formula());
        raw.push(distractor);
        let fragment = uniform_closure(&StratifiedFragment::raw(raw), &pool);

        let start = Instant::now();
        let report = match verify_collapse(&fragment, &goal, n, Budget::default()) {
            Ok(r) => r,
            Err(e) => return fail(format!("instance {i} (n={n}, goal {goal}): {e}")),
        };
        let t = start.elapsed();
        worst = worst.max(t);
        if t > Duration::from_secs(1) {
            return fail(format!("instance {i} took {}", secs(t)));
        }
        let bound = omega_times(n);
        let mut fixed = BTreeSet::new();
        ref_on(&goal, &mut fixed);
        for c in &report.core {
            ref_on(c, &mut fixed);
        }
        fixed.retain(|a| *a < bound);
        let pairs: Vec<(Ordinal, Ordinal)> = report.map.pairs().collect();
        let monotone = pairs.iter().all(|(a, b)| pairs.iter().all(|(c, d)| (a < c) == (b < d)));
        let fixes = fixed.iter().all(|a| report.map.get(*a) == Some(*a));
        let below = report.rewritten.iter().all(|r| {
            let mut s = BTreeSet::new();
            ref_on(r, &mut s);
            s.iter().all(|a| *a < bound) && fragment.contains(r)
        });
        if !monotone || !fixes || !below || !report.reproof.is_proved() {
            return fail(format!("instance {i}: map {} monotone={monotone} fixes={fixes} below={below}", report.map));
        }
        if !mp_derives(&report.rewritten, &goal) {
            return fail(format!("instance {i}: rewritten core does not derive {goal} by modus ponens"));
        }
    }
    pass(format!("100/100 fragments collapsed, slowest {}", secs(worst)))
}

/// Every `L_EA` sentence over two atoms with at most `k` operators and `i`
/// implications, operators written in pre-order.
fn shapes(k: usize, i: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    if k == 0 && i == 0 {
        out.push(parse_formula("0=0").unwrap());
        out.push(parse_formula("1=0").unwrap());
    }
    if k > 0 {
        out.extend(shapes(k - 1, i).into_iter().map(Formula::k));
    }
    if i > 0 {
        for lk in 0..=k {
            for li in 0..i {
                for a in shapes(lk, li) {
                    for b in shapes(k - lk, i - 1 - li) {
                        out.push(Formula::implies(a.clone(), b));
                    }
                }
            }
        }
    }
    out
}

fn label(phi: &Formula, labels: &mut impl Iterator<Item = Ordinal>) -> Formula {
    match phi {
        Formula::Op(_, a) => {
            let t = OperatorTag::Indexed(labels.next().unwrap());
            Formula::Op(t, Box::new(label(a, labels)))
        }
        Formula::Implies(a, b) => {
            let l = label(a, labels);
            Formula::implies(l, label(b, labels))
        }
        other => other.clone(),
    }
}

fn recognizer() -> Outcome {
    let pool = ["0", "1", "2", "w", "w+1", "w*2"].map(o);
    let subsets: Vec<StratifierSpec> = (0u32..64)
        .map(|bits| {
            let seed = pool.iter().enumerate().filter(|(j, _)| bits & (1 << j) != 0).map(|(_, a)| *a);
            StratifierSpec::new(seed, Tail::AllOrdinalsFrom(o("w*3"))).unwrap()
        })
        .collect();
    let (mut total, mut accepted) = (0, 0);
    for k in 0..=3 {
        for i in 0..=2 {
            for shape in shapes(k, i) {
                let images: HashSet<Formula> = subsets.iter().map(|x| stratify(&shape, x).unwrap()).collect();
                for code in 0..pool.len().pow(k as u32) {
                    let mut c = code;
                    let labels: Vec<Ordinal> = (0..k)
                        .map(|_| {
                            let a = pool[c % pool.len()];
                            c /= pool.len();
                            a
                        })
                        .collect();
                    let sigma = label(&shape, &mut labels.into_iter());
                    let brute = images.contains(&sigma);
                    let witness = recognize_stratified(&sigma);
                    if brute != witness.is_some() {
                        return fail(format!("{sigma}: brute force {brute}, recognizer {witness:?}"));
                    }
                    if let Some(x) = witness {
                        if stratify(&shape, &x).unwrap() != sigma {
                            return fail(format!("witness {x} does not reproduce {sigma}"));
                        }
                        accepted += 1;
                    }
                    total += 1;
                }
            }
        }
    }
    pass(format!("{total}/{total} sentences agree, {accepted} are stratifier images"))
}

fn e2_demo() -> Outcome {
    let r = check_e2_counterexample(Budget::default());
    let expected = parse_formula("K^{1}(K^{0}(1=0) -> (1=0)) -> (K^{1}K^{0}(1=0) -> K^{0}(1=0))").unwrap();
    if r.theta_plus != expected {
        return fail(format!("theta+ is {}", r.theta_plus));
    }
    if r.verdict != E2Verdict::ThetaFalse {
        return fail(format!("verdict {:?}", r.verdict));
    }
    // the antecedent bodies are level-1 pool members; the countermodel refutes
    // the level-0 consequence
    for q in &r.queries[..2] {
        let Formula::Op(_, body) = &q.query else { return fail("antecedent is not an operator".into()) };
        if !r.level_one_pool.contains(body) {
            return fail(format!("{body} is not in the level-1 pool"));
        }
    }
    let Knowledge::Fails { countermodel } = &r.queries[2].answer else {
        return fail("conclusion not refuted".into());
    };
    if ref_eval(&countermodel.structure, &parse_formula("1=0").unwrap(), &Env::new()) {
        return fail("countermodel satisfies 1=0".into());
    }
    match &r.e2prime_rejection {
        Some(m) if m.contains("depth 1 > depth 0") => {}
        other => return fail(format!("E2prime did not reject the operands: {other:?}")),
    }
    if !r.render().trim_end().ends_with("theta+ evaluates FALSE") {
        return fail("trace does not end with the verdict".into());
    }
    pass("theta+ FALSE; sub-queries at levels 1, 1, 0 all resolved; E2prime rejects depth 1 > depth 0".into())
}

fn truth_induction_walk_check() -> Outcome {
    let t0 = TheoryPresentation::new(vec![parse_formula("0=0").unwrap()]).with_schema(SchemaId::E3).with_k_closure(2);
    let r = match truth_induction_walk(&t0, omega_times(3), Budget::default()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let by_case: Vec<usize> = (0..3).map(|c| r.levels.iter().map(|l| l.by_case[c]).sum()).collect();
    if !r.passed() {
        return fail(format!("{} violations\n{}", r.violations.len(), r.render()));
    }
    if r.classified != r.sampled || by_case.iter().sum::<usize>() != r.sampled || by_case.contains(&0) {
        return fail(format!("classified {} of {} members, cases {by_case:?}", r.classified, r.sampled));
    }
    let unknown: usize = r.levels.iter().map(|l| l.unknown).sum();
    pass(format!(
        "0 violations; {} members over {} levels, cases {by_case:?}, {unknown} unknown",
        r.sampled,
        r.levels.len()
    ))
}

fn balanced(depth: u32) -> Formula {
    if depth == 0 {
        return Formula::Eq(Term::numeral(1), Term::succ(Term::var("x")));
    }
    let body = Formula::implies(balanced(depth - 1), balanced(depth - 1));
    match depth % 3 {
        0 => Formula::k(body),
        1 => Formula::forall("x", body),
        _ => body,
    }
}

fn performance() -> Outcome {
    let phi = balanced(14);
    let nodes = phi.node_count();
    if nodes < 100_000 {
        return fail(format!("test formula has only {nodes} nodes"));
    }
    let x = StratifierSpec::veristratifier();
    let t = Instant::now();
    let plus = stratify(&phi, &x).unwrap();
    let t_strat = t.elapsed();
    let t = Instant::now();
    let minus = destratify(&plus).unwrap();
    let t_destrat = t.elapsed();
    let t = Instant::now();
    let text = render_formula(&phi);
    let t_render = t.elapsed();
    let back = parse_formula(&text).unwrap();
    let t_parse = t.elapsed();
    let ok = minus == phi
        && back == phi
        && t_strat < Duration::from_millis(100)
        && t_destrat < Duration::from_millis(100)
        && t_parse < Duration::from_millis(200);
    let detail = format!(
        "{nodes} nodes: stratify {:.1}ms, destratify {:.1}ms, render+parse {:.1}ms (render {:.1}ms)",
        t_strat.as_secs_f64() * 1e3,
        t_destrat.as_secs_f64() * 1e3,
        t_parse.as_secs_f64() * 1e3,
        t_render.as_secs_f64() * 1e3
    );
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("round-trip", round_trip),
        ("commutation", commutation),
        ("depth/order", depth_order),
        ("structure maps", structure_maps),
        ("validity transport", validity_transport),
        ("collapse", collapse),
        ("recognizer", recognizer),
        ("E2 counterexample", e2_demo),
        ("truth-induction walk", truth_induction_walk_check),
        ("performance", performance),
    ];
    let filter: Vec<usize> = std::env::args().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n} ({name}): {} [{}]", outcome.detail, secs(start.elapsed()));
        failed += usize::from(!outcome.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
