use std::fs;
use std::path::PathBuf;
use std::process::Command;

use ea_strata::ordinal::ord_parse;
use ea_strata::syntax::parse_formula;
use ea_strata_cli::run;
use serde_json::Value;

fn strata(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["strata"];
    argv.extend_from_slice(args);
    let e = run(argv);
    (e.code, e.stdout, e.stderr)
}

fn records(args: &[&str]) -> (i32, Vec<Value>) {
    let mut argv = vec!["--format", "json"];
    argv.extend_from_slice(args);
    let (code, out, _) = strata(&argv);
    (code, out.lines().map(|l| serde_json::from_str(l).expect("one JSON record per line")).collect())
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("strata-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn documented_examples_via_the_binary() {
    let bin = env!("CARGO_BIN_EXE_strata");
    let out = Command::new(bin).args(["stratify", "--x", "tail:limits-from(1)", "(K (1=0) -> K K (1=0))"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "(K^{w} (1=0) -> K^{w*2} K^{w} (1=0))\n");

    let out = Command::new(bin).args(["depth", "K K (1=0)"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2\n");

    let out = Command::new(bin).args(["e2-demo", "--budget", "1000"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().last(), Some("theta+ evaluates FALSE"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["depth", "--nope", "0=0"],
        &["depth"],
        &["depth", "K ("],
        &["stratify", "--x", "tail:sideways(1)", "K(0=0)"],
        &["stratify", "--x", "tail:all-from(0)", "K^{1}(0=0)"],
        &["restrict", "--alpha", "w", "K^{0}K^{0}(1=0)"],
        &["schema", "--id", "E9", "--phi", "0=0"],
        &["schema", "--id", "E2"],
        &["collapse", "--n", "0", "--supers", "w"],
        &["eval", "--model", "/nonexistent/structure", "0=0"],
    ] {
        let (code, _, err) = strata(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty());
    }
    let (code, out, _) = strata(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("induction-walk"));
}

#[test]
fn verdict_exit_codes() {
    assert_eq!(strata(&["prove", "0=0 -> 0=0"]).0, 0);
    assert_eq!(strata(&["prove", "K(1=0) -> (1=0)"]).0, 1);
    assert_eq!(strata(&["prove", "--budget", "0", "K(0=0) -> K(0=0)"]).0, 3);
    assert_eq!(strata(&["recognize", "K^{w*2}K^{w}(1=0)"]).0, 0);
    assert_eq!(strata(&["recognize", "K^{0}K^{0}(1=0)"]).0, 1);
    assert_eq!(strata(&["countermodel", "1=0"]).0, 1);
    assert_eq!(strata(&["countermodel", "0=0"]).0, 3);
    assert_eq!(strata(&["schema", "--id", "E2prime", "--phi", "K(1=0)", "--psi", "1=0"]).0, 1);
    assert_eq!(strata(&["schema", "--id", "E1", "--phi", "1=0", "--check-validity"]).0, 1);
    assert_eq!(strata(&["maph", "--h", "0:w,1:3", "K^{1}K^{0}(0=0)"]).0, 1);
    assert_eq!(strata(&["uniform", "--pool", "0,1,2", "K^{1}K^{0}(1=0)"]).0, 1);
    assert_eq!(strata(&["uniform", "--pool", "0", "K^{0}(1=0)"]).0, 0);
}

#[test]
fn formula_subcommands() {
    assert_eq!(strata(&["parse", "forall x. x = x"]).1, "forall x. (x=x)\n");
    assert_eq!(strata(&["onset", "K^{w}K^{0}(0=0)"]).1, "{0, w}\n");
    assert_eq!(strata(&["destratify", "K^{w*2}K^{w}(1=0)"]).1, "K K (1=0)\n");
    assert_eq!(strata(&["destratify", "--lenient", "K^{1}K(0=0)"]).1, "K K (0=0)\n");
    assert_eq!(strata(&["maph", "--h", "0:w,1:w*2", "K^{1}K^{0}(0=0)"]).1, "K^{w*2} K^{w} (0=0)\n");
    assert_eq!(strata(&["collapse", "--n", "1", "--supers", "{0,2,w,w*2+1}"]).1, "0:0,2:2,w:3,w*2+1:4\n");
    assert_eq!(strata(&["schema", "--id", "E3", "--phi", "1=0"]).1, "(K (1=0) -> (1=0))\n");
    assert_eq!(strata(&["schema", "--id", "PAAxiom", "--index", "0"]).0, 0);
    let (code, out, _) = strata(&["restrict", "--alpha", "1", "K^{0}(1=0)", "K^{1}K^{0}(1=0)", "0=0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "K^{0} (1=0)\n(0=0)\n");
    let (_, out, _) = strata(&["abstract", "K(x=0) -> K(y=0)"]);
    assert_eq!(out.lines().count(), 2, "{out}");
    assert!(out.lines().nth(1).unwrap().starts_with("P0 := K "));
}

#[test]
fn file_inputs() {
    let phi = scratch("phi.txt", "# a comment\nK (1=0)\n  -> K K (1=0)\n");
    let (code, out, _) = strata(&["stratify", "--x", "tail:limits-from(1)", "--file", phi.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "(K^{w} (1=0) -> K^{w*2} K^{w} (1=0))\n");

    let theory = scratch("t.theory", "sentence: K(0=0)\nsentence: K(0=0) -> K K(0=0)\n");
    let t = theory.to_str().unwrap();
    let (code, out, _) = strata(&["entails", "--theory", t, "K K(0=0)"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("witness: K (0=0)"));
    let (code, out, _) = strata(&["upward", "--x", "tail:limits-from(1)", "--theory", t, "K K(0=0)"]);
    assert_eq!(code, 0);
    assert!(out.contains("witnesses correspond: true"), "{out}");
    assert_eq!(strata(&["entails", "--theory", t, "1=0"]).0, 1);

    let members = scratch("members.txt", "K^{0}(1=0)\n# skip\nK^{w}K^{0}(1=0)\n");
    let (code, out, _) = strata(&["restrict", "--alpha", "w", "--file", members.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, "K^{0} (1=0)\n"));
}

#[test]
fn eval_reads_structure_files() {
    let (_, cm, _) = strata(&["countermodel", "K(1=0) -> (1=0)"]);
    let structure: String = cm.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let model = scratch("m.structure", &structure);
    let m = model.to_str().unwrap();
    assert_eq!(strata(&["eval", "--model", m, "K(1=0) -> (1=0)"]), (1, "false\n".into(), String::new()));
    assert_eq!(strata(&["eval", "--model", m, "K(1=0)"]).0, 0);
    assert_eq!(strata(&["eval", "--model", m, "--assign", "x:1", "S(x) = 0"]).1, "true\n");
    assert_eq!(strata(&["eval", "--model", m, "S(x) = 0"]).0, 2);
}

#[test]
fn structured_output_round_trips() {
    let (code, recs) = records(&["parse", "K^{w}(x=0) -> forall y. K(y=x)"]);
    assert_eq!(code, 0);
    let rec = &recs[0];
    assert_eq!(rec["command"], "parse");
    assert_eq!(rec["language"], "mixed");
    assert_eq!(rec["free"], serde_json::json!(["x"]));
    let text = rec["formula"].as_str().unwrap();
    assert_eq!(parse_formula(text).unwrap().to_string(), text);

    let (_, recs) = records(&["stratify", "--x", "seed:[w] tail:all-from(w*2)", "K K (0=0)"]);
    let plus = parse_formula(recs[0]["stratified"].as_str().unwrap()).unwrap();
    assert_eq!(plus.to_string(), "K^{w*2} K^{w} (0=0)");

    let (_, recs) = records(&["collapse", "--n", "2", "--supers", "0,w*3,w*5"]);
    for pair in recs[0]["map"].as_array().unwrap() {
        for o in pair.as_array().unwrap() {
            ord_parse(o.as_str().unwrap()).unwrap();
        }
    }

    let (code, recs) = records(&["e2-demo"]);
    assert_eq!(code, 0);
    assert_eq!(recs.len(), 4);
    assert!(recs[..3].iter().all(|r| r["record"] == "query"));
    let summary = &recs[3];
    assert_eq!(summary["verdict"], "theta-false");
    for key in ["theta", "theta_plus", "admissible_theta_plus"] {
        parse_formula(summary[key].as_str().unwrap()).unwrap();
    }

    let (code, recs) = records(&["depth", "K ("]);
    assert_eq!(code, 2);
    assert_eq!(recs[0]["status"], "error");
}

#[test]
fn induction_walk_reports() {
    let (code, recs) = records(&["induction-walk", "--alpha-max", "w*2"]);
    assert_eq!(code, 0);
    let summary = recs.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(summary["passed"], true);
    for r in &recs[..recs.len() - 1] {
        ord_parse(r["level"].as_str().unwrap()).unwrap();
    }

    let bad = scratch("bad.theory", "sentence: 1=0\nsentence: 0=0\nk-closure: 1\n");
    let (code, out, _) = strata(&["induction-walk", "--alpha-max", "w", "--theory", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.trim_end().ends_with("verdict=violation"));
}

#[test]
fn exit_codes_are_deterministic() {
    let cases: [&[&str]; 4] = [
        &["prove", "--budget", "50", "forall x. (K(x=0) -> K(S(x)=S(0)))"],
        &["e2-demo", "--budget", "5"],
        &["countermodel", "--max-universe", "2", "K(x=0) -> K(0=x)"],
        &["upward", "--x", "tail:all-from(w)", "K(0=0) -> K(1=0)"],
    ];
    for args in cases {
        let first = strata(args);
        assert_eq!(strata(args), first, "{args:?}");
    }
}
