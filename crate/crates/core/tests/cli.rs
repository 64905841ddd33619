//! End-to-end tests of the binary: exit codes, output determinism, schema
//! conformance of structured reports, and the DOT/side-output flags.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rfdgraph"))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.graph", env!("CARGO_MANIFEST_DIR"))
}

fn schema_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.schema.json")
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("RFD_COLOR")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn exit_codes_follow_the_verdict() {
    fn owned(args: &[&str]) -> Vec<String> {
        args.iter().map(|s| s.to_string()).collect()
    }
    let cases: Vec<(Vec<String>, i32)> = vec![
        (owned(&["check", &fixture("loop")]), 0),
        (owned(&["check", &fixture("sink")]), 0),
        (owned(&["check", &fixture("cycle_exit")]), 1),
        (owned(&["check", &fixture("receiver")]), 1),
        (owned(&["density", &fixture("loop")]), 0),
        (owned(&["density", &fixture("backward_chain")]), 1),
        (owned(&["orbit", &fixture("loop"), "--point", "e^inf"]), 0),
        (owned(&["orbit", &fixture("receiver"), "--point", "v6"]), 1),
        (owned(&["isotropy", &fixture("sink"), "--point", "v"]), 0),
        (owned(&["expand", &fixture("omega_loop")]), 0),
        (owned(&["validate", &fixture("receiver")]), 0),
        (owned(&["random", "--seed", "5"]), 0),
    ];
    for (args, expected) in &cases {
        let arg_refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let out = run(&arg_refs);
        assert_eq!(
            out.status.code(),
            Some(*expected),
            "args {args:?}, stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn input_errors_exit_two() {
    let out = run(&["check", "/nonexistent/path.graph"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["check", "--text", "vertex v (broken"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    // Well-formed notation naming a point outside the boundary.
    let out = run(&["orbit", &fixture("receiver"), "--point", "b1^inf"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["orbit", &fixture("loop"), "--point", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    // No input source at all.
    let out = run(&["check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn structured_reports_validate_against_the_shipped_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path()).expect("schema file"))
            .expect("schema parses");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");

    let fixtures = [
        "receiver",
        "cycle_exit",
        "backward_chain",
        "stranded",
        "sink",
        "loop",
        "double_loop",
        "omega_in",
        "omega_loop",
        "diamond",
    ];
    let mut documents = Vec::new();
    for f in fixtures {
        for sub in ["check", "density", "validate"] {
            documents.push(run(&[sub, &fixture(f), "--format", "json"]));
        }
        documents.push(run(&[
            "expand",
            &fixture(f),
            "--expand-bound",
            "3",
            "--format",
            "json",
        ]));
    }
    documents.push(run(&[
        "orbit",
        &fixture("loop"),
        "--point",
        "e^inf",
        "--format",
        "json",
    ]));
    documents.push(run(&[
        "orbit",
        &fixture("stranded"),
        "--point",
        "fw0^ray",
        "--format",
        "json",
    ]));
    documents.push(run(&[
        "isotropy",
        &fixture("loop"),
        "--point",
        "e^inf",
        "--format",
        "structured",
    ]));
    documents.push(run(&["random", "--seed", "3", "--format", "json"]));

    for out in &documents {
        let text = stdout_of(out);
        let doc: serde_json::Value = serde_json::from_str(&text)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"));
        let errors: Vec<String> = validator
            .iter_errors(&doc)
            .map(|e| e.to_string())
            .collect();
        assert!(errors.is_empty(), "schema violations {errors:?} in {text}");
    }
}

#[test]
fn equal_invocations_print_identical_bytes() {
    for args in [
        vec!["check", &fixture("receiver"), "--format", "json"],
        vec!["density", &fixture("backward_chain"), "--format", "json"],
        vec!["density", &fixture("diamond"), "--format", "json"],
        vec!["random", "--seed", "11"],
        vec!["check", &fixture("stranded")],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(stdout_of(&a), stdout_of(&b), "args {args:?}");
    }
}

#[test]
fn dot_flag_writes_a_highlighted_rendering() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dot_path = dir.path().join("graph.dot");
    let out = run(&[
        "check",
        &fixture("cycle_exit"),
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let dot = std::fs::read_to_string(&dot_path).expect("dot file written");
    assert!(dot.starts_with("digraph presentation {"));
    assert!(dot.contains("color=red"), "witness edges highlighted");

    // validate also accepts --dot; an RFD fixture renders without red.
    let ok_path = dir.path().join("ok.dot");
    let out = run(&[
        "validate",
        &fixture("sink"),
        "--dot",
        ok_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let dot = std::fs::read_to_string(&ok_path).expect("dot file written");
    assert!(!dot.contains("color=red"));
}

#[test]
fn output_flag_redirects_the_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("report.json");
    let out = run(&[
        "check",
        &fixture("loop"),
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).is_empty());
    let text = std::fs::read_to_string(&path).expect("report written");
    let doc: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    assert_eq!(doc["rfd"], true);
}

#[test]
fn inline_text_matches_file_input() {
    let path = fixture("diamond");
    let text = std::fs::read_to_string(&path).expect("fixture");
    let from_file = run(&["check", &path, "--format", "json"]);
    let from_text = run(&["check", "--text", &text, "--format", "json"]);
    assert_eq!(stdout_of(&from_file), stdout_of(&from_text));
}

#[test]
fn color_env_controls_ansi_escapes() {
    let always = bin()
        .args(["check", &fixture("loop")])
        .env("RFD_COLOR", "always")
        .output()
        .expect("binary runs");
    assert!(stdout_of(&always).contains("\x1b["));

    let never = bin()
        .args(["check", &fixture("loop")])
        .env("RFD_COLOR", "never")
        .output()
        .expect("binary runs");
    assert!(!stdout_of(&never).contains("\x1b["));

    // Piped stdout is not a terminal, so auto means plain.
    let auto = run(&["check", &fixture("loop")]);
    assert!(!stdout_of(&auto).contains("\x1b["));
}

#[test]
fn random_presentations_round_trip_through_check() {
    for seed in ["0", "1", "2", "17", "99"] {
        let gen = run(&["random", "--seed", seed]);
        assert_eq!(gen.status.code(), Some(0));
        let text = stdout_of(&gen);
        let checked = run(&["check", "--text", &text]);
        let code = checked.status.code().unwrap();
        assert!(
            code == 0 || code == 1,
            "seed {seed} generated unparsable output:\n{text}"
        );
    }
}
