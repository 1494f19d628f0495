use std::path::Path;

use krealize_cli::{golden, run_cli, EXIT_BUDGET, EXIT_OK, EXIT_USAGE};

fn cli(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("krealize").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn golden_files_match() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases = golden::load(&dir).unwrap();
    assert!(cases.len() >= 3);
    for c in &cases {
        if let Some(m) = c.check() {
            panic!("{m}");
        }
    }
}

#[test]
fn spec_cli_examples_are_covered() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases = golden::load(&dir).unwrap();
    for args in [
        vec!["run", "{2} * #f . #a . %p", "--trace"],
        vec!["compile", "\\x. x"],
        vec!["numeral", "3", "--star"],
    ] {
        assert!(
            cases.iter().any(|c| c.args == args),
            "no golden for {args:?}"
        );
    }
}

#[test]
fn unknown_flags_are_usage_errors() {
    let (code, out, err) = cli(&["run", "I * %p", "--frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("--frobnicate"));
}

#[test]
fn a_subcommand_is_required() {
    assert_eq!(cli(&[]).0, EXIT_USAGE);
}

#[test]
fn parse_errors_exit_one() {
    let (code, _, err) = cli(&["run", "I * "]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("krealize: parse error"));
}

#[test]
fn budget_exhaustion_exits_two() {
    let (code, out, _) = cli(&["run", "(W I)(W I) * %p", "--budget", "10"]);
    assert_eq!(code, EXIT_BUDGET);
    assert!(out.contains("budget after 10 steps"));
}

#[test]
fn stuck_and_no_are_success() {
    assert_eq!(cli(&["run", "#d * %p"]).0, EXIT_OK);
    let (code, out, _) = cli(&["pole", "member", "--kind", "empty", "I * %p"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("no\n"));
}

#[test]
fn json_lines_have_the_four_fields() {
    let (code, out, _) = cli(&["--json", "run", "I * #a . %p", "--trace"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<serde_json::Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    for l in &lines {
        let obj = l.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(keys, ["input", "kind", "result", "steps"]);
    }
    assert_eq!(lines[1]["result"], "#a * %p");
    assert_eq!(lines[2]["kind"], "run");
}

#[test]
fn suite_runs_one_criterion() {
    let (code, out, _) = cli(&["suite", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("criterion 1 PASS"));
}

#[test]
fn suite_rejects_unknown_criteria() {
    assert_eq!(cli(&["suite", "12"]).0, EXIT_USAGE);
    assert_eq!(cli(&["suite", "x"]).0, EXIT_USAGE);
}

#[test]
fn max_steps_variable_sets_the_budget() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_krealize"))
        .args(["run", "(W I)(W I) * %p"])
        .env("KREALIZE_MAX_STEPS", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_BUDGET));
    assert!(String::from_utf8_lossy(&out.stdout).contains("budget after 7 steps"));

    let out = std::process::Command::new(env!("CARGO_BIN_EXE_krealize"))
        .args(["run", "I * %p"])
        .env("KREALIZE_MAX_STEPS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn missing_files_are_usage_errors() {
    let (code, _, err) = cli(&["check-proof", "/nonexistent/file.proof"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cannot read"));
}

#[test]
fn extract_rejects_continuations() {
    let dir = tempdir();
    let phi0 = dir.join("phi0.term");
    let f = dir.join("f.formula");
    std::fs::write(&phi0, "k[%p]").unwrap();
    std::fs::write(&f, "F").unwrap();
    let (code, _, err) = cli(&[
        "extract",
        "--phi0",
        phi0.to_str().unwrap(),
        "--formula",
        f.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("not proof-like"), "{err}");
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("krealize-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
