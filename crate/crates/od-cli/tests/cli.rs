//! End-to-end tests of the `od` binary: exit codes, determinism, and the
//! trace CSV contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn od(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_od"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn strata_reports_the_golden_stratum_deterministically() {
    let a = od(&["strata", &corpus("fib.json")]);
    assert!(a.status.success());
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"kind\": \"EG\""));
    assert!(text.contains("1.618033988749"));
    let b = od(&["strata", &corpus("fib.json")]);
    assert_eq!(text, String::from_utf8(b.stdout).unwrap());
}

#[test]
fn classify_recognizes_the_commutator_as_polynomial() {
    let out = od(&["classify", &corpus("fib.json"), "--word", "aba-b-"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"growth\": \"polynomial\""), "{text}");

    let out = od(&["classify", &corpus("fib.json"), "--word", "a"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"growth\": \"exponential\""), "{text}");
}

#[test]
fn unknown_flags_exit_64_with_usage() {
    let out = od(&["strata", &corpus("fib.json"), "--bogus"]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn invalid_words_and_files_exit_2() {
    let out = od(&["classify", &corpus("fib.json"), "--word", "ax"]);
    assert_eq!(out.status.code(), Some(2));
    let out = od(&["strata", &corpus("no_such_map.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn maps_without_exponential_growth_are_rejected() {
    for cmd in [
        vec!["ns", &corpus("pg1.json"), "--inverse", &corpus("pg1.json")],
        vec!["growth-audit", &corpus("pg1.json")],
    ] {
        let out = od(&cmd.iter().map(|s| s as &str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(2), "{cmd:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("no exponentially growing stratum"), "{err}");
    }
}

#[test]
fn the_seed_is_always_echoed() {
    let out = od(&["gpg", &corpus("fib.json"), "--seed", "7"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("seed: 7"));
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"seed\": 7"));
}

#[test]
fn ns_traces_are_csv_with_the_stable_schema_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for path in [&out_a, &out_b] {
        let out = od(&[
            "ns",
            &corpus("fib.json"),
            "--inverse",
            &corpus("fib_inv.json"),
            "--seeds",
            "2",
            "--iters",
            "8",
            "--seed",
            "5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("summary:"), "{err}");
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "re-export is not byte-identical");
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,n,ell_exp,ell_F,goodness,cs_goodness,dist_plus,dist_minus,ratio_F"
    );
    assert!(lines.next().is_some(), "no data rows");
    assert!(!text.contains('\r'), "line endings must be LF");
}

#[test]
fn growth_audit_triples_on_the_extended_golden_map() {
    let out = od(&["growth-audit", &corpus("fibc.json"), "--seeds", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"audit_pass\": true"), "{text}");
    assert!(text.contains("\"power\": 6"), "{text}");
}

#[test]
fn subst_reports_golden_letter_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fib.json");
    std::fs::write(
        &path,
        r#"{"alphabet":["a","b"],"rules":{"a":["a","b"],"b":["a"]}}"#,
    )
    .unwrap();
    let out = od(&["subst", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.618033988"), "{text}");
    assert!(text.contains("\"primitivity\": \"Primitive\""), "{text}");
}
