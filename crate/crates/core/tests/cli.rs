use std::io::Write;

use tarski_core::cli::run;
use tarski_core::kernel::{builtin_derivation, render_derivation};

fn tarski(args: &[&str]) -> (i32, String) {
    let out = run(std::iter::once("tarski").chain(args.iter().copied()));
    (out.exit_code, out.report)
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn prove_check_reads_scripts_from_disk() {
    let text = render_derivation(&builtin_derivation("lemma_re").unwrap());
    let good = temp_file(&text);
    let (code, report) = tarski(&["prove", "check", good.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{report}");
    assert!(report.contains("accepted"));

    // Dropping the excluded-middle line breaks both case frames.
    let broken: Vec<&str> = text.lines().filter(|l| !l.contains("excluded-middle")).collect();
    let bad = temp_file(&broken.join("\n"));
    let (code, report) = tarski(&["prove", "check", bad.path().to_str().unwrap()]);
    assert_eq!(code, 1, "{report}");

    let (code, _) = tarski(&["prove", "check", "/nonexistent/script.txt"]);
    assert_eq!(code, 2);
}

#[test]
fn model_eval_on_a_finite_model_file() {
    let m = temp_file("size 2\nD: 0 1 1 0\nD: 1 0 0 1\nD: 0 0 0 0\nD: 1 1 1 1\n");
    let path = m.path().to_str().unwrap();
    let (code, report) = tarski(&["model", "eval", "--file", path, "--axiom", "RE"]);
    assert_eq!(code, 0, "{report}");
    let (code, report) = tarski(&["model", "eval", "--file", path, "--formula", "forall a b. D a a b b"]);
    assert_eq!(code, 1);
    assert!(report.contains("a=0 b=1"), "{report}");

    let garbage = temp_file("size 2\nB: 0 0 7\n");
    let (code, report) = tarski(&["model", "eval", "--file", garbage.path().to_str().unwrap(), "--axiom", "RE"]);
    assert_eq!(code, 2);
    assert!(report.contains("line 2"), "{report}");
}

#[test]
fn records_format_is_one_json_object_per_line() {
    let (code, report) = tarski(&["--format", "records", "model", "check", "--model", "M", "--system", "CE2'", "--samples", "200"]);
    assert_eq!(code, 1, "TE is refuted in M");
    for line in report.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("status").is_some(), "{line}");
    }
    let te: serde_json::Value = report
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| v["axiom"] == "TE")
        .unwrap();
    assert_eq!(te["status"], "refuted");
}

#[test]
fn search_expect_none_sets_the_exit_code() {
    let (code, report) = tarski(&["search", "finite", "--system", "A'", "--forbid", "RE", "--expect-none"]);
    assert_eq!(code, 0, "{report}");
    let (code, report) = tarski(&["search", "finite", "--require", "RE", "--forbid", "IB", "--max-size", "2", "--expect-none"]);
    assert_eq!(code, 1, "{report}");
}
