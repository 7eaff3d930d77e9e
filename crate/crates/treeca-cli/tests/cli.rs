//! End-to-end checks of the binary: argument plumbing, output formats,
//! exit codes, and scan determinism. Frozen outputs here replay values the
//! library test suites derive independently.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use treeca::{apply, LocalRule, Pattern, RuleFamily, TreeGeometry};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_treeca")
}

fn write_rule(dir: &Path, arity: usize, family: RuleFamily) -> PathBuf {
    let geometry = TreeGeometry::new(arity).unwrap();
    let rule = LocalRule::builtin(geometry, 2, 1, &family).unwrap();
    let path = dir.join(format!("{}-{arity}.rule", family.name()));
    std::fs::write(&path, rule.serialize()).unwrap();
    path
}

fn treeca(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("TREECA_BUDGET")
        .output()
        .expect("binary runs")
}

fn treeca_with_budget_env(args: &[&str], value: &str) -> Output {
    Command::new(bin())
        .args(args)
        .env("TREECA_BUDGET", value)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn apply_prints_the_image_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::Identity);
    let out = treeca(&["apply", "--rule", rule.to_str().unwrap(), "--pattern", "0110100"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "011\n");
    let out = treeca(&[
        "apply",
        "--rule",
        rule.to_str().unwrap(),
        "--pattern",
        "0110100",
        "--format",
        "records",
    ]);
    assert_eq!(stdout(&out), "image=011\n");
}

#[test]
fn orbit_reports_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::Identity);
    let out = treeca(&[
        "orbit",
        "--rule",
        rule.to_str().unwrap(),
        "--pattern",
        "0110100",
        "--steps",
        "2",
    ]);
    assert_eq!(stdout(&out), "011\n0\n");
    let out = treeca(&[
        "orbit",
        "--rule",
        rule.to_str().unwrap(),
        "--pattern",
        "0110100",
        "--steps",
        "2",
        "--format",
        "records",
    ]);
    assert_eq!(stdout(&out), "t=1 image=011\nt=2 image=0\n");
}

#[test]
fn trajectory_lines_are_identical_across_formats() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::Identity);
    let expected = "t=1 count=2 h=0.693147\nt=2 count=2 h=0.346574\nt=3 count=2 h=0.231049\n";
    let args = ["trajectory", "--rule", rule.to_str().unwrap(), "--depth", "1", "--steps", "3"];
    let text = treeca(&args);
    assert_eq!(stdout(&text), expected);
    let mut records_args = args.to_vec();
    records_args.extend(["--format", "records"]);
    let records = treeca(&records_args);
    assert_eq!(stdout(&records), expected);
}

#[test]
fn balance_renders_the_same_fields_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::OrAll);
    let out = treeca(&["balance", "--rule", rule.to_str().unwrap(), "--level", "1"]);
    assert_eq!(stdout(&out), "level: 1\nexpected: 4\nmin: 1\nmax: 7\nover: 1\n");
    let out = treeca(&[
        "balance",
        "--rule",
        rule.to_str().unwrap(),
        "--level",
        "1",
        "--format",
        "records",
    ]);
    assert_eq!(stdout(&out), "level=1 expected=4 min=1 max=7 over=1\n");
}

#[test]
fn verify_diamond_round_trips_the_search_witness() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::XorChildren);
    let found = treeca(&[
        "find-diamond",
        "--rule",
        rule.to_str().unwrap(),
        "--format",
        "records",
    ]);
    let line = stdout(&found);
    assert!(line.contains("verdict=refuted"), "unexpected search output: {line}");
    let witness = line
        .split_whitespace()
        .find_map(|field| field.strip_prefix("witness="))
        .expect("search output carries a witness");
    let (first, second) = witness.split_once(',').unwrap();
    let verified = treeca(&[
        "verify-diamond",
        "--rule",
        rule.to_str().unwrap(),
        "--first",
        first,
        "--second",
        second,
        "--format",
        "records",
    ]);
    assert!(verified.status.success());
    assert!(stdout(&verified).starts_with("verdict=certified bound=5"));

    // A claimed pair that fails an invariant is refuted, not an error.
    let rejected = treeca(&[
        "verify-diamond",
        "--rule",
        rule.to_str().unwrap(),
        "--first",
        first,
        "--second",
        first,
        "--format",
        "records",
    ]);
    assert!(rejected.status.success());
    assert_eq!(stdout(&rejected), "verdict=refuted reason=blocks-are-identical\n");
}

#[test]
fn built_preimages_replay_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let rule_path = write_rule(dir.path(), 2, RuleFamily::XorAll);
    let out = treeca(&[
        "build-preimage",
        "--rule",
        rule_path.to_str().unwrap(),
        "--mode",
        "permutive",
        "--target",
        "011",
    ]);
    assert!(out.status.success());
    let rule = LocalRule::parse(&std::fs::read_to_string(&rule_path).unwrap()).unwrap();
    let built =
        Pattern::parse(rule.geometry(), rule.alphabet_size(), stdout(&out).trim()).unwrap();
    let target = Pattern::parse(rule.geometry(), rule.alphabet_size(), "011").unwrap();
    assert_eq!(apply(&rule, &built).unwrap(), target);

    let identity = write_rule(dir.path(), 2, RuleFamily::Identity);
    let out = treeca(&[
        "build-preimage",
        "--rule",
        identity.to_str().unwrap(),
        "--mode",
        "closing",
        "--target",
        "011010011010101",
        "--at",
        "2",
    ]);
    assert_eq!(stdout(&out), "0110100\n");
}

#[test]
fn errors_other_than_budget_exhaustion_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::Identity);

    let missing = treeca(&["apply", "--rule", "/no/such/file.rule", "--pattern", "0"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).starts_with("error:"));

    let bad_letter =
        treeca(&["apply", "--rule", rule.to_str().unwrap(), "--pattern", "012"]);
    assert_eq!(bad_letter.status.code(), Some(2));

    let partial_level =
        treeca(&["apply", "--rule", rule.to_str().unwrap(), "--pattern", "0110"]);
    assert_eq!(partial_level.status.code(), Some(2));

    let unknown = treeca(&["no-such-command"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_env = treeca_with_budget_env(
        &["apply", "--rule", rule.to_str().unwrap(), "--pattern", "011"],
        "plenty",
    );
    assert_eq!(bad_env.status.code(), Some(2));
    assert!(stderr(&bad_env).contains("TREECA_BUDGET"));
}

#[test]
fn budget_exhaustion_exits_three_and_the_flag_beats_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::OrAll);
    let rule = rule.to_str().unwrap();

    let starved = treeca(&["find-diamond", "--rule", rule, "--budget", "16"]);
    assert_eq!(starved.status.code(), Some(3));
    assert!(stderr(&starved).contains("budget"));

    let starved_env = treeca_with_budget_env(&["find-diamond", "--rule", rule], "16");
    assert_eq!(starved_env.status.code(), Some(3));

    let rescued = Command::new(bin())
        .args(["find-diamond", "--rule", rule, "--budget", "100000000"])
        .env("TREECA_BUDGET", "16")
        .output()
        .unwrap();
    assert_eq!(rescued.status.code(), Some(0));
}

#[test]
fn scan_output_is_identical_across_worker_counts_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["scan", "--arity", "1", "--alphabet", "2", "--radius", "1"];

    let single = treeca(&base);
    assert!(single.status.success());
    let reference = stdout(&single);
    assert_eq!(reference.lines().count(), 16);

    let mut parallel_args = base.to_vec();
    parallel_args.extend(["--workers", "4"]);
    let parallel = treeca(&parallel_args);
    assert_eq!(stdout(&parallel), reference);

    let checkpoint = dir.path().join("scan.ckpt");
    let checkpoint_str = checkpoint.to_str().unwrap();
    let mut fresh_args = base.to_vec();
    fresh_args.extend(["--checkpoint", checkpoint_str]);
    let fresh = treeca(&fresh_args);
    assert_eq!(stdout(&fresh), reference);
    let stored = std::fs::read_to_string(&checkpoint).unwrap();
    assert_eq!(stored.lines().count(), 16);

    // Full resume recomputes nothing and prints the same bytes.
    let resumed = treeca(&fresh_args);
    assert_eq!(stdout(&resumed), reference);
    assert_eq!(std::fs::read_to_string(&checkpoint).unwrap(), stored);

    // Partial resume completes the missing rows in order.
    let head: String =
        stored.lines().take(5).map(|line| format!("{line}\n")).collect();
    std::fs::write(&checkpoint, &head).unwrap();
    let partial = treeca(&fresh_args);
    assert_eq!(stdout(&partial), reference);
    assert_eq!(std::fs::read_to_string(&checkpoint).unwrap(), stored);

    let corrupt = dir.path().join("corrupt.ckpt");
    std::fs::write(&corrupt, "not a record\n").unwrap();
    let mut corrupt_args = base.to_vec();
    corrupt_args.extend(["--checkpoint", corrupt.to_str().unwrap()]);
    let rejected = treeca(&corrupt_args);
    assert_eq!(rejected.status.code(), Some(2));
}

#[cfg(unix)]
#[test]
fn a_closed_output_pipe_ends_a_scan_without_a_panic() {
    use std::os::unix::process::ExitStatusExt;
    // The first row prints only after a full chunk is classified, long after
    // the read end below is dropped.
    let mut child = Command::new(bin())
        .args(["scan", "--arity", "2", "--alphabet", "2", "--radius", "1", "--workers", "1"])
        .env_remove("TREECA_BUDGET")
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let status = child.wait().unwrap();
    assert_eq!(status.signal(), Some(libc::SIGPIPE));
    let mut err = String::new();
    std::io::Read::read_to_string(child.stderr.as_mut().unwrap(), &mut err).unwrap();
    assert!(!err.contains("panicked"), "stderr: {err}");
}

#[test]
fn verdicts_render_with_prefixed_lines_in_text_and_one_line_in_records() {
    let dir = tempfile::tempdir().unwrap();
    let rule = write_rule(dir.path(), 2, RuleFamily::OrAll);
    let text = treeca(&["check-permutive", "--rule", rule.to_str().unwrap()]);
    assert_eq!(stdout(&text), "verdict: refuted\nwitness: 10\n");
    let records = treeca(&[
        "check-permutive",
        "--rule",
        rule.to_str().unwrap(),
        "--format",
        "records",
    ]);
    assert_eq!(stdout(&records), "verdict=refuted witness=10\n");
}
