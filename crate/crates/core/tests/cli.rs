use std::path::Path;
use std::process::{Command, Output};

fn metwarp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metwarp")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const POLAR: &str = "\
[manifold radial]
coords = [u]
domain = [[0.2, 3.0]]
metric = [[1]]

[manifold angle]
coords = [a]
domain = [[0.1, 6.0]]
metric = [[1]]

[warp]
base = radial
fiber = angle
f = u
";

#[test]
fn passing_suite_exits_zero() {
    let o = metwarp(&["verify", "--spec", "builtin:polar", "--suite", "warped-connection", "--samples", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("check"));
    assert!(text.trim_end().ends_with("2 checks: 2 passed, 0 failed, 0 skipped"), "{text}");
}

#[test]
fn failing_check_exits_one() {
    let o = metwarp(&["verify", "--spec", "builtin:sphere-line", "--suite", "proposition-identities", "--samples", "5"]);
    assert_eq!(code(&o), 0, "p = q = 1 leaves both quadratic forms equal");
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "p2.spec", &format!("{}\n[suite proposition-identities]\np = 2\nq = 1\n", sphere_line()));
    let o = metwarp(&["verify", "--spec", &spec, "--samples", "5", "--suite", "proposition-identities"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("quadratic-literal"));
}

fn sphere_line() -> &'static str {
    "\
[manifold sphere]
coords = [th, ph]
domain = [[0.3, 2.8], [0, 6]]
metric = [[1, 0], [0, sin(th)^2]]

[manifold line]
coords = [s]
domain = [[-1, 1]]
metric = [[1]]

[warp]
base = sphere
fiber = line
f = 1
"
}

#[test]
fn spec_errors_exit_two_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.spec", &POLAR.replace("metric = [[1]]\n\n[manifold angle]", "metric = [[1 + * u]]\n\n[manifold angle]"));
    let o = metwarp(&["verify", "--spec", &bad]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.starts_with("metwarp: "), "{err}");
    assert!(err.contains("bad.spec:4:"), "{err}");
    assert!(err.contains("[manifold radial] metric"), "{err}");

    let dangling = write(dir.path(), "dangling.spec", &POLAR.replace("fiber = angle", "fiber = torus"));
    let o = metwarp(&["verify", "--spec", &dangling]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("torus"));

    let o = metwarp(&["verify", "--spec", dir.path().join("missing.spec").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&metwarp(&["verify"])), 2);
    assert_eq!(code(&metwarp(&["verify", "--spec", "builtin:polar", "--tol", "nonsense=1"])), 2);
    assert_eq!(code(&metwarp(&["verify", "--spec", "builtin:polar", "--tol", "power"])), 2);
    assert_eq!(code(&metwarp(&["verify", "--spec", "builtin:polar", "--suite", "no-such-suite"])), 2);
    assert_eq!(code(&metwarp(&["verify", "--spec", "builtin:polar", "--format", "yaml"])), 2);
}

#[test]
fn json_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = metwarp(&[
        "verify", "--spec", "builtin:hyperbolic3", "--suite", "lemma-curvature", "--samples", "4", "--format", "json", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("passed"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let records = v.as_array().unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r["verdict"] == "pass" && r["samples"] == 4));
    let ids: Vec<&str> = records.iter().map(|r| r["check_id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["verify", "--spec", "builtin:example3?n=2&k=1", "--seed", "5", "--samples", "6", "--format", "json"];
    let a = metwarp(&args);
    let b = metwarp(&args);
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other[4] = "--seed";
    other[5] = "6";
    assert_ne!(metwarp(&other).stdout, a.stdout);
}

#[test]
fn tolerance_override_changes_the_verdict() {
    let args = ["verify", "--spec", "builtin:polar", "--suite", "warped-connection", "--samples", "4"];
    assert_eq!(code(&metwarp(&args)), 0);
    let mut strict = args.to_vec();
    strict.extend(["--tol", "oracle-curvature=1e-300"]);
    assert_eq!(code(&metwarp(&strict)), 1);
}

#[test]
fn suite_without_warp_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "flat.spec", "[manifold M]\ncoords = [x]\ndomain = [[0, 1]]\nmetric = [[1]]\n");
    let o = metwarp(&["verify", "--spec", &spec, "--suite", "lemma-ricci", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["verdict"], "skipped");
}

#[test]
fn list_suites_names_everything() {
    let o = metwarp(&["list-suites"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["metallic-algebra", "oracle-selfcheck", "example3", "oracle-curvature", "hyperbolic3"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn guide_spec_example_runs_clean() {
    let guide = include_str!("../../../book/src/verifier.md");
    let start = guide.find("```text\n[manifold radial]").unwrap() + "```text\n".len();
    let text = &guide[start..start + guide[start..].find("```").unwrap()];
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "guide.spec", text);
    let o = metwarp(&["verify", "--spec", &spec, "--samples", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}
