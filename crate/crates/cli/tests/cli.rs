use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gevrey"))
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

/// Compares against the stored report; `GEVREY_UPDATE_GOLDEN=1` rewrites it.
fn check_golden(file: &str, actual: &str) {
    let path = golden(file);
    if std::env::var_os("GEVREY_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, want, "{file} drifted from its golden copy");
}

#[test]
fn analyze_e27_golden() {
    let o = run(&["analyze", spec("e27.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["indices"]["sigma0"], "2");
    assert_eq!(v["indices"]["s0"], "2");
    assert_eq!(v["gp"]["holds"], true);
    check_golden("e27.analyze.json", &stdout(&o));
}

#[test]
fn analyze_e62_golden() {
    let o = run(&["analyze", spec("e62.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["indices"]["sigma0"], "2");
    assert_eq!(v["indices"]["s0"], "2");
    assert_eq!(v["indices"]["s1"], "1");
    assert_eq!(v["r"]["holds"], false);
    check_golden("e62.analyze.json", &stdout(&o));
}

#[test]
fn analyze_model_golden() {
    let o = run(&["analyze", spec("model58.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["indices"]["sigma0"], "2");
    assert_eq!(v["indices"]["s0"], "2");
    check_golden("model58.analyze.json", &stdout(&o));
}

#[test]
fn analyze_resonant_exits_one_with_witness() {
    let o = run(&["analyze", spec("resonant.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["n"]["witness"], serde_json::json!([1, 1]));
    assert!(stderr(&o).contains("L(1,1) = 0"));
}

#[test]
fn analyze_writes_json_and_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let (j, s) = (dir.path().join("r.json"), dir.path().join("p.svg"));
    let o = run(&[
        "analyze",
        spec("e27.toml").to_str().unwrap(),
        "--json",
        j.to_str().unwrap(),
        "--svg",
        s.to_str().unwrap(),
        "--phi-bounds",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
    assert_eq!(v["phi_bounds"]["violations"], serde_json::json!([]));
    assert!(std::fs::read_to_string(s).unwrap().starts_with("<svg"));
}

#[test]
fn solve_e62_with_residual_check() {
    let o = run(&["solve", spec("e62.toml").to_str().unwrap(), "--kt", "10", "--lx", "40", "--residual-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("k,l,numerator,denominator"));
    assert!(csv.lines().any(|l| l == "2,4,15,2"));
    assert!(stderr(&o).contains("residual check passed"));
}

#[test]
fn csv_round_trip_rechecks_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    let s = spec("e62.toml");
    let o = run(&["solve", s.to_str().unwrap(), "--kt", "6", "--lx", "30", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["solve", s.to_str().unwrap(), "--coeffs", out.to_str().unwrap(), "--residual-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let text = std::fs::read_to_string(&out).unwrap().replace("\n2,4,15,2\n", "\n2,4,16,2\n");
    std::fs::write(&out, text).unwrap();
    let o = run(&["solve", s.to_str().unwrap(), "--coeffs", out.to_str().unwrap(), "--residual-check"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("residual nonzero"));
}

#[test]
fn solve_resonant_exits_one() {
    let o = run(&["solve", spec("resonant.toml").to_str().unwrap(), "--kt", "3", "--lx", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("resonance"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "m = 1\ntrunc_x = 4\na = [\"1/0\"]\n").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a[0]"), "{}", stderr(&o));

    let o = run(&["analyze", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["solve", spec("e62.toml").to_str().unwrap(), "--kt", "3", "--lx", "200"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("truncation"));

    let o = run(&["estimate", spec("e62.toml").to_str().unwrap(), "--rho", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_e62_verdicts() {
    let o = run(&[
        "estimate",
        spec("e62.toml").to_str().unwrap(),
        "--kt",
        "10",
        "--lx",
        "40",
        "--s",
        "1",
        "--sigma",
        "3/2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["predicted"]["s1"], "1");
    assert_eq!(v["membership_at_predicted"]["verdict"], "consistent");
    assert_eq!(v["membership_at_requested"]["result"]["verdict"], "inconsistent");
}

#[test]
fn estimate_grid_emits_csv() {
    let o = run(&[
        "estimate",
        spec("e62.toml").to_str().unwrap(),
        "--kt",
        "10",
        "--lx",
        "40",
        "--grid",
        "1/2,1/2,1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s,sigma,verdict,growth,stderr,margin");
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().any(|l| l.starts_with("2,3/2,inconsistent")));
    assert!(lines.iter().any(|l| l.starts_with("2,2,consistent")));
}

#[test]
fn verify_passes_and_tags_provenance() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("[stated]") && out.contains("[computed]"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn plot_writes_svg() {
    let o = run(&["plot", spec("e27.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("</svg>"));
}

#[test]
fn thread_count_does_not_change_output() {
    let s = spec("e27.toml");
    let args = ["solve", s.to_str().unwrap(), "--kt", "6", "--lx", "10"];
    let one = bin().args(args).env("GEVREY_THREADS", "1").output().unwrap();
    let auto = bin().args(args).env("GEVREY_THREADS", "0").output().unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, auto.stdout);
    let bad = bin().args(args).env("GEVREY_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
