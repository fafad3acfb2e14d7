use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn posmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posmod"))
        .args(args.iter().map(|a| if a.contains('.') && !a.starts_with('-') { data(a).into_os_string() } else { a.into() }))
        .env_remove("POSMOD_NMAX")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn two_sort_analyze() {
    let o = posmod(&["analyze", "twosort.theory", "twosort.model"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("Sub([P,L]) = 7"));
    assert!(s.contains("|LM| = 4"));
    assert!(s.contains("model 0 positively closed: no [nmax=3, LM complete]"));
    assert!(s.contains("type of `mark(v0)`: M0 (a)"));
}

#[test]
fn axiom_violation_exits_3() {
    let o = posmod(&["analyze", "twosort.theory", "twosort_bad.model"]);
    assert_eq!(code(&o), 3);
    let e = String::from_utf8(o.stderr).unwrap();
    assert!(e.contains("at p=a"), "{e}");
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(code(&posmod(&["analyze", "broken.theory", "path2.model"])), 2);
    assert_eq!(code(&posmod(&["analyze", "missing.theory", "path2.model"])), 2);
    assert_eq!(code(&posmod(&["redprod", "graph.theory", "path2.model", "--gen", "5"])), 2);
    assert_eq!(code(&posmod(&["dlat", "quotient", "chain3.dlat", "--filter", "0,1"])), 2);
}

#[test]
fn injected_faults_exit_4() {
    assert_eq!(code(&posmod(&["--inject-fault", "lm-direct", "analyze", "unary.theory", "unary.model"])), 4);
    assert_eq!(code(&posmod(&["--inject-fault", "tv-verify", "tv", "unary.theory", "unary.model", "full.subsets"])), 4);
    assert_eq!(code(&posmod(&["--inject-fault", "krull", "dlat", "krull", "square.dlat"])), 4);
}

#[test]
fn tv_full_family_passes() {
    let o = posmod(&["tv", "unary.theory", "unary.model", "full.subsets"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("extends to an elementary subfunctor: yes"));
    let o = posmod(&["tv", "unary.theory", "unary.model", "half.subsets"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("extends to an elementary subfunctor: no"));
}

#[test]
fn redprod_principal_ultrafilter() {
    let o = posmod(&["redprod", "unary.theory", "unary.model", "unary.model", "--gen", "0"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("ultra: true"));
    assert!(s.contains("A: 2 classes"));
    assert!(s.contains("diagonal elementary: yes"));
    assert!(s.contains("every filter is principal"));
}

#[test]
fn redprod_full_filter_is_product() {
    let o = posmod(&["redprod", "graph.theory", "path2.model", "path3.model", "--gen", "0,1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("A: 6 classes"));
}

#[test]
fn chain_spectrum_has_two_points() {
    let o = posmod(&["dlat", "spec", "chain3.dlat"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("2 points: yes"));
}

#[test]
fn square_krull_dimension() {
    let o = posmod(&["dlat", "krull", "square.dlat"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("both computations agree: yes"));
}

#[test]
fn posetal_chain() {
    let o = posmod(&["posetal-import", "chain3.dlat"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("LM = K/p at p = [1, 2]: yes"));
    assert!(s.contains("LM = K/p at p = [2]: yes"));
    let o = posmod(&["posetal-import", "chain3.dlat", "--filter", "1,2"]);
    assert!(stdout(&o).contains("|K| = 3, |LM| = 2, |K/p| = 2"));
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["analyze", "twosort.theory", "twosort.model"][..],
        &["--nmax", "2", "analyze", "graph.theory", "path2.model", "path3.model"][..],
        &["posetal-import", "square.dlat"][..],
        &["--structured", "tv", "unary.theory", "unary.model", "half.subsets"][..],
    ] {
        let a = posmod(args);
        let b = posmod(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn structured_output_shape() {
    let o = posmod(&["--structured", "dlat", "spec", "chain3.dlat"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["nmax"], 3);
    assert_eq!(v["sections"][0]["title"], "spectrum");
    assert_eq!(v["sections"][0]["data"]["points"], serde_json::json!([[1, 2], [2]]));
    assert_eq!(v["verdicts"][0]["holds"], true);
    assert!(v["verdicts"][0]["bound"].is_null());
}
