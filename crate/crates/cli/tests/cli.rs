use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "fixtures", name].iter().collect()
}

fn kc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kc")).args(args).output().expect("kc runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn count_fig1_sdd() {
    let o = kc(&["count", "--input", s(&fixture("fig1.sdd"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "models 6\n");
}

#[test]
fn validate_corrupted_sdd_exits_one_with_location() {
    let o = kc(&["validate", "--sdd", s(&fixture("corrupted.sdd"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "violation node 4 kind overlap\n");
}

#[test]
fn convert_fig3_prints_bound_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.orfbdd");
    let o = kc(&["convert", "dnnf2orfbdd", "--input", s(&fixture("fig3.nnf")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("bound ")).expect("bound line");
    let fields: Vec<(&str, &str)> = line[6..].split(' ').map(|f| f.split_once('=').unwrap()).collect();
    assert_eq!(fields.iter().map(|f| f.0).collect::<Vec<_>>(), ["NM^L", "N2^log2", "actual"]);
    let bound: u64 = fields[0].1.parse().unwrap();
    let actual: u64 = fields[2].1.parse().unwrap();
    assert!(actual <= bound);
    assert_eq!(stdout(&kc(&["count", "--input", s(&out)])), "models 10\n");
    assert_eq!(kc(&["validate", "--orfbdd", s(&out)]).status.code(), Some(0));
}

#[test]
fn compile_then_restrict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sdd = dir.path().join("f.sdd");
    let o = kc(&["compile", "--input", s(&fixture("fig2.nnf")), "--shape", "random", "--seed", "3", "--out", s(&sdd)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("f.vtree").exists());
    assert_eq!(stdout(&kc(&["count", "--input", s(&sdd)])), "models 34\n");
    let r = dir.path().join("r.sdd");
    let o = kc(&["restrict", "--input", s(&sdd), "--assign", "2=0,1=1,5=1,6=1", "--out", s(&r)]);
    assert_eq!(o.status.code(), Some(0));
    // C | D over the two free variables.
    assert_eq!(stdout(&kc(&["count", "--input", s(&r)])), "models 3\n");
    assert_eq!(stdout(&kc(&["validate", "--sdd", s(&r)])), "ok\n");
}

#[test]
fn explicit_vtree_flag_overrides_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let copy = dir.path().join("x.sdd");
    std::fs::copy(fixture("fig1.sdd"), &copy).unwrap();
    assert_eq!(kc(&["count", "--input", s(&copy)]).status.code(), Some(2));
    let o = kc(&["count", "--input", s(&copy), "--vtree", s(&fixture("fig1.vtree"))]);
    assert_eq!(stdout(&o), "models 6\n");
}

#[test]
fn protocol_transcript_lines() {
    let o = kc(&["protocol", "--sdd", s(&fixture("fig1.sdd")), "--row", "0", "--col", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("correct true max-accepting 1"));
    let rounds: Vec<&str> = text.lines().filter(|l| l.starts_with("round ")).collect();
    for r in &rounds {
        let t: Vec<&str> = r.split(' ').collect();
        assert_eq!((t[2], t[4], t[6], t[8]), ("sender", "msg", "bits", "nodes-left"), "{r}");
    }
    assert!(text.lines().last().unwrap().starts_with("output "));
}

#[test]
fn protocol_from_identity_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("eq.pbm");
    std::fs::write(&m, "P1\n4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n").unwrap();
    let o = kc(&["protocol", "--matrix", s(&m)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("rectangles 4 unambiguous-cc 2 fooling-set 4"), "{text}");
    assert!(text.contains("cover 4 g 2 bit-bound 9"));
    assert!(text.contains("correct true halving true"));
}

#[test]
fn family_writes_nnf_and_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qv.nnf");
    let o = kc(&["family", "qv", "--m", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&kc(&["count", "--input", s(&out)])), "models 4\n");
    let names = std::fs::read_to_string(dir.path().join("qv.vars")).unwrap();
    assert_eq!(names.lines().count(), 3);
    let o = kc(&["family", "hk", "--m", "2", "--k", "2", "--level", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = kc(&["experiment", "--family", "qv", "--from", "1", "--to", "2", "--restarts", "4", "--seed", "7", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("family,param,repr,strategy,seed,size,size_circle_only,paper_bound,wall_ms,status\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(kc(&["count"]).status.code(), Some(2));
    assert_eq!(kc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(kc(&["count", "--input", "x.sdd", "--bogus"]).status.code(), Some(2));
    assert_eq!(kc(&["--help"]).status.code(), Some(0));
}
