use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fockrad"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fockrad-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const PAIR: &str = r#"{"n":2,"dim":2,"matrices":[
 [[[0,0],[0,0]],[[1,0],[0,0]]],
 [[[0.5,0],[0,0.25]],[[0,0],[0,-0.5]]]]}"#;

#[test]
fn shifts_writes_a_file() {
    let out = scratch("s.json");
    let o = run(&["shifts", "--n", "2", "--q", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"words\":[\"e\",\"g1\",\"g2\""));
    assert!(text.contains("\"B\""));
}

#[test]
fn joint_numerical_radius_of_a_tuple() {
    let t = scratch("t.json");
    std::fs::write(&t, PAIR).unwrap();
    let o = run(&["radii", "--input", t.to_str().unwrap(), "--kind", "joint_numerical", "--q", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with('[') && text.contains("joint_numerical"), "{text}");
}

#[test]
fn certify_hdlh_passes() {
    let o = run(&["certify", "--suite", "hdlh", "--trials", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("\"status\":\"pass\""));
}

#[test]
fn dimension_mismatch_is_an_input_error() {
    let t = scratch("bad.json");
    std::fs::write(&t, r#"{"n":1,"dim":2,"matrices":[[[[1,0]]]]}"#).unwrap();
    let o = run(&["radii", "--input", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error["));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_suite_is_an_input_error() {
    let o = run(&["certify", "--suite", "nope", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn output_is_byte_identical() {
    let t = scratch("d.json");
    std::fs::write(&t, PAIR).unwrap();
    let a = run(&["radii", "--input", t.to_str().unwrap(), "--q", "4"]);
    let b = run(&["radii", "--input", t.to_str().unwrap(), "--q", "4", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn toeplitz_round_trip() {
    let p = scratch("p.json");
    std::fs::write(
        &p,
        r#"{"n":1,"m":2,"d":1,"a0":[[[2,0]]],"coefficients":[{"word":"g1","matrix":[[[1,0]]]}]}"#,
    )
    .unwrap();
    let check = run(&["toeplitz", "check", "--input", p.to_str().unwrap(), "--q", "4"]);
    assert!(check.status.success(), "{}", String::from_utf8_lossy(&check.stderr));
    assert!(String::from_utf8(check.stdout).unwrap().contains("\"positive\":true"));
    let f = run(&["toeplitz", "factor", "--input", p.to_str().unwrap()]);
    assert!(f.status.success(), "{}", String::from_utf8_lossy(&f.stderr));
    assert!(String::from_utf8(f.stdout).unwrap().contains("\"residual\""));
}

#[test]
fn spectrum_csv_has_a_row_per_point() {
    let t = scratch("sp.json");
    let g = scratch("grid.json");
    std::fs::write(&t, PAIR).unwrap();
    std::fs::write(&g, "[[[0,0],[0.5,0]],[[3,0],[0,0]]]").unwrap();
    let o = run(&["spectrum", "--input", t.to_str().unwrap(), "--grid", g.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0)), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("re1,im1,re2,im2,member"));
}
