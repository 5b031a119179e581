use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_norms-lab"));
    c.env_remove("NORMS_LAB_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn ram_profile_of_first_level() {
    let o = run(&["ram", "profile", "--p", "3", "--base", "0", "--top", "1"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["different_degree"], 1);
    assert_eq!(d["conductor"], 1);
}

#[test]
fn ram_profile_of_second_level() {
    let d = json(&run(&["ram", "profile", "--p", "3", "--top", "2"]));
    assert_eq!(d["lower_jumps"], serde_json::json!([0, 2]));
    assert_eq!(d["upper_jumps"], serde_json::json!([0, 1]));
    assert_eq!(d["different_degree"], 9);
    assert_eq!(d["conductor"], 2);
}

#[test]
fn oort_verify_passes() {
    let o = run(&[
        "oort", "verify", "--p", "3", "--c", "2", "--w", "1", "--levels", "auto+2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&o);
    assert_eq!(d["pass"], true);
    assert_eq!(d["m0"], 3);
    assert_eq!(d["generic"]["different"], 6);
}

#[test]
fn oort_verify_exit_codes() {
    assert_eq!(code(&run(&["oort", "verify", "--p", "3", "--c", "3"])), 2);
    assert_eq!(code(&run(&["oort", "verify", "--p", "4", "--c", "1"])), 2);
    assert_eq!(
        code(&run(&["oort", "verify", "--p", "3", "--c", "1", "--w", "1 + Y"])),
        2
    );
    assert_eq!(
        code(&run(&["oort", "verify", "--p", "3", "--c", "1", "--levels", "auto+9"])),
        2
    );
    // below m_0 the relation between levels 1 and 2 fails for c = 2
    let o = run(&["oort", "verify", "--p", "3", "--c", "2", "--levels", "1..2"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["pass"], false);
}

#[test]
fn oort_cross_check_and_table() {
    let o = run(&[
        "oort",
        "verify",
        "--p",
        "3",
        "--c",
        "1",
        "--levels",
        "1..2",
        "--cross-check",
        "--format",
        "table",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.ends_with("PASS\n"), "{text}");
}

#[test]
fn precision_flag_and_environment() {
    assert_eq!(
        code(&run(&[
            "--precision",
            "10",
            "padic",
            "teichmuller",
            "--p",
            "5",
            "--r",
            "2"
        ])),
        2
    );
    let o = bin()
        .args(["padic", "teichmuller", "--p", "5", "--r", "2"])
        .env("NORMS_LAB_PRECISION", "25")
        .output()
        .unwrap();
    assert_eq!(json(&o)["doc"]["relprec"], 25);
    let o = bin()
        .args(["padic", "teichmuller", "--p", "5", "--r", "2", "--precision", "30"])
        .env("NORMS_LAB_PRECISION", "25")
        .output()
        .unwrap();
    assert_eq!(json(&o)["doc"]["relprec"], 30);
    let o = run(&["padic", "teichmuller", "--p", "5", "--r", "2"]);
    assert_eq!(json(&o)["doc"]["relprec"], 60);
}

#[test]
fn padic_arithmetic() {
    let o = run(&["padic", "arith", "div", "1", "3", "--p", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["valuation"], -1);
    let o = run(&["padic", "arith", "mul", "3^1 * (2) [1]", "3^0 * (1 + 1*3) [2]"]);
    assert_eq!(json(&o)["text"], "3^1 * (2) [1]");
    assert_eq!(code(&run(&["padic", "arith", "div", "1", "0", "--p", "3"])), 2);
    assert_eq!(code(&run(&["padic", "show", "7"])), 2);
}

#[test]
fn weierstrass_prep_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "g.json",
        r#"{"ring":"Zp","p":3,"M":6,"coeffs":[3, 6, 1, 2]}"#,
    );
    let o = run(&["weierstrass", "prep", &f]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["c"], 0);
    assert_eq!(d["weierstrass_degree"], 2);
    assert_eq!(d["f"]["ring"], "Zp");
    assert_eq!(d["U"]["M"], 6);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"ring":"Zp","p":3,"coeffs":["3^0 * (0) [0]", 1]}"#,
    );
    assert_eq!(code(&run(&["weierstrass", "prep", &bad])), 3);
    let junk = write(dir.path(), "junk.json", "{");
    assert_eq!(code(&run(&["weierstrass", "prep", &junk])), 2);
    assert_eq!(code(&run(&["weierstrass", "prep", "/nonexistent/file.json"])), 2);
}

#[test]
fn fon_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("seq.json");
    let o = run(&[
        "fon",
        "from-series",
        "--p",
        "3",
        "--g",
        "1,2",
        "--probe",
        "3",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let seq = out.to_str().unwrap();
    let o = run(&["fon", "check", seq]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["pass"], true);

    let o = run(&["fon", "add", seq, seq, "--probe", "3"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["sum"]["range"], serde_json::json!([1, 3]));
    assert_eq!(d["stability"]["previous"], 2);

    // swap two components: no longer norm-compatible
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let comps = doc["components"].as_array_mut().unwrap();
    let other = run(&["fon", "from-series", "--p", "3", "--g", "2,1", "--probe", "3"]);
    comps[2] = json(&other)["components"][2].clone();
    let bad = write(dir.path(), "bad.json", &doc.to_string());
    let o = run(&["fon", "check", &bad]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["first_failure"], 2);
    assert_eq!(code(&run(&["fon", "add", &bad, seq, "--probe", "3"])), 2);
}

#[test]
fn output_is_deterministic() {
    let cases: [&[&str]; 3] = [
        &["oort", "verify", "--p", "3", "--c", "1", "--w", "1 + Z^2"],
        &["ram", "profile", "--p", "5", "--top", "2"],
        &["fon", "from-series", "--p", "3", "--g", "0,1,2", "--probe", "3"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn levels_are_capped() {
    assert_eq!(code(&run(&["ram", "profile", "--p", "3", "--top", "6"])), 2);
    assert_eq!(
        code(&run(&[
            "--max-level",
            "6",
            "ram",
            "profile",
            "--p",
            "3",
            "--base",
            "5",
            "--top",
            "6"
        ])),
        0
    );
}
