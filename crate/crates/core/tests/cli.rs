use std::fs;
use std::path::{Path, PathBuf};

use cdvrp::cli::{run_cli_with, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};
use serde_json::{json, Value};

const SQUARE: &str = "\
# unit square
NAME square
SIZE 4
FLEET
0 3 6
DEMANDS
0 1 1 1
COORDS
0 0
1 0
0 1
1 1
EOF
";

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli_with(std::iter::once("cdvrp").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn solve_min_nt_on_square() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", SQUARE);
    let r = cli(&["solve", &inst, "--alg", "min-nt"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["pi"], 1);
    assert_eq!(v["algorithm"], "min-nt");
    assert_eq!(v["tours"][0]["sequence"], json!([0, 1, 3, 2, 0]));
}

#[test]
fn verify_reports_missing_customer() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", SQUARE);
    let sol = path(dir.path(), "sol.json");
    assert_eq!(cli(&["solve", &inst, "--alg", "min-nt", "-o", &sol]).code, EXIT_OK);
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    v["tours"][0]["sequence"] = json!([0, 1, 3, 0]);
    let bad = write(dir.path(), "bad.json", &v.to_string());
    let r = cli(&["verify", &inst, &bad]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.err.contains("coverage"), "{}", r.err);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", SQUARE);
    assert_eq!(cli(&["solve", &inst, "--alg", "bogus"]).code, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(
        cli(&["solve", &path(dir.path(), "missing.vrp"), "--alg", "min-nt"]).code,
        EXIT_USAGE
    );
    assert_eq!(cli(&["gen", "--n", "3", "--fleet", "1"]).code, EXIT_USAGE);
}

#[test]
fn malformed_instance_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.vrp",
        "NAME x\nSIZE 2\nFLEET\n0 1 4\nDEMANDS\n0 1\nMATRIX\nabc\n",
    );
    let r = cli(&["validate", &bad]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("line"), "{}", r.err);
}

#[test]
fn invalid_metric_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    // d(1,2) = 5 > d(1,0) + d(0,2)
    let text = "NAME tri\nSIZE 3\nFLEET\n0 2 10\nDEMANDS\n0 1 1\nMATRIX\n1\n1 5\n";
    let inst = write(dir.path(), "tri.vrp", text);
    let r = cli(&["validate", &inst]);
    assert_eq!(r.code, EXIT_INFEASIBLE);
    assert!(r.err.contains("triangle"), "{}", r.err);
    assert_eq!(cli(&["solve", &inst, "--alg", "min-nt"]).code, EXIT_INFEASIBLE);
}

#[test]
fn unreachable_customer_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", &SQUARE.replace("0 3 6", "0 3 2"));
    assert_eq!(cli(&["solve", &inst, "--alg", "bdcvrp"]).code, EXIT_INFEASIBLE);
}

#[test]
fn every_solver_output_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "gen.vrp");
    let r = cli(&[
        "gen",
        "--n",
        "12",
        "--seed",
        "3",
        "--fleet",
        "2:3,4:5:2",
        "--demand",
        "0.5:1.5",
        "-o",
        &inst,
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(cli(&["validate", &inst]).code, EXIT_OK);
    for alg in ["min-nt", "min-nht", "bdcvrp"] {
        let sol = path(dir.path(), &format!("{alg}.json"));
        let r = cli(&["solve", &inst, "--alg", alg, "-o", &sol]);
        assert_eq!(r.code, EXIT_OK, "{alg}: {}", r.err);
        let r = cli(&["verify", &inst, &sol]);
        assert_eq!(r.code, EXIT_OK, "{alg}: {}", r.err);
    }
}

#[test]
fn oracle_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", &SQUARE.replace("0 3 6", "0 1 6"));
    let r = cli(&["oracle", &inst]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["pi"], 3);

    let r = cli(&["compare", &inst]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["oracle_pi"], 3);
    assert_eq!(v["min_nt"]["pi"], 3);
    assert_eq!(v["ratio_min_nt"], 1.0);

    assert_eq!(cli(&["oracle", &inst, "--max-n", "2"]).code, EXIT_USAGE);
}

#[test]
fn reduce_writes_valid_gadget() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "sq.vrp", &SQUARE.replace("0 3 6", "0 2 6"));
    let sol = path(dir.path(), "sol.json");
    assert_eq!(cli(&["solve", &inst, "--alg", "min-nt", "-o", &sol]).code, EXIT_OK);
    let gadget = path(dir.path(), "gadget.vrp");
    let padded = path(dir.path(), "padded.json");
    let r = cli(&[
        "reduce",
        &inst,
        &sol,
        "--alpha",
        "0.9",
        "-o",
        &gadget,
        "--solution-out",
        &padded,
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(cli(&["validate", &gadget]).code, EXIT_OK);
    let r = cli(&["verify", &gadget, &padded, "--alpha", "0.9"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: Value = serde_json::from_str(&fs::read_to_string(&padded).unwrap()).unwrap();
    assert_eq!(v["alpha"], 1.0);
}

#[test]
fn generated_instance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.vrp");
    assert_eq!(
        cli(&["gen", "--n", "6", "--seed", "1", "--fleet", "3:4", "-o", &a]).code,
        EXIT_OK
    );
    let text = fs::read_to_string(&a).unwrap();
    let parsed = cdvrp::io::parse_instance(&text).unwrap();
    assert_eq!(cdvrp::io::write_instance(&parsed), text);
}
