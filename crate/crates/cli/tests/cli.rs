use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dcubic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcubic"))
        .args(args)
        .env_remove("DCUBIC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON record per line"))
        .collect()
}

#[test]
fn expsum_record_matches_library() {
    let out = dcubic(&["expsum", "--form", "fermat4", "--c", "1,2,3,4", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    let f = dcubic::form::DiagonalCubicForm::fermat(4);
    let expected = dcubic::expsum::exp_sum(&f, &[1, 2, 3, 4], 6).unwrap().value;
    assert_eq!(recs[0]["result"]["value"].as_i64(), Some(expected as i64));
    assert_eq!(recs[0]["operation"], "expsum.exp_sum");
    assert_eq!(recs[0]["params"]["n"], 6);
    assert_eq!(recs[0]["params"]["c"], "1,2,3,4");
}

#[test]
fn negative_tuples_and_prime_power_grid() {
    let out = dcubic(&["expsum", "--c", "-1,2,-3,4", "--p", "5", "--lmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let moduli: Vec<u64> = records(&out)
        .iter()
        .map(|r| r["result"]["modulus"].as_u64().unwrap())
        .collect();
    assert_eq!(moduli, [5, 25, 125]);
}

#[test]
fn usage_errors_exit_two() {
    let out = dcubic(&["expsum", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(dcubic(&["frobnicate"]).status.code(), Some(2));
    // The tuple has the wrong length.
    assert_eq!(
        dcubic(&["expsum", "--c", "1,2", "--n", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dcubic(&["verify", "--suite", "nonsense"]).status.code(),
        Some(2)
    );
}

#[test]
fn budget_exhaustion_exits_three_with_partial_record() {
    let out = dcubic(&[
        "expsum",
        "--c",
        "1,1,1,1",
        "--n",
        "5,1000003",
        "--method",
        "brute",
        "--budget",
        "100000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["partial"], false);
    assert_eq!(recs[1]["partial"], true);
    assert!(recs[1]["result"]["error"]
        .as_str()
        .unwrap()
        .contains("budget"));
}

#[test]
fn exact_identities_suite_passes() {
    let out = dcubic(&[
        "verify",
        "--suite",
        "exact-identities",
        "--m",
        "4",
        "--pmax",
        "11",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["pass"], true);
    assert_eq!(recs[0]["result"]["first_order_failures"], 0);
    assert!(recs[0]["result"]["first_order_checked"].as_u64().unwrap() > 14_000);
}

#[test]
fn failed_check_exits_one() {
    // The cone constant is far off at tiny B.
    let out = dcubic(&["cubes", "--task", "cone", "--B", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(records(&out)[0]["pass"], false);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nform = fermat4\nc = 1,1,1,1\nn = 7\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = records(&dcubic(&["expsum", "--config", cfg]));
    assert_eq!(from_file[0]["params"]["n"], 7);
    let overridden = records(&dcubic(&["expsum", "--config", cfg, "--n", "9"]));
    assert_eq!(overridden.len(), 1);
    assert_eq!(overridden[0]["params"]["n"], 9);

    std::fs::write(dir.path().join("bad.cfg"), "form fermat4\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    assert_eq!(
        dcubic(&["expsum", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn csv_export_writes_per_table_files() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_dcubic"))
        .args([
            "sieve", "--task", "b3", "--Z", "3", "--n", "2,4", "--format", "csv", "--out", "b3.csv",
        ])
        .env("DCUBIC_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.code().is_some_and(|c| c <= 1));
    let main = std::fs::read_to_string(dir.path().join("b3.sieve.b3.csv")).unwrap();
    assert!(main.starts_with("id,pass,runtime_seconds,seed"));
    let rows = std::fs::read_to_string(dir.path().join("b3.sieve.b3.rows.csv")).unwrap();
    let header = rows.lines().next().unwrap();
    assert!(header.contains("value") && header.contains("n"));
    for line in rows.lines().skip(1) {
        let value = line.split(',').find(|c| c.contains('.'));
        if let Some(v) = value {
            let digits = v.trim_start_matches('-').replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 12, "{v}");
        }
    }
    assert!(!Path::new("b3.sieve.b3.csv").exists());
}

#[test]
fn sampled_runs_replay_identically() {
    let args = [
        "sieve",
        "--task",
        "squarefull",
        "--Z",
        "6",
        "--Q",
        "4,16",
        "--samples",
        "500",
        "--seed",
        "11",
    ];
    let a = records(&dcubic(&args));
    let b = records(&dcubic(&args));
    assert_eq!(a[0]["result"], b[0]["result"]);
    assert_eq!(a[0]["seed"], 11);
}
