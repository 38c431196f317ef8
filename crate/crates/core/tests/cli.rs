use std::process::Command;

fn ksmatch(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ksmatch"))
        .args(args)
        .env_remove("KSMATCH_SEED")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn thresholds_d3() {
    let (code, out, _) = ksmatch(&["thresholds", "--d", "3", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let alpha1 = v["alpha1"].as_f64().unwrap();
    assert!((alpha1 - 0.818).abs() <= 1e-3);
    assert!((v["m_over_n"].as_f64().unwrap() - 1.222).abs() <= 2e-3);
}

#[test]
fn thresholds_pass_through_and_round_trip() {
    let (code, out, _) = ksmatch(&["thresholds", "--d", "4", "--format", "csv"]);
    assert_eq!(code, 0);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let alpha1: f64 = row[2].parse().unwrap();
    assert_eq!(alpha1, ksmatch::analysis::phase1_threshold(4).unwrap());
    let z1: f64 = row[1].parse().unwrap();
    assert_eq!(z1, ksmatch::analysis::phase1_root(4).unwrap());
}

#[test]
fn thresholds_rejects_d2() {
    let (code, _, err) = ksmatch(&["thresholds", "--d", "2"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn predict_above_threshold() {
    let (code, out, _) = ksmatch(&["predict", "--d", "3", "--alpha", "0.9", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["tau1_fraction"].as_f64().unwrap() - 0.339).abs() < 1e-3);
    assert_eq!(v["mu_fraction_of_n"].as_f64().unwrap(), 1.0);
}

#[test]
fn trajectory_csv() {
    let (code, out, _) = ksmatch(&[
        "trajectory", "--d", "3", "--alpha", "0.9", "--n", "90000", "--points", "50", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,zeta,w,y1,y");
    assert_eq!(lines.len(), 51);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 90_000.0);
}

#[test]
fn self_check_passes() {
    let (code, out, _) = ksmatch(&["self-check"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.lines().filter(|l| l.starts_with("pass")).count() >= 8);
}

#[test]
fn simulate_is_byte_identical_for_same_seed() {
    let args = [
        "simulate", "--d", "3", "--alpha", "0.9", "--n", "2000", "--trials", "3", "--seed", "9", "--format", "json",
    ];
    let (c1, a, _) = ksmatch(&args);
    let (c2, b, _) = ksmatch(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let mut par = args.to_vec();
    par.extend(["--parallelism", "3"]);
    assert_eq!(ksmatch(&par).1, a);
}

#[test]
fn seed_from_environment_unless_flag() {
    let base = ["simulate", "--d", "3", "--alpha", "0.9", "--n", "500", "--trials", "2", "--format", "csv"];
    let run_env = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_ksmatch"))
            .args(base)
            .args(extra)
            .env("KSMATCH_SEED", "5")
            .output()
            .unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    let with_flag = ksmatch(&[&base[..], &["--seed", "5"]].concat()).1;
    assert_eq!(run_env(&[]), with_flag);
    assert_eq!(run_env(&["--seed", "6"]), ksmatch(&[&base[..], &["--seed", "6"]].concat()).1);
}

#[test]
fn core_check_small() {
    let (code, out, _) = ksmatch(&[
        "core-check", "--d", "4", "--n", "200", "--m", "200", "--trials", "10", "--format", "json",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["trials"], 10);
    let (code, _, _) = ksmatch(&["core-check", "--d", "2", "--n", "10", "--m", "11", "--trials", "1"]);
    assert_eq!(code, 3);
}

#[test]
fn sweep_csv_row_count() {
    let (code, out, _) = ksmatch(&[
        "sweep", "--d", "3", "--alpha-min", "0.7", "--alpha-max", "0.9", "--steps", "4", "--n", "500",
        "--trials", "2", "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 5);
}
