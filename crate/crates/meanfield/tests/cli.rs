// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn meanfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanfield")).args(args).output().unwrap()
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

const FIGURE1: &str = "\
alpha1 = 1
alpha2 = 1
f1.kind = sigmoid
f1.a = 4
f1.b = 2
f1.c = 1
f2.kind = sigmoid
f2.a = 4
f2.b = 2
f2.c = 1
nu.kind = gaussian
nu.scale = 1
";

#[test]
fn validate_reports_config_problems_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(&good, FIGURE1).unwrap();
    assert_eq!(meanfield(&["validate", "--config", good.to_str().unwrap()]).status.code(), Some(0));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, FIGURE1.replace("alpha1 = 1", "alpha1 = -1")).unwrap();
    let out = meanfield(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha1"));

    let unknown = dir.path().join("unknown.cfg");
    std::fs::write(&unknown, format!("{FIGURE1}beta = 2\n")).unwrap();
    assert_eq!(meanfield(&["validate", "--config", unknown.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(meanfield(&["simulate", "--system", "sideways"]).status.code(), Some(1));
    assert_eq!(meanfield(&["rate-study", "--g", "x", "--out", "/nonexistent"]).status.code(), Some(1));
    assert_eq!(meanfield(&["--help"]).status.code(), Some(0));
}

#[test]
fn explicit_figure1_config_matches_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig1.cfg");
    std::fs::write(&cfg, FIGURE1).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir(d).unwrap();
    }
    let base = ["simulate", "--n", "20", "--t", "1", "--grid", "10"];
    let mut with_cfg = base.to_vec();
    with_cfg.extend(["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    let mut without = base.to_vec();
    without.extend(["--out", b.to_str().unwrap()]);
    assert!(meanfield(&with_cfg).status.success());
    assert!(meanfield(&without).status.success());
    assert_eq!(std::fs::read(a.join("trajectory.csv")).unwrap(), std::fs::read(b.join("trajectory.csv")).unwrap());
}

#[test]
fn csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(meanfield(&["simulate", "--t", "1", "--grid", "10", "--svg", "--out", out]).status.success());
    assert_eq!(first_line(&dir.path().join("trajectory.csv")), "t,x,y,event,mark");
    assert!(std::fs::read_to_string(dir.path().join("trajectory.svg")).unwrap().contains("<svg"));

    assert!(meanfield(&["simulate", "--system", "auxiliary", "--t", "1", "--grid", "10", "--out", out])
        .status
        .success());
    assert_eq!(first_line(&dir.path().join("aux_path.csv")), "t,x,y,event,mark,log_weight");

    assert!(meanfield(&["generator-check", "--g", "x2", "--grid", "5", "--out", out]).status.success());
    assert_eq!(first_line(&dir.path().join("generator_check.csv")), "x,y,N,AN,Abar,gap,bound,ok");

    assert!(meanfield(&["moment-check", "--reps", "200", "--out", out]).status.success());
    assert_eq!(first_line(&dir.path().join("moment_check.csv")), "N,t,mean,stderr,bound,passed");
    assert_eq!(first_line(&dir.path().join("limit_moments.csv")), "t,x2,x2_stderr,y2,y2_stderr");

    assert!(meanfield(&["girsanov-check", "--reps", "200", "--out", out]).status.success());
    assert_eq!(first_line(&dir.path().join("girsanov_check.csv")), "estimator,mean,stderr,reps");
}

#[test]
fn noise_dominated_rate_study_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = meanfield(&[
        "rate-study",
        "--n-list",
        "256,512,1024,2048",
        "--reps",
        "50",
        "--dt",
        "1e-3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconclusive: noise-dominated"));
    let summary = std::fs::read_to_string(dir.path().join("rate_summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with(",,,"));
}
