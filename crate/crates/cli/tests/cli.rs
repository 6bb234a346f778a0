use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn shiftlap(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlap"))
        .args(args)
        .env("SHIFTLAP_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn vm_enum_lists_v1_in_order() {
    let dir = TempDir::new().unwrap();
    let o = shiftlap(dir.path(), &["vm-enum", "--N", "2", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let pts = fs::read_to_string(dir.path().join("vm_N2_m1_points.json")).unwrap();
    assert_eq!(pts, r#"["~1","~2","2~1","1~2"]"#);
}

#[test]
fn check_passes_for_n3_m2() {
    let dir = TempDir::new().unwrap();
    let o = shiftlap(dir.path(), &["check", "--N", "3", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["passed"], true);
    assert_eq!(r["results"]["rank"], 26);
}

#[test]
fn resistance_exceeds_five_at_level_four() {
    let dir = TempDir::new().unwrap();
    let o = shiftlap(dir.path(), &["resistance", "--N", "3", "--m", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["results"]["exceeds_level_plus_one"], true);
    assert_eq!(r["results"]["resistance"], "6");
    assert!(dir.path().join("resistance_N3_m4.json").exists());
}

#[test]
fn green_potential_trace_is_minus_one() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "one.json",
        r#"{"N": 3, "depth": 0, "values": ["1"]}"#,
    );
    let o = shiftlap(
        dir.path(),
        &[
            "laplacian-trace",
            &f,
            "--prefix",
            "12",
            "--mmax",
            "5",
            "--green",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("laplacian_trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,exact,decimal"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("-1")));
}

#[test]
fn energy_trace_of_cylinder_stabilizes() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"N": 2, "depth": 2, "values": ["0", "1", "1", "0"]}"#,
    );
    let o = shiftlap(dir.path(), &["energy-trace", "--f", &f, "--mmax", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["results"]["flag"], "stabilized");
    let trace = r["results"]["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 6);
    assert_eq!(trace[4]["exact"], trace[5]["exact"]);
}

#[test]
fn solve_bvp_writes_solution_and_verification() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"N": 2, "depth": 1, "values": ["1", "-2/3"]}"#,
    );
    let z = write(dir.path(), "z.json", r#"{"N": 2, "values": ["0", "5/2"]}"#);
    let o = shiftlap(
        dir.path(),
        &[
            "solve-bvp",
            "--f",
            &f,
            "--zeta",
            &z,
            "--sample-depth",
            "3",
            "--verify",
            "5",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let sol: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bvp_solution.json")).unwrap())
            .unwrap();
    assert_eq!(sol["depth"], 4);
    let ver: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("bvp_verification.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(ver["boundary_exact"], true);
}

#[test]
fn green_apply_vanishes_on_fixed_points() {
    let dir = TempDir::new().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"N": 2, "depth": 1, "values": ["3", "1/2"]}"#,
    );
    let o = shiftlap(dir.path(), &["green-apply", &f, "--level", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("green_apply_m3_values.json").exists());
}

#[test]
fn green_eval_reports_exact_value() {
    let dir = TempDir::new().unwrap();
    let o = shiftlap(dir.path(), &["green-eval", "--N", "2", "121~2", "12~1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["results"]["exact"], "2");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let o = shiftlap(
            dir.path(),
            &["operator", "--N", "2", "--m", "2", "--blocks"],
        );
        assert_eq!(o.status.code(), Some(0));
        let o = shiftlap(
            dir.path(),
            &["check", "--N", "2", "--m", "3", "--sequential"],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    for name in [
        "operator_N2_m2_H.csv",
        "operator_N2_m2_G.csv",
        "check_N2_m3.json",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_and_flag_override_output_directory() {
    let dir = TempDir::new().unwrap();
    let from_cfg = dir.path().join("cfg_out");
    let cfg = write(
        dir.path(),
        "run.json",
        &format!(
            r#"{{"N": 3, "seed": 11, "out_dir": "{}"}}"#,
            from_cfg.display()
        ),
    );
    let o = Command::new(env!("CARGO_BIN_EXE_shiftlap"))
        .args(["--config", &cfg, "vm-enum", "--m", "0"])
        .env_remove("SHIFTLAP_OUT_DIR")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(from_cfg.join("vm_N3_m0_points.json").exists());

    let from_env = dir.path().join("env_out");
    let o = shiftlap(&from_env, &["--config", &cfg, "vm-enum", "--m", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(from_env.join("vm_N3_m0_points.json").exists());

    let from_flag = dir.path().join("flag_out");
    let flag = from_flag.display().to_string();
    let o = shiftlap(
        &from_env,
        &["--config", &cfg, "--out-dir", &flag, "vm-enum", "--m", "0"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(from_flag.join("vm_N3_m0_points.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        shiftlap(dir.path(), &["no-such-command"]).status.code(),
        Some(2)
    );
    assert_eq!(
        shiftlap(dir.path(), &["check", "--N", "1", "--m", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        shiftlap(dir.path(), &["green-eval", "--N", "2", "13~1", "~1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        shiftlap(dir.path(), &["resistance", "--N", "2", "--a", "~1"])
            .status
            .code(),
        Some(2)
    );
    let bad = write(dir.path(), "bad.json", r#"{"N": 1}"#);
    assert_eq!(
        shiftlap(dir.path(), &["--config", &bad, "vm-enum", "--m", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_assertion_exits_with_one() {
    // the literal cylinder-trace threshold is one level too early
    let dir = TempDir::new().unwrap();
    let o = shiftlap(dir.path(), &["report-all", "--only", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert_eq!(r["passed"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pointwise Laplacian"));
}
