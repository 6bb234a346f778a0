use std::fs;

use shiftlap::bvp::{BoundaryData, BoundaryFile};
use shiftlap::energy::energy_trace;
use shiftlap::green::{pointwise_laplacian_trace, GreenPotential};
use shiftlap::measure::{CylinderFunction, FunctionFile, LevelVector, LevelVectorFile};
use shiftlap::numeric::{int, ratio};
use shiftlap::report::{emit_convergence_csv, read_convergence_csv, RunConfig};
use shiftlap::{Alphabet, ExecMode};
use tempfile::TempDir;

#[test]
fn green_trace_csv_is_a_column_of_minus_ones() {
    let dir = TempDir::new().unwrap();
    let a = Alphabet::new(2).unwrap();
    let g = GreenPotential::new(CylinderFunction::constant(a, int(1)));
    let t = pointwise_laplacian_trace(&g, &[1, 2, 2, 1, 1, 2], 6, ExecMode::Sequential).unwrap();
    let path = dir.path().join("nested/trace.csv");
    emit_convergence_csv(&t.rows(), &path).unwrap();
    let back = read_convergence_csv(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, (1..=6).map(|m| (m, int(-1))).collect::<Vec<_>>());
}

#[test]
fn energy_trace_csv_stabilizes() {
    let dir = TempDir::new().unwrap();
    let a = Alphabet::new(3).unwrap();
    let f = CylinderFunction::new(a, 1, vec![int(0), ratio(1, 2), int(2)]).unwrap();
    let t = energy_trace(&f, 4, ExecMode::Sequential).unwrap();
    let path = dir.path().join("energy.csv");
    emit_convergence_csv(&t.entries, &path).unwrap();
    let rows = read_convergence_csv(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].windows(2).all(|w| w[0].1 == w[1].1));
}

#[test]
fn empty_trace_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.csv");
    emit_convergence_csv(&[], &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "m,exact,decimal\n");
}

#[test]
fn io_failure_is_surfaced() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert!(emit_convergence_csv(&[], &blocker.join("sub.csv")).is_err());
}

#[test]
fn json_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let a = Alphabet::new(3).unwrap();

    let f = CylinderFunction::new(a, 1, vec![ratio(-1, 3), int(0), ratio(7, 2)]).unwrap();
    let p = dir.path().join("f.json");
    fs::write(&p, serde_json::to_string(&f.to_file()).unwrap()).unwrap();
    let back: FunctionFile = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(CylinderFunction::from_file(&back).unwrap(), f);

    let v = LevelVector::new(a, 0, vec![int(1), ratio(2, 9), int(-4)]).unwrap();
    let back: LevelVectorFile =
        serde_json::from_str(&serde_json::to_string(&v.to_file()).unwrap()).unwrap();
    assert_eq!(LevelVector::from_file(&back).unwrap(), v);

    let z = BoundaryData::new(a, vec![int(0), int(1), ratio(1, 2)]).unwrap();
    let back: BoundaryFile =
        serde_json::from_str(&serde_json::to_string(&z.to_file()).unwrap()).unwrap();
    assert_eq!(BoundaryData::from_file(&back).unwrap(), z);
}

#[test]
fn config_file_loads() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("run.json");
    fs::write(
        &p,
        r#"{"N": 4, "max_level": 3, "point_cap": 5000, "solver": "float", "out_dir": "results"}"#,
    )
    .unwrap();
    let cfg = RunConfig::load(&p).unwrap();
    assert_eq!(cfg.n, 4);
    assert_eq!(cfg.max_level, 3);
    assert_eq!(cfg.point_cap, 5000);
    assert_eq!(cfg.out_dir, std::path::PathBuf::from("results"));
}
