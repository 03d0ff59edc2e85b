use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparse_poincare::format::{self, SparseFamilyFile};
use sparse_poincare::report::Report;
use sparse_poincare_core::grid::{Grid, GridFunction};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-poincare"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_config_exits_with_two() {
    let o = run(&["verify", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_error_exits_with_two() {
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema": 1, "theorem": "FS", "n": 1, "level": 4, "p": 0.5}"#).unwrap();
    assert_eq!(run(&["verify", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn passing_suite_exits_with_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("twm.json");
    let o = run(&["verify", "--config", s(&configs().join("twm.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Report = format::read_json(&out).unwrap();
    assert!(r.passed());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("TWM: Pass"));
}

#[test]
fn failing_bound_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.json");
    // A Poincaré constant far below the true one makes the assembled bound fail.
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "theorem": "LOCAL_P", "n": 1, "level": 8, "p": 2,
            "poincare_constant": 1e-6, "family": {"functions": ["affine:a=(1)"]}}"#,
    )
    .unwrap();
    let o = run(&["verify", "--config", s(&cfg), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_and_level_overrides_are_recorded() {
    let o = run(&["verify", "--config", s(&configs().join("sparse1.json")), "--seed", "99", "--level", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.seed, 99);
    assert_eq!(r.config.level, 3);
}

#[test]
fn csv_output_has_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    assert_eq!(run(&["verify", "--config", s(&configs().join("twm.json")), "--out", s(&json)]).status.code(), Some(0));
    let o = run(&["report", "--input", s(&json), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, Report::CSV_COLUMNS);
    let r: Report = format::read_json(&json).unwrap();
    assert_eq!(rdr.records().count(), r.instances.len());
}

#[test]
fn sparse_command_dumps_a_family_that_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.gf");
    let g = Grid::unit(2, 4).unwrap();
    let f = GridFunction::build(g, |x| if x[0] > 0.6 && x[1] < 0.3 { 10.0 } else { x[0] }).unwrap();
    format::save_function(&input, &f).unwrap();
    for variant in ["oscillation", "levelset"] {
        let dump = dir.path().join(format!("{variant}.json"));
        let o = run(&["sparse", "--function", s(&input), "--rho", "2", "--variant", variant, "--dump", s(&dump)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let fam = format::read_json::<SparseFamilyFile>(&dump).unwrap().family().unwrap();
        assert!(!fam.is_empty());
        assert!(fam.eta().unwrap() > 0.0);
    }
}

#[test]
fn whitney_and_weights_commands() {
    let dir = tempfile::tempdir().unwrap();
    let wd = dir.path().join("w.json");
    let o = run(&["whitney", "--domain", "box((0,0),(1,1))", "--level", "5", "--dump", s(&wd)]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("544 cubes"), "{text}");
    assert!(wd.exists());

    let gf = dir.path().join("w.gf");
    let o = run(&["weights", "--spec", "dist:point(0.5):gamma=-0.5", "--dim", "1", "--level", "8", "--dump", s(&gf)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
    assert_eq!(format::load_function(&gf).unwrap().grid().num_cells(), 256);

    let o = run(&["weights", "--spec", "dist:boundary:gamma=0.5", "--dim", "2", "--level", "4", "--domain", "box((0,0),(1,1))"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
