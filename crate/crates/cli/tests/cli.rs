use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;
use trenchfield::config::load_config;
use trenchfield::report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trenchfield"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn value(doc: &serde_json::Value, key: &str) -> f64 {
    doc[key]["Ok"].as_f64().unwrap_or_else(|| panic!("{key} missing in {doc}"))
}

#[test]
fn analyze_writes_the_library_report() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = config("wafer_antisymmetric.toml");
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    let c = load_config(&cfg).unwrap();
    let direct = report::analyze(&c.params, &c.settings).unwrap();
    assert_eq!(text, direct.to_json() + "\n");
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], "trenchfield.report/1");
    assert!((value(&doc, "c4_prime") - 0.007).abs() <= 0.05);
    assert!(value(&doc, "c3_prime").abs() <= 0.005);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("wafer_antisymmetric"), "{stdout}");
}

#[test]
fn analyze_stacked_trench_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = config("stacked_trench_symmetric.toml");
    let o = run(&[
        "analyze",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: trenchfield.sweep/1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| -> f64 { row[header.iter().position(|h| *h == name).unwrap()].parse().unwrap() };
    assert!((col("C2") - 0.31).abs() <= 0.1 * 0.31, "C2 {}", col("C2"));
    assert!((col("C3p") - 0.020).abs() <= 0.05, "C3' {}", col("C3p"));
    assert_eq!(row[1], "");
    assert_eq!(*row.last().unwrap(), "ok");
}

#[test]
fn malformed_config_fails_without_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "bad.toml", "[trap]\nfamily = \"set_symmetric\"\na = = 3\n");
    let out = tmp.path().join("out");
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_family_and_missing_file_are_usage_errors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "odd.toml", "[trap]\nfamily = \"paul_trap\"\n");
    assert_eq!(run(&["analyze", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    let missing = tmp.path().join("nope.toml");
    assert_eq!(run(&["mesh-dump", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn sweep_writes_csv_and_plot() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        &tmp,
        "sweep.toml",
        "[trap]\nfamily = \"set_antisymmetric\"\n\n[sweep]\nparameter = \"phi\"\nvalues = [60, 75, 90]\n",
    );
    let out = tmp.path().join("out");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
        "--jobs",
        "2",
        "--plot",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema: trenchfield.sweep/1");
    assert_eq!(
        lines[1],
        "family,w_name,w_um,depth_eV,C2,C3p,C4p,na_above,na_below,ion_x_um,ion_y_um,rf_voltage_V,status"
    );
    assert_eq!(lines.len(), 5);
    for (line, w) in lines[2..].iter().zip(["60", "75", "90"]) {
        assert!(line.starts_with(&format!("set_antisymmetric,phi,{w},")), "{line}");
        assert!(line.ends_with(",ok"), "{line}");
    }
    let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn plot_without_out_is_a_usage_error() {
    let cfg = config("sweep_simple_trench_antisymmetric_f.toml");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--plot"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mesh_dump_prints_panels() {
    let cfg = config("set_symmetric.toml");
    let o = run(&["mesh-dump", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema: trenchfield.mesh/1"));
    assert_eq!(lines.next(), Some("electrode,role,ax_um,ay_um,bx_um,by_um"));
    assert!(lines.count() > 100);
}

#[test]
fn report_only_commands_reject_csv() {
    assert_eq!(run(&["regress-table1", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--format", "csv"]).status.code(), Some(1));
}
