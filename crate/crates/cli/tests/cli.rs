use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn molphase(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molphase"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eig_on_h2() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["eig", "--hamiltonian", "h2"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("E0 = -1.8516"), "{}", stdout(&o));
    let report = json(&dir.path().join("eig.json"));
    let e0 = report["energies"][0].as_f64().unwrap();
    assert!((e0 - -1.8516).abs() < 5e-5);
}

#[test]
fn eig_on_identity_document() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("identity.json");
    fs::write(&doc, r#"{"label": "identity", "dim": 2, "matrix_re": [[1, 0], [0, 1]]}"#).unwrap();
    let o = molphase(&["eig", "--hamiltonian", doc.to_str().unwrap()], &dir.path().join("out"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("out/eig.json"));
    assert_eq!(report["energies"], serde_json::json!([1.0, 1.0]));
}

#[test]
fn malformed_document_exits_with_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("bad.json");
    fs::write(&doc, r#"{"label": "x", "dim": 2, "matrix_re": [[1, 0], [0]]}"#).unwrap();
    let out = dir.path().join("out");
    let o = molphase(&["eig", "--hamiltonian", doc.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("matrix_re"));
    assert!(!out.exists());
}

#[test]
fn ipea_defaults_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["ipea"], dir.path());
    assert!(o.status.success());
    let s = json(&dir.path().join("ipea_summary.json"));
    assert!((s["energy"].as_f64().unwrap() - -1.851571).abs() < 1e-6);
    assert!(s["abs_error"].as_f64().unwrap() <= 1e-9);
    assert!(s["correct_bits"].as_u64().unwrap() >= 50);
    let table = fs::read_to_string(dir.path().join("ipea_table.txt")).unwrap();
    assert_eq!(table.lines().count(), 7);
    assert!(table.contains('['));
}

#[test]
fn ipea_with_jitter_keeps_seventeen_bits() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["ipea", "--jitter", "5deg", "--seed", "7"], dir.path());
    assert!(o.status.success());
    let s = json(&dir.path().join("ipea_summary.json"));
    assert!(s["correct_bits"].as_u64().unwrap() >= 17);
}

#[test]
fn single_iteration_trace_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["ipea", "--iterations", "1"], dir.path());
    assert!(o.status.success());
    let trace = fs::read_to_string(dir.path().join("ipea_trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().skip(1).filter(|l| !l.starts_with("summary")).collect();
    assert_eq!(rows.len(), 1);
}

#[test]
fn inadmissible_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = molphase(&["ipea", "--bits", "6"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = molphase(&["ipea", "--tau", "-1"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = molphase(&["ipea", "--mode", "ideal", "--jitter", "5deg"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn pulse_mode_matches_ideal() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(molphase(&["ipea", "--iterations", "3"], &a).status.success());
    assert!(molphase(&["ipea", "--iterations", "3", "--mode", "pulse"], &b).status.success());
    let pa = json(&a.join("ipea_summary.json"))["phase"].as_f64().unwrap();
    let pb = json(&b.join("ipea_summary.json"))["phase"].as_f64().unwrap();
    assert!((pa - pb).abs() < 1e-8);
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert!(molphase(&["ipea", "--jitter", "5deg", "--seed", "11"], out).status.success());
        assert!(molphase(&["noise-sweep", "--epsilons", "0,1e-4"], out).status.success());
    }
    for name in ["ipea_trace.csv", "ipea_table.txt", "ipea_summary.json", "noise_sweep.csv", "noise_growth.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn asp_scan_and_single_time() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["asp", "--steps", "6", "--scan", "1:30:0.5"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("asp_scan.csv")).unwrap();
    let best = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(best >= 0.99);
    assert_eq!(csv.lines().count(), 60);

    let o = molphase(&["asp", "--steps", "200", "--total-time", "50"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("asp_scan.csv")).unwrap();
    let f: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(f >= 0.999);
}

#[test]
fn asp_on_sigma_x_target_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("sx.json");
    fs::write(&doc, r#"{"label": "sx", "dim": 2, "matrix_re": [[0, 1], [1, 0]]}"#).unwrap();
    let o = molphase(&["asp", "--hamiltonian", doc.to_str().unwrap(), "--scan", "1:5:1"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("asp_scan.csv")).unwrap();
    for l in csv.lines().skip(1) {
        let f: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }
}

#[test]
fn noise_sweep_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["noise-sweep", "--epsilons", "0,1e-6,1e-5,1e-4,1e-3"], dir.path());
    assert!(o.status.success());
    let sweep = fs::read_to_string(dir.path().join("noise_sweep.csv")).unwrap();
    for l in sweep.lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        if f[0].parse::<f64>().unwrap() == 0.0 {
            assert!(f[2].parse::<f64>().unwrap() < 1e-10);
        }
    }
    let growth = fs::read_to_string(dir.path().join("noise_growth.csv")).unwrap();
    let rows: Vec<Vec<String>> = growth.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let at_1e4 = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 1e-4).unwrap();
    let ratio: f64 = at_1e4[1].parse().unwrap();
    assert!((6.0..=10.0).contains(&ratio));
    let bits: Vec<u32> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(bits.windows(2).all(|w| w[1] <= w[0]), "{bits:?}");
}

#[test]
fn spectra_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = molphase(&["spectra", "--points", "1024"], dir.path());
    assert!(o.status.success());
    let manifest = fs::read_to_string(dir.path().join("spectra_manifest.csv")).unwrap();
    let rows: Vec<Vec<&str>> = manifest.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "-1");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.0);
    for r in &rows {
        assert!(dir.path().join(r[1]).exists());
        let measured: f64 = r[2].parse().unwrap();
        let extracted: f64 = r[3].parse().unwrap();
        let d = (measured - extracted).rem_euclid(1.0);
        assert!(d.min(1.0 - d) <= 3e-4);
    }
    let k0 = fs::read_to_string(dir.path().join("spectrum_k0.csv")).unwrap();
    assert_eq!(k0.lines().count(), 1025);
}
