use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TABLE1: &str = r#"{"B0_oe": 100, "Bprime_oe_per_cm": 10, "Bpp_oe_per_cm2": 1, "mass_g": 1e-22, "mu_emu": 1e-20}"#;

fn magtrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magtrap")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn stability_map_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "d.json", r#"{"units": "dimensionless", "K_r": 0.1, "K_z": 0.1}"#);
    let out = dir.path().join("map.csv");
    let r = magtrap(&["stability-map", "--config", s(&cfg), "--output", s(&out), "--resolution", "50"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));

    let raster = std::fs::read_to_string(&out).unwrap();
    assert!(raster.contains("# config_sha256: ") && raster.contains("# units: dimensionless"));
    assert!(raster.contains("# magtrap ") && raster.contains("# seed: none"));
    assert_eq!(data_lines(&raster).len(), 2501);

    let edge = std::fs::read_to_string(dir.path().join("map_boundary.csv")).unwrap();
    let rows = data_lines(&edge);
    let parse = |l: &str| -> Vec<f64> { l.split(',').map(|x| x.parse().unwrap()).collect() };
    let first = parse(rows[1]);
    let last = parse(rows.last().unwrap());
    assert!(first[1].abs() < 1e-12 && (first[2] - 0.5).abs() < 1e-12);
    assert!((last[1] - 4.0 / 27.0).abs() < 1e-12 && last[2].abs() < 1e-12);
    assert!(dir.path().join("map_plot.py").exists());
}

#[test]
fn config_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{ not json");
    let r = magtrap(&["stability-map", "--config", s(&bad), "--output", s(&dir.path().join("m.csv"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cannot parse config"));

    let missing = dir.path().join("missing.json");
    assert_eq!(magtrap(&["table1", "--config", s(&missing)]).status.code(), Some(3));

    let cfg = write(&dir, "t.json", TABLE1);
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(magtrap(&["table1", "--config", s(&cfg), "--output", s(&unwritable)]).status.code(), Some(3));

    let dimless = write(&dir, "d.json", r#"{"units": "dimensionless", "K_r": 0.1, "K_z": 0.1}"#);
    assert_eq!(magtrap(&["table1", "--config", s(&dimless)]).status.code(), Some(2));

    // B′² < ½B0B″ has no lateral confinement
    let untrapped = write(
        &dir,
        "u.json",
        r#"{"B0_oe": 100, "Bprime_oe_per_cm": 1, "Bpp_oe_per_cm2": 1, "mass_g": 1e-22, "mu_emu": 1e-20}"#,
    );
    assert_eq!(magtrap(&["escape-rate", "--config", s(&untrapped)]).status.code(), Some(2));
    assert_eq!(magtrap(&["escape-rate"]).status.code(), Some(2));
}

#[test]
fn trajectory_presets() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "d.json", r#"{"units": "dimensionless", "K_r": 0.1, "K_z": 0.1}"#);

    let out = dir.path().join("zero.csv");
    let r = magtrap(&["trajectory", "--config", s(&cfg), "--output", s(&out), "--perturbation", "0", "--duration", "2"]);
    assert_eq!(r.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    for line in data_lines(&text).iter().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1..4].iter().all(|&x| x == 0.0), "{line}");
    }

    let out = dir.path().join("anti.csv");
    let r = magtrap(&["trajectory", "--config", s(&cfg), "--output", s(&out), "--duration", "10", "--seed", "7"]);
    assert_eq!(r.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed: 7"));
    let summary = text.lines().last().unwrap();
    assert!(summary.contains("unbounded=false"), "{summary}");
    let drift: f64 = summary
        .split_whitespace()
        .find_map(|w| w.strip_prefix("energy_drift="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift <= 10.0 * 1e-10);

    let out = dir.path().join("par.csv");
    let r = magtrap(&["trajectory", "--config", s(&cfg), "--output", s(&out), "--preset", "parallel"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().lines().last().unwrap().contains("unbounded=true"));

    // at CGS scale the precession is ~1e8 times faster than the motion
    let cgs = write(&dir, "t.json", TABLE1);
    let r = magtrap(&["trajectory", "--config", s(&cgs), "--output", s(&dir.path().join("c.csv")), "--duration", "1e3"]);
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn escape_rate_reports() {
    let dir = TempDir::new().unwrap();
    let iso = write(&dir, "iso.json", r#"{"units": "dimensionless", "K_r": 0.01, "K_z": 0.01}"#);
    let r = magtrap(&["escape-rate", "--config", s(&iso)]);
    assert_eq!(r.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let ln = doc["ln_rate_over_omega_r"].as_f64().unwrap();
    assert!((ln + 194.70).abs() < 5e-3, "{ln}");
    assert_eq!(doc["result"]["regime"], "isotropic");
    assert!(doc["golden_rule_check"]["relative_difference"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["header"]["units"].as_str().unwrap().split(' ').next(), Some("dimensionless"));

    let cgs = write(&dir, "t.json", TABLE1);
    let r = magtrap(&["escape-rate", "--config", s(&cgs), "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let t = doc["result"]["log10_t_esc"].as_f64().unwrap();
    assert!((1e7..1e9).contains(&t));

    let out = dir.path().join("sweep.csv");
    let r = magtrap(&["escape-rate", "--config", s(&iso), "--sweep", "--resolution", "20", "--output", s(&out)]);
    assert_eq!(r.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "K_r,K_z,omega_p,log10_Tesc,regime");
    assert_eq!(rows.len(), 401);
    // along the diagonal ray K_r = K_z the escape time falls monotonically
    let diag: Vec<f64> = (0..20).map(|i| rows[1 + i * 21].split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(diag.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn table1_formats() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "t.json", TABLE1);
    let r = magtrap(&["table1", "--config", s(&cfg), "--format", "json"]);
    assert_eq!(r.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["matches"] == true));

    let a = magtrap(&["table1", "--config", s(&cfg), "--format", "csv"]);
    let b = magtrap(&["table1", "--config", s(&cfg), "--format", "csv"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("quantity,unit,value,expected,match"));
}
