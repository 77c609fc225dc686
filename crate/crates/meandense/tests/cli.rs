use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
scenario_id = "cli-test"
d = 2
n = 1
mark_draws = 20000
intensity.kind = "quadratic"
marks.kind = "segment_law"
marks.length.kind = "fixed"
marks.length.value = 1.0
marks.orientation.kind = "uniform"
window.lo = [-1.5, -1.5]
window.hi = [1.5, 1.5]
grid.kind = "lattice"
grid.lo = [-1.0, -1.0]
grid.hi = [1.0, 1.0]
grid.count = 5
"#;

fn meandense(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_meandense"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .env("MEANDENSE_THREADS", "2")
        .output()
        .unwrap()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap()
}

#[test]
fn exact_grid_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = meandense(&["exact", "--seed", "7"], BASE, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&dir.path().join("density.csv"));
    assert_eq!(rows.len(), 25);
    for r in rows {
        let v: Vec<f64> = (0..4).map(|i| r[i].parse().unwrap()).collect();
        let exact = v[0] * v[0] + v[1] * v[1] + 1.0 / 3.0;
        assert!((v[2] - exact).abs() <= (3.0 * v[3]).max(1e-3), "{r:?}");
        assert_eq!(&r[4], "exact_quadrature");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "exact");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["scenario_id"], "cli-test");
    assert_eq!(manifest["config"]["marks.length.value"], 1.0);
}

#[test]
fn zero_intensity_simulation_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BASE.replace("intensity.kind = \"quadratic\"", "intensity.kind = \"constant\"\nintensity.value = 0.0");
    let out = meandense(&["simulate"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("realization.csv")).unwrap();
    assert_eq!(text, "grain,kind,germ1,germ2,measure,vertices\n");
}

#[test]
fn simulate_writes_segment_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = meandense(&["simulate", "--seed", "3"], BASE, dir.path());
    assert!(out.status.success());
    let rows = rows(&dir.path().join("realization.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(&r[1], "segment");
        let ends: Vec<Vec<f64>> = r[5]
            .split(';')
            .map(|p| p.split(' ').map(|c| c.parse().unwrap()).collect())
            .collect();
        let len = ((ends[1][0] - ends[0][0]).powi(2) + (ends[1][1] - ends[0][1]).powi(2)).sqrt();
        assert!((len - 1.0).abs() < 1e-12);
        assert_eq!(ends[0][0], r[2].parse::<f64>().unwrap());
    }
}

#[test]
fn invalid_config_exits_one_with_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BASE.replace("n = 1", "n = 2").replace("d = 2", "d = 2\nbandwidth.beta = 0.5\nbogus = 1");
    let out = meandense(&["exact"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "validation");
    assert_eq!(rec["exit_code"], 1);
    let messages = rec["messages"].as_array().unwrap();
    assert!(messages.iter().any(|m| m.as_str().unwrap().contains("bogus")), "{messages:?}");
    assert!(messages.iter().any(|m| m.as_str().unwrap().contains("lower-dimensional")), "{messages:?}");
}

#[test]
fn missing_requirement_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = meandense(&["estimate"], BASE, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = error_record(&out);
    assert!(rec["messages"][0].as_str().unwrap().contains("`N`"), "{rec}");
}

#[test]
fn unknown_subcommand_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = meandense(&["integrate"], BASE, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_record(&out)["error"], "validation");
}

#[test]
fn non_finite_intensity_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BASE.replace("intensity.kind = \"quadratic\"", "intensity.kind = \"quadratic\"\nintensity.scale = 1e308");
    let out = meandense(&["exact"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "numeric");
    assert!(rec["point"].is_array());
}

#[test]
fn estimate_reports_count_and_indicator_routes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BASE.replace("d = 2", "d = 2\nN = 20000");
    let out = meandense(&["estimate", "--seed", "11"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&dir.path().join("estimate.csv")) {
        let lambda: f64 = r[4].parse().unwrap();
        let count: f64 = r[6].parse().unwrap();
        assert!(count >= lambda);
        let radius: f64 = r[3].parse().unwrap();
        assert!((radius - 20000f64.powf(-1.0 / 3.0)).abs() < 1e-12);
    }
}

#[test]
fn study_mse_decreases_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BASE
        .replace("d = 2", "d = 2\nN_grid = [100, 10000]\nreplications = 20")
        .replace("grid.kind = \"lattice\"", "grid.kind = \"midpoints\"")
        .replace("grid.lo = [-1.0, -1.0]", "grid.lo = [0.0, 0.0]")
        .replace("grid.count = 5", "grid.count = 2");
    let out = meandense(&["study", "--seed", "5"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = rows(&dir.path().join("study.csv"));
    assert_eq!(rows.len(), 8);
    let mse = |n: &str| -> f64 {
        rows.iter().filter(|r| &r[3] == n).map(|r| r[10].parse::<f64>().unwrap()).sum()
    };
    assert!(mse("10000") < mse("100"), "{} vs {}", mse("10000"), mse("100"));
    assert_eq!(self::rows(&dir.path().join("study_region.csv")).len(), 2);
}

#[test]
fn minkowski_requires_deterministic_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = meandense(&["minkowski"], BASE, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let cfg = r#"
d = 2
n = 1
intensity.kind = "constant"
intensity.value = 1.0
marks.kind = "deterministic"
marks.grain.kind = "segment"
marks.grain.length = 1.0
marks.grain.direction = [1.0, 0.0]
minkowski.mc_points = 200000
"#;
    let out = meandense(&["minkowski", "--seed", "1"], cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for r in rows(&dir.path().join("minkowski.csv")) {
        let v: Vec<f64> = (0..6).map(|i| r[i].parse().unwrap()).collect();
        let exact = 1.0 + std::f64::consts::PI * v[0] / 2.0;
        assert!((v[1] - exact).abs() <= 3.0 * v[2], "{r:?}");
        assert!(v[1] <= v[3]);
        assert_eq!(v[4], 1.0);
    }
}

#[test]
fn help_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_meandense")).arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("--threads"));
}
