use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bl_skorokhod::report::parse_report;

fn bl_verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bl-verify"))
        .args(args)
        .env("BL_EMBED_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn out_arg(dir: &Path) -> String {
    dir.join("out").to_string_lossy().into_owned()
}

#[test]
fn zero_potential_exits_zero_with_zero_margins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potentials":[{"family":"zero"}],"psis":["abs","square",{"power":3}],"n_paths":2000,"n_steps":64}"#,
    );
    let out = out_arg(dir.path());
    let o = bl_verify(&["run", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    let mut rows = 0;
    for line in summary.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        for idx in [7, 9, 11] {
            let m: f64 = cols[idx].parse().unwrap();
            assert!(m.abs() < 1e-10, "{line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 9);
    for f in [
        "report.json",
        "ensemble.csv",
        "plotdata/margins.csv",
        "plotdata/transport_00_zero.csv",
    ] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn config_errors_exit_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    for body in [
        r#"{"potentials":[{"family":"zero"}],"psis":["abs"]"#,
        r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"p_list":[1.0]}"#,
        r#"{"potentials":[{"family":"zero"}],"psis":["abs"],"n_paths":0}"#,
        r#"{"potentials":[{"family":"cosh"}],"psis":["abs"]}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let o = bl_verify(&["run", "--config", &cfg, "--out", &out]);
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert!(!o.stderr.is_empty());
        assert!(!Path::new(&out).exists(), "partial outputs for {body}");
    }
    assert_eq!(bl_verify(&["run"]).status.code(), Some(2));
    assert_eq!(
        bl_verify(&["run", "--config", "/nonexistent/cfg.json"]).status.code(),
        Some(2)
    );
    assert_eq!(bl_verify(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_skips_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potentials":[{"family":"quadratic"}],"psis":["abs","square"]}"#,
    );
    let out = out_arg(dir.path());
    let o = bl_verify(&["verify", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let report = parse_report(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report.settings.n_paths, 0);
    assert!(report.entries.iter().all(|e| e.mc_crosscheck.is_none()));
    assert!(report.potentials.iter().all(|p| p.embedding.is_none()));
    assert!(!dir.path().join("out/ensemble.csv").exists());
}

#[test]
fn sandwich_on_abs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potentials":[{"family":"abs","params":{"c":1}}],"psis":["abs"],"sandwich_grid":[0,0.5,1,2]}"#,
    );
    let out = out_arg(dir.path());
    let o = bl_verify(&[
        "sandwich", "--config", &cfg, "--out", &out, "--paths", "5000", "--steps", "128",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = parse_report(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    let pts = &report.potentials[0].embedding.as_ref().unwrap().sandwich;
    assert_eq!(pts.len(), 4);
    for p in pts {
        assert!(p.pass());
        assert!(p.est1 <= p.gap.estimate + 3.0 * p.gap.std_error);
        assert_eq!(p.est2.len(), 3);
    }
    let plot = fs::read_to_string(dir.path().join("out/plotdata/sandwich_00_abs_1.csv")).unwrap();
    assert_eq!(plot.lines().count(), 5);
}

#[test]
fn embed_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"potentials":[{"family":"abs"},{"family":"double_well"}],"psis":["abs"],"n_paths":1000,"n_steps":64}"#,
    );
    let a = dir.path().join("a").to_string_lossy().into_owned();
    let b = dir.path().join("b").to_string_lossy().into_owned();
    for out in [&a, &b] {
        let o = bl_verify(&["embed", "--config", &cfg, "--seed", "7", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &str, f: &str| fs::read(Path::new(d).join(f)).unwrap();
    assert_eq!(read(&a, "ensemble.csv"), read(&b, "ensemble.csv"));
    assert_eq!(
        read(&a, "ensembles/01_double_well.csv"),
        read(&b, "ensembles/01_double_well.csv")
    );
    assert_eq!(read(&a, "report.json"), read(&b, "report.json"));
    let report = parse_report(&String::from_utf8(read(&a, "report.json")).unwrap()).unwrap();
    assert_eq!(report.settings.seed, 7);
    assert!(report.entries.is_empty());
}

#[test]
fn default_matrix_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = bl_verify(&["verify", "--matrix", "default", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count() - 1, 6 * 5 * 3);
}

#[test]
fn appendix_needs_slope_maps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"potentials":[{"family":"abs"}],"psis":["abs"]}"#);
    let out = out_arg(dir.path());
    assert_eq!(
        bl_verify(&["appendix", "--config", &cfg, "--out", &out]).status.code(),
        Some(2)
    );
    let o = bl_verify(&["appendix", "--matrix", "default", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let report = parse_report(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(report.entries.len(), 2 * 5);
    assert!(report.entries.iter().all(|e| e.appendix.is_some()));
}
