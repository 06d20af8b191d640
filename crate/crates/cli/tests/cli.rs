use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nearsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearsphere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// Column names and rows of a CSV file, skipping `#` header lines.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (cols, rows)
}

fn column(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap()
}

#[test]
fn apply_on_the_unit_sphere_returns_degree_times_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "a.toml",
        "command = \"apply\"\ndim = 3\nL = 6\n[h]\nkind = \"zero\"\n[psi]\nkind = \"mode\"\nl = 2\nm = 1\n",
    );
    let out = tmp.path().join("out");
    let o = nearsphere(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (cols, rows) = read_csv(&out.join("apply_coefficients.csv"));
    let (gi, pi) = (column(&cols, "g"), column(&cols, "psi"));
    for r in &rows {
        let g: f64 = r[gi].parse().unwrap();
        let psi: f64 = r[pi].parse().unwrap();
        assert!((g - 2.0 * psi).abs() < 1e-12, "{r:?}");
    }
    assert_eq!(rows.len(), 49);
}

#[test]
fn identical_configs_give_identical_files_with_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "t.toml",
        "dim = 2\nL = 8\nsamples = 4\ntame_derivative = false\n",
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = nearsphere(&["--config", &cfg, "--command", "tame", "--seed", "5", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["tame.csv", "tame.json", "tame_samples.csv", "tame_samples.json"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let csv = std::fs::read_to_string(a.join("tame.csv")).unwrap();
    let hash_line = csv.lines().nth(1).unwrap();
    assert!(hash_line.starts_with("# config_sha256 = "));
    let hash = hash_line.trim_start_matches("# config_sha256 = ");
    assert_eq!(hash.len(), 64);
    assert!(csv.lines().nth(2).unwrap().contains("\"seed\":5"));
    let js: Value = serde_json::from_str(&std::fs::read_to_string(a.join("tame.json")).unwrap()).unwrap();
    assert_eq!(js["config_sha256"], Value::String(hash.to_string()));
    assert_eq!(js["config"]["samples"], Value::from(4));
    let (_, rows) = read_csv(&a.join("tame.csv"));
    assert_eq!(js["rows"].as_array().unwrap().len(), rows.len());

    let c = tmp.path().join("c");
    let o = nearsphere(&["--config", &cfg, "--command", "tame", "--seed", "6", "--out", c.to_str().unwrap()]);
    assert!(o.status.success());
    let other = std::fs::read_to_string(c.join("tame.csv")).unwrap();
    assert_ne!(other.lines().nth(1), csv.lines().nth(1));
}

#[test]
fn derivative_check_error_ratios_are_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "d.toml", "command = \"derivative-check\"\ndim = 2\nL = 12\nsamples = 2\n");
    let out = tmp.path().join("out");
    let o = nearsphere(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (cols, rows) = read_csv(&out.join("derivative_check.csv"));
    let ri = column(&cols, "ratio");
    let ratios: Vec<f64> = rows.iter().filter(|r| !r[ri].is_empty()).map(|r| r[ri].parse().unwrap()).collect();
    assert_eq!(ratios.len(), 4);
    for q in ratios {
        assert!((30.0..=300.0).contains(&q), "ratio {q}");
    }
}

#[test]
fn configuration_errors_exit_with_status_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let unknown = write_config(tmp.path(), "u.toml", "command = \"apply\"\nbogus = 1\n");
    assert_eq!(nearsphere(&["--config", &unknown, "--out", out]).status.code(), Some(2));
    let dim = write_config(tmp.path(), "d.toml", "command = \"apply\"\ndim = 5\n");
    assert_eq!(nearsphere(&["--config", &dim, "--out", out]).status.code(), Some(2));
    assert_eq!(nearsphere(&["--out", out]).status.code(), Some(2));
    assert_eq!(nearsphere(&["--config", "/nonexistent/x.toml", "--out", out]).status.code(), Some(2));
    assert_eq!(nearsphere(&["--command", "nope", "--out", out]).status.code(), Some(2));
    let oracle = write_config(tmp.path(), "o.toml", "command = \"apply\"\noracle = \"translated_ball\"\n");
    assert_eq!(nearsphere(&["--config", &oracle, "--out", out]).status.code(), Some(2));
    assert!(!Path::new(out).exists());
}

#[test]
fn truncated_series_exits_with_status_three_and_keeps_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "m.toml",
        "command = \"apply\"\ndim = 2\nL = 12\nM = 1\n[h]\nkind = \"mode\"\nl = 1\nm = 1\nscale = 0.05\n",
    );
    let out = tmp.path().join("out");
    let o = nearsphere(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let (cols, rows) = read_csv(&out.join("apply_summary.csv"));
    let (q, v) = (column(&cols, "quantity"), column(&cols, "value"));
    let conv = rows.iter().find(|r| r[q] == "converged").unwrap();
    assert_eq!(conv[v], "false");
    assert!(out.join("apply_coefficients.json").exists());
}

#[test]
fn oracles_are_addressable_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("translated_ball", "[h]\nkind = \"translated\"\neps = 0.05\n", 1e-6),
        ("scaled_sphere", "[h]\nkind = \"constant\"\nvalue = 0.05\n", 1e-8),
        ("direct_galerkin", "[h]\nkind = \"mode\"\nl = 2\nm = 2\nscale = 0.03\n", 1e-8),
    ];
    for (name, h, tol) in cases {
        let cfg = write_config(
            tmp.path(),
            &format!("{name}.toml"),
            &format!("command = \"apply\"\ndim = 2\nL = 32\noracle = \"{name}\"\n{h}[psi]\nkind = \"mode\"\nl = 3\nm = -3\n"),
        );
        let out = tmp.path().join(name);
        let o = nearsphere(&["--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let (cols, rows) = read_csv(&out.join("apply_summary.csv"));
        let (q, v) = (column(&cols, "quantity"), column(&cols, "value"));
        let err: f64 = rows.iter().find(|r| r[q] == "oracle_relative_l2_error").unwrap()[v].parse().unwrap();
        assert!(err <= tol, "{name}: {err}");
    }
}

#[test]
fn radius_norms_and_witness_commands_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [(&str, &str, &[&str]); 3] = [
        ("radius", "dim = 2\nL = 16\n", &["radius_terms", "radius_summary", "radius_orders"]),
        (
            "norms",
            "dim = 2\nL = 8\nsamples = 4\n[atlas]\nx_samples = 1\nx_levels = [1]\n",
            &["norms_atlas", "norms_samples", "norms_summary", "x_seminorms"],
        ),
        ("witness", "samples = 2\n", &["witness"]),
    ];
    for (command, text, tables) in runs {
        let cfg = write_config(tmp.path(), &format!("{command}.toml"), text);
        let out = tmp.path().join(command);
        let o = nearsphere(&["--config", &cfg, "--command", command, "--threads", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{command}: {}", String::from_utf8_lossy(&o.stderr));
        for t in tables {
            let (_, rows) = read_csv(&out.join(format!("{t}.csv")));
            assert!(!rows.is_empty(), "{command}: {t} is empty");
            let js: Value = serde_json::from_str(&std::fs::read_to_string(out.join(format!("{t}.json"))).unwrap()).unwrap();
            assert_eq!(js["rows"].as_array().unwrap().len(), rows.len());
        }
    }
}
