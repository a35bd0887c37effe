use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use arcbilliard::cli::COMPLETION_MARKER;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcbilliard"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn assert_complete(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        assert!(!name.ends_with(".partial"), "leftover {name}");
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().last(), Some(COMPLETION_MARKER), "{name}");
    }
}

const SPLIT_GEOMETRY: [&str; 4] = ["--set", "geometry.alpha_deg=115", "--set", "geometry.separation_cm=32.5"];

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = run(dir.path(), &["orbits", "--set", "geometry.colour=red"]);
    assert_eq!(unknown.status.code(), Some(2));
    let invalid = run(dir.path(), &["orbits", "--set", "geometry.alpha_deg=200"]);
    assert_eq!(invalid.status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[geometry]\nradius_cm = -1\n").unwrap();
    let file = run(dir.path(), &["--config", cfg.to_str().unwrap(), "orbits"]);
    assert_eq!(file.status.code(), Some(2));
    let workers = run(dir.path(), &["--workers", "0", "orbits"]);
    assert_eq!(workers.status.code(), Some(2));
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("PASS").count(), 3, "{stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn orbits_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let mut args = vec!["orbits"];
    args.extend(SPLIT_GEOMETRY);
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    let first = fs::read_to_string(a.path().join("orbits.csv")).unwrap();
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    let text = fs::read_to_string(a.path().join("orbits.csv")).unwrap();
    assert!(first == text, "orbit catalogue differs between runs");
    assert!(text.starts_with("# command = orbits\n"));
    assert!(text.contains("# geometry.alpha_deg = 115\n"));
    let rows = data_lines(&text);
    let ratio = |row: &str| row.split(',').nth(2).unwrap().parse::<f64>().unwrap();
    // Diffractive orbit |O - tip| * 2 / R and horizontal orbit 2D/R.
    let leg = ((32.5f64 - 30.5 + 30.5 * 57.5f64.to_radians().cos()).hypot(30.5 * 57.5f64.to_radians().sin())) / 30.5;
    assert!(rows[1].starts_with("diffractive,"));
    assert!((ratio(rows[1]) - 2.0 * leg).abs() < 1e-6);
    assert!(rows[2].starts_with("geometric,"));
    assert!((ratio(rows[2]) - 65.0 / 30.5).abs() < 1e-6);
    assert_complete(a.path());
}

#[test]
fn small_distance_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "sweep-dist",
            "--set",
            "sweep.d_min_cm=31",
            "--set",
            "sweep.d_max_cm=32",
            "--set",
            "sweep.samples=3",
            "--workers",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("sweep_dist.csv")).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let tsq: Vec<f64> = row.split(',').filter_map(|v| v.parse().ok()).collect();
        assert!(tsq.iter().all(|v| v.is_finite()));
    }
    assert_complete(dir.path());
}
