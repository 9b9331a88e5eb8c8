use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dickman(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dickman"))
        .args(args)
        .current_dir(dir)
        .env_remove("DICKMAN_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn classify_iterated_log_example() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "mu = {c = 1, a = [0, 1]}\np = {c = 1, b = [1, 1]}\n");
    let out = dickman(tmp.path(), &["classify", "--config", "c.toml", "--out", "runs"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("runs/classify-0/verdict.json")).unwrap()).unwrap();
    assert_eq!(record["kind"], "Dickman");
    assert_eq!(record["theta"], 1.0);
    assert_eq!(record["L"], 1.0);
    assert_eq!(record["exact"]["theta"], "1");
}

#[test]
fn density_row_at_two() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "d.toml", "theta = 1\nx_max = 3\n");
    let out = dickman(tmp.path(), &["density", "--config", "d.toml", "--out", "runs"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("runs/density-0/density.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,rho,density,cdf"));
    let row: Vec<f64> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect::<Vec<f64>>())
        .find(|r| r[0] == 2.0)
        .expect("row at x = 2");
    assert!((row[1] - 0.3068528).abs() < 1e-7);
}

#[test]
fn missing_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "s.toml", "n_grid = [10, 100]\n[model]\nmodel = \"truncated_poisson\"\ntheta0 = 2\n");
    let out = dickman(tmp.path(), &["simulate", "--config", "s.toml", "--out", "runs"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicates"));
    assert!(!tmp.path().join("runs/simulate-0").exists());
}

#[test]
fn unknown_keys_are_all_listed() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "s.toml",
        "n_grid = [10]\nreplicates = 100\nspeed = 3\n[model]\nmodel = \"subset_uniform\"\nscheme = {variant = \"top\", n = 2}\n",
    );
    let out = dickman(tmp.path(), &["simulate", "--config", "s.toml", "--out", "runs"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("speed") && err.contains("model.scheme.n"), "{err}");
}

#[test]
fn capability_errors_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "c.toml", "scheme = {variant = \"custom\", sets = [[], [1]]}\n");
    let out = dickman(tmp.path(), &["classify", "--config", "c.toml", "--out", "runs"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn collisions_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "sm.toml", "N = 10000\ns = [2, 2.5]\n");
    let args = ["smooth", "--config", "sm.toml", "--out", "runs", "--seed", "5"];
    assert_eq!(dickman(tmp.path(), &args).status.code(), Some(0));
    let before = fs::read(tmp.path().join("runs/smooth-5/smooth.csv")).unwrap();
    assert_eq!(dickman(tmp.path(), &args).status.code(), Some(1));
    assert_eq!(fs::read(tmp.path().join("runs/smooth-5/smooth.csv")).unwrap(), before);
}

#[test]
fn output_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "d.toml", "theta = 0.5\nx_max = 2\npoints_per_unit = 4\n");
    let out = Command::new(env!("CARGO_BIN_EXE_dickman"))
        .args(["density", "--config", "d.toml"])
        .current_dir(tmp.path())
        .env("DICKMAN_OUT", "elsewhere")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("elsewhere/density-0/density.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "inv.toml",
        "n = 500\nreplicates = 200\nseed = 42\nscheme = {variant = \"ratio\", ratios = [0.25, 1]}\n",
    );
    assert_eq!(dickman(tmp.path(), &["inversions", "--config", "inv.toml", "--out", "a"]).status.code(), Some(0));
    let out = dickman(tmp.path(), &["inversions", "--config", "a/inversions-42/manifest.json", "--out", "b", "--threads", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["inversions.csv", "summary.csv"] {
        let a = fs::read(tmp.path().join("a/inversions-42").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b/inversions-42").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("b/inversions-42/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 42);
    assert_eq!(manifest["subcommand"], "inversions");
}

#[test]
fn manifest_of_another_subcommand_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "d.toml", "theta = 1\nx_max = 2\n");
    assert_eq!(dickman(tmp.path(), &["density", "--config", "d.toml", "--out", "a"]).status.code(), Some(0));
    let out = dickman(tmp.path(), &["smooth", "--config", "a/density-0/manifest.json", "--out", "a"]);
    assert_eq!(out.status.code(), Some(2));
}
