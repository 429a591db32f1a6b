use std::path::{Path, PathBuf};
use std::process::Command;

use gs_operators_cli::output::read_csv;
use gs_operators_cli::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gs-operators"))
}

fn repo_configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn status(cmd: &mut Command) -> i32 {
    let out = cmd.env_remove("GS_OUT_DIR").output().unwrap();
    out.status.code().unwrap()
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    let mut count = 0;
    for entry in std::fs::read_dir(repo_configs()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn eval_writes_hashed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nn = [40]\nm = [1]\nc = [0, 1]\nalpha = [2.5]\nx = [0.5]\nfunctions = [\"one\"]\n",
    );
    let out = dir.path().join("out");
    assert_eq!(status(bin().args(["eval", "--config"]).arg(&cfg).arg("--out").arg(&out)), 0);
    let csv = read_csv(&out.join("eval.csv")).unwrap();
    let (hash, header, rows) = (csv.hash, csv.header, csv.rows);
    assert_eq!(hash, ExperimentConfig::load(&cfg).unwrap().hash());
    assert_eq!(rows.len(), 2);
    let i = header.iter().position(|h| h == "bezier_value").unwrap();
    for r in rows {
        assert!((r[i].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn env_overrides_config_dir_and_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");
    let ok = bin().arg("catalogue").env("GS_OUT_DIR", &env_dir).output().unwrap();
    assert!(ok.status.success());
    assert!(env_dir.join("catalogue.csv").exists());
    let ok = bin().arg("catalogue").arg("--out").arg(&flag_dir).env("GS_OUT_DIR", &env_dir).output().unwrap();
    assert!(ok.status.success());
    assert!(flag_dir.join("catalogue.csv").exists());
}

#[test]
fn moments_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nn = [30, 90]\nm = [0, 2]\nc = [-1, 1]\nx = [0.3, 0.8]\n");
    assert_eq!(status(bin().arg("moments").arg("--config").arg(&cfg).arg("--out").arg(dir.path())), 0);
    let csv = read_csv(&dir.path().join("moments.csv")).unwrap();
    let (_, header, rows) = (csv.hash, csv.header, csv.rows);
    let idx = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        let (kind, order) = (r[idx("kind")].as_str(), r[idx("order")].as_str());
        let closed: f64 = r[idx("closed_form")].parse().unwrap();
        let quad: f64 = r[idx("quadrature")].parse().unwrap();
        match (kind, order) {
            ("raw", "0") => assert_eq!(closed, 1.0),
            ("raw", "1") => assert!((quad - closed).abs() < 1e-8),
            ("central", "2") => {
                let n: f64 = r[idx("n")].parse().unwrap();
                let m: f64 = r[idx("m")].parse().unwrap();
                let c: f64 = r[idx("c")].parse().unwrap();
                let x: f64 = r[idx("x")].parse().unwrap();
                assert!((closed - 2.0 * x * (1.0 + c * x) / (n + (m - 1.0) * c)).abs() < 1e-15);
            }
            _ => {}
        }
    }
}

#[test]
fn empty_function_list_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[grid]\nfunctions = []\n");
    assert_eq!(status(bin().arg("verify").arg("--config").arg(&cfg).arg("--out").arg(dir.path())), 0);
    let csv = read_csv(&dir.path().join("verify.csv")).unwrap();
    let (_, header, rows) = (csv.hash, csv.header, csv.rows);
    assert!(rows.is_empty());
    assert_eq!(header[0], "theorem");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write_config(dir.path(), "[grid]\nn = \"ten\"\n");
    assert_eq!(status(bin().arg("eval").arg("--config").arg(&bad).arg("--out").arg(&out)), 2);
    assert_eq!(status(bin().args(["eval", "--tolerance-scale", "-1"]).arg("--out").arg(&out)), 2);
    let truncation = write_config(
        dir.path(),
        "[grid]\nn = [400]\nx = [5.0]\n[truncation]\nepsilon_tail = 1e-12\nk_max = 3\n",
    );
    assert_eq!(status(bin().arg("eval").arg("--config").arg(&truncation).arg("--out").arg(&out)), 3);
    let tight = write_config(
        dir.path(),
        "[grid]\nn = [50]\nalpha = [2.0]\nx = [1.0]\nfunctions = [\"e2\"]\n\
         [verify]\ntheorems = [\"weighted\"]\n[verify.bounds]\nweighted_constant = 1e-6\n",
    );
    assert_eq!(status(bin().arg("verify").arg("--config").arg(&tight).arg("--out").arg(&out)), 4);
}

#[test]
fn order_plot_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[grid]\nx = [0.5, 1.0, 2.0]\nfunctions = [\"e2\"]\n[order]\nn = [50, 100, 400, 1600, 6400]\n",
    );
    assert_eq!(status(bin().arg("order").arg("--config").arg(&cfg).arg("--out").arg(dir.path())), 0);
    let text = std::fs::read_to_string(dir.path().join("order_plot.dat")).unwrap();
    let data = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data, 5 * 3);
    assert!(text.starts_with("# config-hash: "));
}
