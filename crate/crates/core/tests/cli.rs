mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn tiny_config(out: &Path) -> Value {
    json!({
        "dataset": {"kind": "synthetic", "size": 300, "seed": 7, "factors": 3},
        "model": {
            "latent": {"torus": {"circles": 2}},
            "beta": 1.0,
            "seed": 3,
            "epochs": 2,
            "batch_size": 32,
            "learning_rate": 0.003,
            "encoder_hidden": [16],
            "decoder_hidden": [16]
        },
        "metrics": {"split_seed": 5},
        "sweep": {"betas": [0.0, 1.0], "circles": [2, 3]},
        "traverse": {"circle": 1, "steps": 6},
        "output_dir": out
    })
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    p
}

fn tdvae(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_tdvae")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_ok(config: &Path, out: &Path, cmd: &[&str]) -> String {
    let mut args = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(cmd);
    let (code, stdout, stderr) = tdvae(&args);
    assert_eq!(code, 0, "{cmd:?} failed: {stderr}");
    stdout
}

#[test]
fn generate_writes_golden_header_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    run_ok(&cfg, &out, &["generate"]);
    let bytes = std::fs::read(out.join("dataset.tdds")).unwrap();
    let mut header = b"TDDS1".to_vec();
    header.extend_from_slice(&300u64.to_le_bytes());
    for v in [16u32, 1, 1, 3] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    assert_eq!(&bytes[..header.len()], &header[..]);
    let ds = torus_vae::data::load_dataset(&out.join("dataset.tdds")).unwrap();
    assert_eq!(ds.len(), 300);
    let sidecar: Value = serde_json::from_slice(&std::fs::read(out.join("dataset_factors.json")).unwrap()).unwrap();
    assert_eq!(sidecar["records"], 300);
    assert_eq!(sidecar["factors"].as_array().unwrap().len(), 3);
    assert_eq!(sidecar["factors"][0]["kind"]["type"], "angle");

    let before = common::tree_hashes(&out);
    run_ok(&cfg, &out, &["generate"]);
    assert_eq!(common::tree_hashes(&out), before);
}

#[test]
fn train_evaluate_traverse_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &tiny_config(&out));
    run_ok(&cfg, &out, &["train"]);
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("train_report.json")).unwrap()).unwrap();
    assert_eq!(report["epochs"].as_array().unwrap().len(), 2);
    assert!(report["best_epoch"].as_u64().unwrap() >= 1);

    run_ok(&cfg, &out, &["evaluate"]);
    let dci: Value = serde_json::from_slice(&std::fs::read(out.join("dci_report.json")).unwrap()).unwrap();
    let (d, c, dc) = (
        dci["disentanglement"].as_f64().unwrap(),
        dci["completeness"].as_f64().unwrap(),
        dci["dc_score"].as_f64().unwrap(),
    );
    assert!((dc - (d * c).sqrt()).abs() < 1e-12);
    for key in ["per_code_disentanglement", "rho"] {
        assert_eq!(dci[key].as_array().unwrap().len(), 2);
    }
    assert_eq!(dci["per_factor_completeness"].as_array().unwrap().len(), 3);
    let report: torus_vae::metrics::DciReport = serde_json::from_value(dci).unwrap();
    report.check().unwrap();
    let heatmaps = std::fs::read_dir(out.join("heatmaps")).unwrap().count();
    assert_eq!(heatmaps, 2 * 3);
    let importance = std::fs::read_to_string(out.join("importance.csv")).unwrap();
    assert_eq!(importance.lines().next().unwrap(), "code,angle_0,angle_1,angle_2");
    assert_eq!(importance.lines().count(), 3);

    run_ok(&cfg, &out, &["traverse"]);
    let mut steps: Vec<_> = std::fs::read_dir(out.join("traverse"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    steps.sort();
    assert_eq!(steps.len(), 6);
    assert_eq!(steps[0], "step_000.ppm");
    let ppm = std::fs::read(out.join("traverse/step_000.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n16 1\n255\n"));
    assert_eq!(ppm.len(), b"P6\n16 1\n255\n".len() + 16 * 3);
}

#[test]
fn identity_evaluation_is_near_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = tiny_config(&out);
    cfg["dataset"]["size"] = json!(2000);
    let cfg = write_config(tmp.path(), &cfg);
    run_ok(&cfg, &out, &["evaluate", "--identity"]);
    let dci: Value = serde_json::from_slice(&std::fs::read(out.join("dci_report.json")).unwrap()).unwrap();
    assert!(dci["disentanglement"].as_f64().unwrap() > 0.95);
    assert!(dci["completeness"].as_f64().unwrap() > 0.95);
    assert!(dci["informativeness"].as_f64().unwrap() < 0.01);
}

#[test]
fn sweep_has_one_row_per_cell_independent_of_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut cfg = tiny_config(&a);
    cfg["model"]["epochs"] = json!(1);
    let cfg = write_config(tmp.path(), &cfg);
    run_ok(&cfg, &a, &["--workers", "1", "sweep"]);
    run_ok(&cfg, &b, &["--workers", "3", "sweep"]);
    let text = std::fs::read_to_string(a.join("sweep.csv")).unwrap();
    assert_eq!(text, std::fs::read_to_string(b.join("sweep.csv")).unwrap());
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 2);
    let cells: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    assert_eq!(cells, [("0", "2"), ("0", "3"), ("1", "2"), ("1", "3")].map(|(x, y)| (x.into(), y.into())));
    assert!(rows.iter().all(|r| &r[7] == "ok"));
}

#[test]
fn sweep_records_failed_cells_and_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut cfg = tiny_config(&out);
    cfg["model"]["epochs"] = json!(1);
    // 13 circles exceeds the supported range; that cell fails alone
    cfg["sweep"] = json!({"betas": [1.0], "circles": [2, 13]});
    let cfg = write_config(tmp.path(), &cfg);
    run_ok(&cfg, &out, &["sweep"]);
    let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",ok"));
    assert!(rows[1].contains("error"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    // missing seed: validation error
    let mut cfg = tiny_config(&out);
    cfg["model"].as_object_mut().unwrap().remove("seed");
    let p = write_config(tmp.path(), &cfg);
    let (code, _, err) = tdvae(&["--config", p.to_str().unwrap(), "train"]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("seed"), "{err}");

    // malformed JSON and unknown subcommand
    std::fs::write(&p, "{not json").unwrap();
    assert_eq!(tdvae(&["--config", p.to_str().unwrap(), "train"]).0, 1);
    assert_eq!(tdvae(&["frobnicate"]).0, 1);
    assert_eq!(tdvae(&["train"]).0, 1);

    // dataset file that does not exist: runtime failure with the path
    let mut cfg = tiny_config(&out);
    cfg["dataset"]["path"] = json!(tmp.path().join("missing.tdds"));
    let p = write_config(tmp.path(), &cfg);
    let (code, _, err) = tdvae(&["--config", p.to_str().unwrap(), "train"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("missing.tdds"), "{err}");

    // checkpoint trained in torus mode, config says euclidean
    let cfg = tiny_config(&out);
    let p = write_config(tmp.path(), &cfg);
    run_ok(&p, &out, &["train"]);
    let mut cfg = tiny_config(&out);
    cfg["model"]["latent"] = json!({"euclidean": {"dim": 4}});
    let p = write_config(tmp.path(), &cfg);
    let (code, _, err) = tdvae(&["--config", p.to_str().unwrap(), "evaluate"]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("does not match"), "{err}");

    // traverse on a euclidean checkpoint
    run_ok(&p, &out, &["train"]);
    assert_eq!(tdvae(&["--config", p.to_str().unwrap(), "traverse"]).0, 1);
}
