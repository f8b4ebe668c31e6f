use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::write_atomic;
use crate::data::{encode_ppm, model_to_unit, save_dataset, split_indices, Dataset, FactorSpec, SampleShape};
use crate::error::{Error, Result};
use crate::geometry::AngleVector;
use crate::metrics::{center_angles, evaluate_dci, fmt_sig9, heatmap_export, CodeFactorTable, DciOutcome, DciReport};
use crate::vae::{load_checkpoint, save_checkpoint, train_with_progress, LatentMode, TrainConfig, TrainReport, TrainingData, Vae};

pub const DATASET_FILE: &str = "dataset.tdds";
pub const FACTORS_FILE: &str = "dataset_factors.json";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const DCI_REPORT_FILE: &str = "dci_report.json";
pub const IMPORTANCE_FILE: &str = "importance.csv";
pub const HEATMAP_DIR: &str = "heatmaps";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const TRAVERSE_DIR: &str = "traverse";

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push(b'\n');
    write_atomic(path, &text)
}

#[derive(Debug, Clone, Serialize)]
struct FactorSidecar<'a> {
    records: usize,
    shape: SampleShape,
    seed: u64,
    factors: &'a [FactorSpec],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOutput {
    pub dataset_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub records: usize,
}

/// Writes the configured dataset and a JSON description of its factors.
pub fn cmd_generate(config: &ExperimentConfig, out: &Path) -> Result<GenerateOutput> {
    let ds = config.dataset.generate()?;
    let dataset_path = out.join(DATASET_FILE);
    let sidecar_path = out.join(FACTORS_FILE);
    save_dataset(&dataset_path, &ds)?;
    write_json(
        &sidecar_path,
        &FactorSidecar {
            records: ds.len(),
            shape: ds.shape,
            seed: config.dataset.seed,
            factors: &ds.specs,
        },
    )?;
    log::info!("wrote {} records to {}", ds.len(), dataset_path.display());
    Ok(GenerateOutput {
        dataset_path,
        sidecar_path,
        records: ds.len(),
    })
}

/// Trains on the train split (samples only) of `ds`. The split is seeded by
/// the model seed.
pub fn train_on(model: &TrainConfig, ds: &Dataset) -> Result<TrainReport> {
    let split = split_indices(ds.len(), model.seed)?;
    let train = ds.model_inputs(&split.train);
    let validation = ds.model_inputs(&split.validation);
    train_with_progress(
        model,
        TrainingData {
            train: train.view(),
            validation: validation.view(),
        },
        |r| {
            log::info!(
                "epoch {:>3} loss {:.5} rec {:.5} kl {:.5} val_mse {:.6}",
                r.epoch,
                r.train_loss,
                r.train_reconstruction,
                r.train_kl,
                r.validation_mse
            )
        },
    )
}

/// Writes the best-validation checkpoint and the training history.
pub fn cmd_train(config: &ExperimentConfig, out: &Path) -> Result<TrainReport> {
    config.model.validate()?;
    let ds = config.dataset.obtain()?;
    let report = train_on(&config.model, &ds)?;
    save_checkpoint(&out.join(CHECKPOINT_FILE), &report.model, ds.shape)?;
    write_json(&out.join(TRAIN_REPORT_FILE), &report)?;
    Ok(report)
}

/// What to hand the metrics as codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeSource {
    /// Encode the evaluation split with the checkpointed model.
    Model,
    /// Use the ground-truth factors themselves (pipeline sanity check).
    Identity,
}

/// Codes and factors for the evaluation (validation) split. Torus angle
/// codes are centered on their circular means.
pub fn evaluation_table(model: &Vae, ds: &Dataset, split_seed: u64) -> Result<CodeFactorTable> {
    let split = split_indices(ds.len(), split_seed)?;
    let mut codes = model.codes(ds.model_inputs(&split.validation).view())?;
    if model.mode.is_torus() {
        codes = center_angles(codes.view());
    }
    CodeFactorTable::new(codes, ds.factor_rows(&split.validation))
}

fn checkpoint_path(config: &ExperimentConfig, out: &Path) -> PathBuf {
    config.checkpoint.clone().unwrap_or_else(|| out.join(CHECKPOINT_FILE))
}

fn load_compatible(config: &ExperimentConfig, out: &Path, ds: &Dataset) -> Result<Vae> {
    let (model, shape) = load_checkpoint(&checkpoint_path(config, out))?;
    if model.mode != config.model.latent {
        return Err(Error::Config(format!(
            "checkpoint latent {:?} does not match configured {:?}",
            model.mode, config.model.latent
        )));
    }
    if shape != ds.shape {
        return Err(Error::Config(format!(
            "checkpoint was trained on {shape:?} samples but dataset has {:?}",
            ds.shape
        )));
    }
    Ok(model)
}

fn write_dci(out: &Path, outcome: &DciOutcome, ds: &Dataset) -> Result<()> {
    let names: Vec<String> = ds.specs.iter().map(|s| s.name.clone()).collect();
    heatmap_export(&outcome.standardized, &outcome.importance, &names)?
        .write(&out.join(IMPORTANCE_FILE), &out.join(HEATMAP_DIR))?;
    write_json(&out.join(DCI_REPORT_FILE), &outcome.report)
}

/// DCI report, importance CSV and code/factor heatmaps for the evaluation split.
pub fn cmd_evaluate(config: &ExperimentConfig, out: &Path, source: CodeSource) -> Result<DciReport> {
    config.metrics.validate()?;
    let ds = config.dataset.obtain()?;
    let table = match source {
        CodeSource::Model => {
            let model = load_compatible(config, out, &ds)?;
            evaluation_table(&model, &ds, config.model.seed)?
        }
        CodeSource::Identity => {
            let split = split_indices(ds.len(), config.model.seed)?;
            let z = ds.factor_rows(&split.validation);
            CodeFactorTable::new(z.clone(), z)?
        }
    };
    let outcome = evaluate_dci(&table, &config.metrics)?;
    write_dci(out, &outcome, &ds)?;
    Ok(outcome.report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub circles: usize,
    pub dc_score: Option<f64>,
    pub disentanglement: Option<f64>,
    pub completeness: Option<f64>,
    pub informativeness: Option<f64>,
    pub validation_mse: Option<f64>,
    pub status: String,
}

fn sweep_cell(config: &ExperimentConfig, ds: &Dataset, beta: f64, circles: usize) -> Result<(TrainReport, DciReport)> {
    let model = TrainConfig {
        latent: LatentMode::Torus { circles },
        beta,
        ..config.model.clone()
    };
    let trained = train_on(&model, ds)?;
    let table = evaluation_table(&trained.model, ds, model.seed)?;
    let dci = evaluate_dci(&table, &config.metrics)?.report;
    Ok((trained, dci))
}

/// Trains and scores one torus model per `(β, D)` cell. Cells run on a pool
/// of `workers` threads; failures are recorded in the row's status.
pub fn run_sweep(config: &ExperimentConfig, ds: &Dataset, workers: usize) -> Result<Vec<SweepRow>> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("config has no sweep block".into()))?;
    sweep.validate()?;
    let cells: Vec<(f64, usize)> = sweep
        .betas
        .iter()
        .flat_map(|&b| sweep.circles.iter().map(move |&d| (b, d)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(beta, circles)| match sweep_cell(config, ds, beta, circles) {
                Ok((t, d)) => SweepRow {
                    beta,
                    circles,
                    dc_score: Some(d.dc_score),
                    disentanglement: Some(d.disentanglement),
                    completeness: Some(d.completeness),
                    informativeness: Some(d.informativeness),
                    validation_mse: Some(t.best_validation_mse),
                    status: "ok".into(),
                },
                Err(e) => {
                    log::error!("sweep cell beta={beta} D={circles} failed: {e}");
                    SweepRow {
                        beta,
                        circles,
                        dc_score: None,
                        disentanglement: None,
                        completeness: None,
                        informativeness: None,
                        validation_mse: None,
                        status: format!("error: {e}"),
                    }
                }
            })
            .collect()
    });
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record([
        "beta",
        "circles",
        "dc_score",
        "disentanglement",
        "completeness",
        "informativeness",
        "validation_mse",
        "status",
    ])
    .map_err(err)?;
    let cell = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt_sig9(r.beta),
            r.circles.to_string(),
            cell(r.dc_score),
            cell(r.disentanglement),
            cell(r.completeness),
            cell(r.informativeness),
            cell(r.validation_mse),
            r.status.clone(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `sweep.csv` with one row per `(β, D)` cell in grid order.
pub fn cmd_sweep(config: &ExperimentConfig, out: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let ds = config.dataset.obtain()?;
    let rows = run_sweep(config, &ds, workers)?;
    write_atomic(&out.join(SWEEP_FILE), sweep_csv(&rows)?.as_bytes())?;
    Ok(rows)
}

/// Decoded images for `steps` angles of circle `circle` evenly covering
/// `[0, 2π)`, other circles held at `anchor`.
pub fn traverse_images(model: &Vae, circle: usize, steps: usize, anchor: &[f64]) -> Result<Vec<Vec<f32>>> {
    let LatentMode::Torus { circles } = model.mode else {
        return Err(Error::Config("traverse needs a torus-mode checkpoint".into()));
    };
    if circle >= circles {
        return Err(Error::Config(format!("circle {circle} out of range for D = {circles}")));
    }
    if anchor.len() != circles {
        return Err(Error::Shape {
            context: "traverse anchor",
            expected: circles,
            got: anchor.len(),
        });
    }
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    (0..steps)
        .map(|s| {
            let mut angles = anchor.to_vec();
            angles[circle] = TAU * s as f64 / steps as f64;
            let x = model.generate(&AngleVector::new(angles)?)?;
            Ok(x.into_iter().map(model_to_unit).collect())
        })
        .collect()
}

/// `traverse/step_XXX.ppm`, one per step.
pub fn cmd_traverse(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let t = config
        .traverse
        .as_ref()
        .ok_or_else(|| Error::Config("config has no traverse block".into()))?;
    let (model, shape) = load_checkpoint(&checkpoint_path(config, out))?;
    let anchor = t.anchor.clone().unwrap_or_else(|| vec![0.0; model.mode.code_dim()]);
    let images = traverse_images(&model, t.circle, t.steps, &anchor)?;
    let dir = out.join(TRAVERSE_DIR);
    let mut paths = Vec::with_capacity(images.len());
    for (s, img) in images.iter().enumerate() {
        let path = dir.join(format!("step_{s:03}.ppm"));
        write_atomic(&path, &encode_ppm(shape, img)?)?;
        paths.push(path);
    }
    Ok(paths)
}
