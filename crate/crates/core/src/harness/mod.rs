//! Experiment harness: JSON configs and the generate/train/evaluate/sweep/traverse commands.

mod commands;
mod config;

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

pub use commands::{
    cmd_evaluate, cmd_generate, cmd_sweep, cmd_train, cmd_traverse, evaluation_table, run_sweep, sweep_csv,
    train_on, traverse_images, CodeSource, GenerateOutput, SweepRow, CHECKPOINT_FILE, DATASET_FILE,
    DCI_REPORT_FILE, FACTORS_FILE, HEATMAP_DIR, IMPORTANCE_FILE, SWEEP_FILE, TRAIN_REPORT_FILE, TRAVERSE_DIR,
};
pub use config::{DatasetConfig, DatasetKind, ExperimentConfig, SweepConfig, TraverseConfig};

use crate::error::{Error, Result};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to a sibling temp file, syncs it, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}-{}.tmp",
        name.to_string_lossy(),
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
