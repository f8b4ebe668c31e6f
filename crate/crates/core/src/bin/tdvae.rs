use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use torus_vae::harness::{self, CodeSource, ExperimentConfig};
use torus_vae::{Error, Result};

#[derive(Parser)]
#[command(name = "tdvae", about = "Torus-latent VAE experiments")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and parallel stages.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the dataset file and its factor sidecar.
    Generate,
    /// Train and write the best checkpoint plus history.
    Train,
    /// Score a checkpoint with the DCI metrics and export heatmaps.
    Evaluate {
        /// Use the ground-truth factors as codes instead of a model.
        #[arg(long)]
        identity: bool,
    },
    /// Train and score one model per (beta, D) grid cell.
    Sweep,
    /// Decode a sweep of one circle's angle to PPM images.
    Traverse,
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let config = ExperimentConfig::load(&path)?;
    let out = cli
        .out
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory (--out or output_dir)".into()))?;
    if cli.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    // a second initialization only fails if one already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global();
    std::fs::create_dir_all(&out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    match cli.command {
        Command::Generate => {
            let g = harness::cmd_generate(&config, &out)?;
            println!("{} records -> {}", g.records, g.dataset_path.display());
        }
        Command::Train => {
            let r = harness::cmd_train(&config, &out)?;
            println!("best epoch {} validation mse {:.6}", r.best_epoch, r.best_validation_mse);
        }
        Command::Evaluate { identity } => {
            let source = if identity { CodeSource::Identity } else { CodeSource::Model };
            let r = harness::cmd_evaluate(&config, &out, source)?;
            println!(
                "D {:.4} C {:.4} I {:.4} DC {:.4}",
                r.disentanglement, r.completeness, r.informativeness, r.dc_score
            );
        }
        Command::Sweep => {
            let rows = harness::cmd_sweep(&config, &out, cli.workers)?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            println!("{} cells, {failed} failed", rows.len());
        }
        Command::Traverse => {
            let paths = harness::cmd_traverse(&config, &out)?;
            println!("{} images", paths.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
