//! Subcommand implementations plus the shared one-seed runner.

pub mod ablate;
pub mod evaluate;
pub mod gen_synth;
pub mod gradcheck;
pub mod roc;
pub mod train;

use serde::Serialize;

use daf_core::data::{gen_synthetic, load_dataset, CollateOptions, ModalitySet, Splits};
use daf_core::metrics::{full_report, MetricsReport};
use daf_core::model::{init_params, ModelConfig, ParamSet};
use daf_core::train::{evaluate, fit, EpochStats, TrainConfig};
use daf_core::{DafError, Result};

use crate::run_config::{apply_missing_policy, DataSource, RunConfig};

/// Everything one (config, seed) training run produces.
pub struct SeedOutcome {
    pub seed: u64,
    pub model_config: ModelConfig,
    pub model_modalities: ModalitySet,
    pub params: ParamSet,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stopped_early: bool,
    pub history: Vec<EpochStats>,
    pub metrics: MetricsReport,
}

/// The serializable slice of a [`SeedOutcome`] that goes into run
/// records.
#[derive(Serialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stopped_early: bool,
    pub metrics: MetricsReport,
    pub history: Vec<EpochStats>,
}

impl From<&SeedOutcome> for SeedRecord {
    fn from(o: &SeedOutcome) -> Self {
        SeedRecord {
            seed: o.seed,
            best_epoch: o.best_epoch,
            best_val_mse: o.best_val_mse,
            stopped_early: o.stopped_early,
            metrics: o.metrics.clone(),
            history: o.history.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct RunRecord<'a> {
    pub format_version: u32,
    pub config: &'a RunConfig,
    pub seeds: Vec<SeedRecord>,
    pub wall_clock_secs: f64,
}

/// Load the configured dataset, generating it when synthetic. A
/// loaded manifest's feature widths are adopted into the model config
/// — input widths are a property of the data, not a free knob.
pub fn load_or_generate(rc: &mut RunConfig) -> Result<Splits> {
    match &rc.data {
        DataSource::Path(path) => {
            let loaded = load_dataset(std::path::Path::new(path))?;
            let dropped = loaded.total_dropped();
            if dropped > 0 {
                eprintln!("note: dropped {dropped} records with missing modalities");
            }
            let dims = loaded.manifest.dims;
            let configured = (rc.model.d_text, rc.model.d_audio, rc.model.d_video);
            if configured != (dims.text, dims.audio, dims.video) {
                eprintln!(
                    "note: adopting manifest feature widths {}/{}/{} (config had {}/{}/{})",
                    dims.text, dims.audio, dims.video, configured.0, configured.1, configured.2
                );
                rc.model.d_text = dims.text;
                rc.model.d_audio = dims.audio;
                rc.model.d_video = dims.video;
            }
            Ok(loaded.splits)
        }
        DataSource::Synthetic(spec) => Ok(gen_synthetic(spec)?.splits),
    }
}

/// Train one seed end to end: apply the missing-modality policy, fit
/// on train/val, evaluate the test split, and assemble the report.
pub fn run_seed(rc: &RunConfig, splits: &Splits, seed: u64) -> Result<SeedOutcome> {
    let (train_s, model_mods) = apply_missing_policy(&splits.train, rc)?;
    let (val_s, _) = apply_missing_policy(&splits.val, rc)?;
    let (test_s, _) = apply_missing_policy(&splits.test, rc)?;
    if test_s.is_empty() {
        return Err(DafError::Data("test split is empty".to_string()));
    }

    let model_config = ModelConfig {
        seed,
        gate_kind: rc.fusion,
        ..rc.model.clone()
    };
    let train_config = TrainConfig {
        seed,
        ..rc.train.clone()
    };
    let collate_opts = CollateOptions {
        l2_normalize: rc.l2_norm,
        modalities: model_mods,
    };

    let params = init_params(&model_config, model_mods)?;
    let fit_result = fit(
        &model_config,
        &collate_opts,
        params,
        &train_s,
        &val_s,
        &train_config,
    )?;
    let predictions = evaluate(
        &fit_result.params,
        &model_config,
        &collate_opts,
        &test_s,
        train_config.batch_size,
    )?;
    let metrics = full_report(&predictions)?;

    Ok(SeedOutcome {
        seed,
        model_config,
        model_modalities: model_mods,
        params: fit_result.params,
        best_epoch: fit_result.best_epoch,
        best_val_mse: fit_result.best_val_mse,
        stopped_early: fit_result.stopped_early,
        history: fit_result.history,
        metrics,
    })
}

/// `mean ± std` over seeds (sample std), or the bare value for a
/// single seed.
pub fn mean_std_cell(values: &[f64], decimals: usize) -> String {
    match values.len() {
        0 => "n/a".to_string(),
        1 => format!("{:.*}", decimals, values[0]),
        n => {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            format!("{:.*} ± {:.*}", decimals, mean, decimals, var.sqrt())
        }
    }
}
