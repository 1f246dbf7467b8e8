//! `daf evaluate`: score a checkpoint on one split and report every
//! metric.

use std::fs;

use daf_core::data::{load_dataset, CollateOptions};
use daf_core::metrics::{full_report, markdown_row, report_json, TABLE_HEADER, TABLE_SEPARATOR};
use daf_core::model::load_checkpoint;
use daf_core::train::evaluate;
use daf_core::{DafError, Result};

use crate::args::EvaluateArgs;

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let loaded = load_dataset(&args.data)?;
    let samples = loaded
        .splits
        .get(&args.split)
        .ok_or_else(|| DafError::Config(format!("unknown split `{}`", args.split)))?;
    if samples.is_empty() {
        return Err(DafError::Data(format!("split `{}` is empty", args.split)));
    }
    let l2 = match args.l2_norm.as_deref() {
        None | Some("on") => true,
        Some("off") => false,
        Some(other) => {
            return Err(DafError::Config(format!(
                "--l2-norm `{other}`: expected on/off"
            )))
        }
    };
    let opts = CollateOptions {
        l2_normalize: l2,
        modalities: ckpt.modalities,
    };
    let preds = evaluate(&ckpt.params, &ckpt.config, &opts, samples, 32)?;
    let report = full_report(&preds)?;

    println!("{TABLE_HEADER}");
    println!("{TABLE_SEPARATOR}");
    println!(
        "{}",
        markdown_row(
            ckpt.modalities.label(),
            ckpt.modalities.embedding_label(),
            &report
        )
    );
    eprintln!(
        "split `{}`: {} samples, {} neutral excluded, cc {}, auc {}",
        args.split,
        report.n_total,
        report.n_neutral_excluded,
        report
            .cc
            .map_or("n/a".to_string(), |v| format!("{v:.4}")),
        report
            .auc
            .map_or("n/a".to_string(), |v| format!("{v:.4}")),
    );
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("report.json"), report_json(&report)?)?;
        eprintln!("report written to {}", out.join("report.json").display());
    }
    Ok(())
}
