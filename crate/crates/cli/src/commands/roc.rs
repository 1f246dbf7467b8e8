//! `daf roc`: score a split, sweep the ROC curve, and emit CSV + SVG.

use std::fs;

use daf_core::data::{load_dataset, CollateOptions};
use daf_core::metrics::{roc_auc, roc_csv, roc_svg};
use daf_core::model::load_checkpoint;
use daf_core::train::evaluate;
use daf_core::{DafError, Result};

use crate::args::RocArgs;

pub fn run(args: &RocArgs) -> Result<()> {
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
    let y_hat: Vec<f64> = preds.iter().map(|p| p.y_hat).collect();
    let y: Vec<f64> = preds.iter().map(|p| p.y).collect();

    let (auc, points) = roc_auc(&y_hat, &y).map_err(|e| match e {
        DafError::UndefinedMetric(msg) => {
            let neutral = y.iter().filter(|&&l| l == 0.0).count();
            let pos = y.iter().filter(|&&l| l > 0.0).count();
            let neg = y.len() - neutral - pos;
            DafError::UndefinedMetric(format!(
                "{msg} ({} samples: {pos} positive, {neg} negative, {neutral} neutral excluded)",
                y.len()
            ))
        }
        other => other,
    })?;

    fs::create_dir_all(&args.out)?;
    let meta = serde_json::json!({
        "checkpoint": args.checkpoint.display().to_string(),
        "split": args.split,
        "l2_norm": l2,
        "n": preds.len(),
    })
    .to_string();
    fs::write(args.out.join("roc.csv"), roc_csv(&points, &meta))?;
    fs::write(args.out.join("roc.svg"), roc_svg(&points, auc, &meta))?;
    println!("AUC = {auc:.6} over {} thresholds", points.len());
    eprintln!("wrote {}/roc.csv and roc.svg", args.out.display());
    Ok(())
}
