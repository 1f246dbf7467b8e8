//! `daf gradcheck`: compare tape gradients of the full model (every
//! fusion variant) against central finite differences on tiny random
//! batches. Dropout is forcibly disabled; the function under test must
//! be deterministic.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use daf_core::data::{collate, CollateOptions, ModalitySet, Utterance};
use daf_core::model::{
    forward_batch, init_params, EncoderKind, FusionKind, Mode, ModelConfig, ParamVars,
};
use daf_core::tensor::{GradCheck, Tensor};
use daf_core::train::mse_loss;
use daf_core::{DafError, Result};

use crate::args::GradcheckArgs;

pub fn run(args: &GradcheckArgs) -> Result<()> {
    let fusions: Vec<FusionKind> = if args.fusion == "all" {
        FusionKind::ALL.to_vec()
    } else {
        args.fusion
            .split(',')
            .map(|f| f.trim().parse())
            .collect::<Result<_>>()?
    };
    let encoder: EncoderKind = args.encoder.parse()?;
    let elements = if args.exhaustive || args.elements_per_param == 0 {
        None
    } else {
        Some(args.elements_per_param)
    };

    // worst relative error per parameter name, across all runs
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures: Vec<String> = Vec::new();
    let started = std::time::Instant::now();

    for &fusion in &fusions {
        for &seed in &args.seeds {
            for &seq_len in &args.seq_lens {
                let cfg = ModelConfig {
                    gate_kind: fusion,
                    encoder_kind: encoder,
                    input_dropout: 0.0, // the checker needs determinism
                    seed,
                    ..ModelConfig::default()
                };
                let params = init_params(&cfg, ModalitySet::all())?;
                let batch_samples = random_batch(&cfg, seed, seq_len, args.batch);
                let refs: Vec<&Utterance> = batch_samples.iter().collect();
                let batch = collate(&refs, &CollateOptions::default())?;
                let labels = Tensor::from_vec(batch.labels.clone());

                let check = GradCheck {
                    step: args.step,
                    tol: args.tol,
                    elements_per_param: elements,
                    sample_seed: seed,
                    inject_fault: args.inject_fault.clone(),
                };
                let report = check.run(params.entries(), |tape, vars| {
                    let pv = ParamVars::from_order(params.names(), vars);
                    let out = forward_batch(tape, &pv, &cfg, &batch, Mode::Eval, None, None)?;
                    let y = tape.constant(labels.clone());
                    mse_loss(tape, out.y_hat, y)
                })?;

                for entry in &report.entries {
                    let slot = worst.entry(entry.name.clone()).or_insert(0.0);
                    *slot = slot.max(entry.max_rel_err);
                }
                for f in report.failures() {
                    failures.push(format!(
                        "{fusion}/seed {seed}/T={seq_len}: `{}` rel err {:.3e} (tape {:.6e} vs fd {:.6e} at element {})",
                        f.name, f.max_rel_err, f.analytic, f.numeric, f.element
                    ));
                }
            }
        }
    }

    println!("worst relative error per parameter (tol {:.1e}):", args.tol);
    for (name, err) in &worst {
        let mark = if *err < args.tol { "ok  " } else { "FAIL" };
        println!("  {mark} {name}: {err:.3e}");
    }
    println!(
        "checked {} parameters × {} fusion variant(s) × {} seed(s) × {} length(s) in {:.1}s",
        worst.len(),
        fusions.len(),
        args.seeds.len(),
        args.seq_lens.len(),
        started.elapsed().as_secs_f64()
    );

    if failures.is_empty() {
        println!("gradient check passed");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        Err(DafError::GradCheckFailed(format!(
            "{} parameter check(s) above tolerance",
            failures.len()
        )))
    }
}

fn random_batch(cfg: &ModelConfig, seed: u64, seq_len: usize, batch: usize) -> Vec<Utterance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (seq_len as u64).wrapping_mul(0x9e37));
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    (0..batch)
        .map(|i| Utterance {
            id: format!("probe-{i}"),
            label: ((i as f64) / batch.max(1) as f64) * 4.0 - 2.0,
            text: Tensor::from_vec(draw(cfg.d_text)),
            audio: Tensor::new(vec![seq_len, cfg.d_audio], draw(seq_len * cfg.d_audio))
                .expect("shape matches"),
            video: Tensor::new(vec![seq_len, cfg.d_video], draw(seq_len * cfg.d_video))
                .expect("shape matches"),
        })
        .collect()
}
