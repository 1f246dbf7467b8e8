//! Whole-model properties: gradient fidelity against finite
//! differences for every fusion variant and encoder kind, padding
//! invariance, simplex invariants, gate degeneracy, and determinism.
//!
//! These run on a reduced-width model so every parameter element can
//! be checked exhaustively; the acceptance suite re-runs the gradient
//! oracle at the full published widths with element sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use daf_core::data::{collate, Batch, CollateOptions, ModalitySet, SeqBatch, Utterance};
use daf_core::model::{
    eval_forward, forward_batch, fusion, init_params, EncoderKind, FusionKind, Mode, ModelConfig,
    ParamVars,
};
use daf_core::tensor::{GradCheck, Tape, Tensor};
use daf_core::train::mse_loss;

fn tiny_cfg(gate: FusionKind, encoder: EncoderKind) -> ModelConfig {
    ModelConfig {
        d_text: 6,
        d_audio: 4,
        d_video: 3,
        d_attn: 5,
        d_hidden: 4,
        encoder_kind: encoder,
        encoder_hidden: 3,
        gate_kind: gate,
        input_dropout: 0.0,
        seed: momentum_seed(gate, encoder),
        ..ModelConfig::default()
    }
}

fn momentum_seed(gate: FusionKind, encoder: EncoderKind) -> u64 {
    gate.as_str().len() as u64 * 31 + encoder.as_str().len() as u64
}

fn random_utterance(cfg: &ModelConfig, rng: &mut ChaCha8Rng, t_a: usize, t_v: usize) -> Utterance {
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let text = Tensor::from_vec(draw(cfg.d_text));
    let audio = Tensor::new(vec![t_a, cfg.d_audio], draw(t_a * cfg.d_audio)).unwrap();
    let video = Tensor::new(vec![t_v, cfg.d_video], draw(t_v * cfg.d_video)).unwrap();
    Utterance {
        id: format!("u{t_a}x{t_v}"),
        label: rng.random_range(-3.0..3.0),
        text,
        audio,
        video,
    }
}

fn batch_of(cfg: &ModelConfig, rng: &mut ChaCha8Rng, lens: &[(usize, usize)]) -> Batch {
    let samples: Vec<Utterance> = lens
        .iter()
        .map(|&(a, v)| random_utterance(cfg, rng, a, v))
        .collect();
    let refs: Vec<&Utterance> = samples.iter().collect();
    collate(&refs, &CollateOptions::default()).unwrap()
}

#[test]
fn full_model_gradients_match_finite_differences() {
    for gate in FusionKind::ALL {
        for encoder in [EncoderKind::Linear, EncoderKind::BiRecurrent] {
            let cfg = tiny_cfg(gate, encoder);
            let params = init_params(&cfg, ModalitySet::all()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let batch = batch_of(&cfg, &mut rng, &[(1, 3), (3, 2)]);
            let labels = Tensor::from_vec(batch.labels.clone());

            let report = GradCheck::default()
                .run(params.entries(), |tape, vars| {
                    let pv = ParamVars::from_order(params.names(), vars);
                    let out = forward_batch(tape, &pv, &cfg, &batch, Mode::Eval, None, None)?;
                    let y = tape.constant(labels.clone());
                    mse_loss(tape, out.y_hat, y)
                })
                .unwrap();
            assert!(
                report.passed(),
                "{gate}/{}: worst {:?}",
                encoder.as_str(),
                report.failures().first()
            );
        }
    }
}

#[test]
fn padding_invariance_under_junk_masked_frames() {
    let cfg = tiny_cfg(FusionKind::Softmax3, EncoderKind::BiRecurrent);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    for trial in 0..40 {
        let t_a = rng.random_range(1..6);
        let t_v = rng.random_range(1..6);
        let batch = batch_of(&cfg, &mut rng.clone(), &[(t_a, t_v)]);
        let base = eval_forward(&params, &cfg, &batch).unwrap()[0].y_hat;

        let extra = rng.random_range(1..=16);
        let junk = rng.random_range(-1e6..1e6);
        let padded = Batch {
            text: batch.text.clone(),
            audio: Some(pad_with_junk(batch.audio.as_ref().unwrap(), extra, junk)),
            video: Some(pad_with_junk(batch.video.as_ref().unwrap(), extra, junk)),
            labels: batch.labels.clone(),
            ids: batch.ids.clone(),
        };
        let padded_y = eval_forward(&params, &cfg, &padded).unwrap()[0].y_hat;
        assert!(
            (base - padded_y).abs() < 1e-9,
            "trial {trial}: {base} vs {padded_y}"
        );
        let _ = batch_of(&cfg, &mut rng, &[(1, 1)]); // advance the stream
    }
}

fn pad_with_junk(seq: &SeqBatch, extra: usize, junk: f64) -> SeqBatch {
    let b = seq.frames.shape()[0];
    assert_eq!(b, 1);
    let t = seq.frames.shape()[1];
    let d = seq.frames.shape()[2];
    let mut data = seq.frames.data().to_vec();
    data.extend(std::iter::repeat(junk).take(extra * d));
    let mut mask = seq.mask.clone();
    mask[0].extend(std::iter::repeat(false).take(extra));
    SeqBatch {
        frames: Tensor::new(vec![b, t + extra, d], data).unwrap(),
        mask,
    }
}

#[test]
fn simplex_invariants_hold_over_random_forwards() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..50 {
        let cfg = ModelConfig {
            seed: trial,
            ..tiny_cfg(FusionKind::Softmax3, EncoderKind::Linear)
        };
        let params = init_params(&cfg, ModalitySet::all()).unwrap();
        let batch = batch_of(&cfg, &mut rng, &[(2, 4), (5, 1)]);
        for trace in eval_forward(&params, &cfg, &batch).unwrap() {
            let gate = trace.gate.as_ref().unwrap();
            assert_eq!(gate.len(), 3);
            assert!(gate.iter().all(|&l| l >= 0.0));
            assert!((gate.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for m in [trace.audio.as_ref().unwrap(), trace.video.as_ref().unwrap()] {
                assert!(m.alpha.data().iter().all(|&a| a >= 0.0));
                assert!((m.alpha.data().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            assert!(trace.y_hat.abs() <= 3.0);
        }
    }
}

#[test]
fn degenerate_gate_depends_only_on_text() {
    let cfg = tiny_cfg(FusionKind::Softmax3, EncoderKind::BiRecurrent);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sample = random_utterance(&cfg, &mut rng, 4, 3);

    let mut zeroed = sample.clone();
    zeroed.audio.data_mut().iter_mut().for_each(|v| *v = 0.0);
    zeroed.video.data_mut().iter_mut().for_each(|v| *v = 0.0);

    let run = |s: &Utterance| -> f64 {
        let batch = collate(&[s], &CollateOptions::default()).unwrap();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let out = forward_batch(
            &mut tape,
            &pv,
            &cfg,
            &batch,
            Mode::Eval,
            None,
            Some(&[1.0, 0.0, 0.0]),
        )
        .unwrap();
        out.traces[0].y_hat
    };

    assert!((run(&sample) - run(&zeroed)).abs() < 1e-9);
}

#[test]
fn eval_mode_is_bit_deterministic() {
    let cfg = tiny_cfg(FusionKind::Sigmoid2, EncoderKind::BiRecurrent);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let batch = batch_of(&cfg, &mut rng, &[(3, 3), (1, 5)]);
    let a = eval_forward(&params, &cfg, &batch).unwrap();
    let b = eval_forward(&params, &cfg, &batch).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.y_hat.to_bits(), y.y_hat.to_bits());
        assert_eq!(x.t_proj, y.t_proj);
        assert_eq!(x.fused, y.fused);
    }
}

#[test]
fn zero_dropout_train_mode_matches_eval() {
    let cfg = tiny_cfg(FusionKind::Softmax3, EncoderKind::Linear);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let batch = batch_of(&cfg, &mut rng, &[(2, 2)]);

    let mut tape = Tape::new();
    let pv = params.register_on(&mut tape);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(0);
    let train = forward_batch(
        &mut tape,
        &pv,
        &cfg,
        &batch,
        Mode::Train,
        Some(&mut dropout_rng),
        None,
    )
    .unwrap();
    let eval = eval_forward(&params, &cfg, &batch).unwrap();
    assert_eq!(train.traces[0].y_hat.to_bits(), eval[0].y_hat.to_bits());
}

#[test]
fn train_mode_without_rng_is_rejected() {
    let cfg = tiny_cfg(FusionKind::Softmax3, EncoderKind::Linear);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let batch = batch_of(&cfg, &mut rng, &[(2, 2)]);
    let mut tape = Tape::new();
    let pv = params.register_on(&mut tape);
    assert!(forward_batch(&mut tape, &pv, &cfg, &batch, Mode::Train, None, None).is_err());
}

#[test]
fn cross_batch_consistency() {
    // A sample's prediction must not depend on what it is batched with.
    let cfg = tiny_cfg(FusionKind::Softmax3, EncoderKind::BiRecurrent);
    let params = init_params(&cfg, ModalitySet::all()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let short = random_utterance(&cfg, &mut rng, 2, 1);
    let long_a = random_utterance(&cfg, &mut rng, 7, 6);
    let long_b = random_utterance(&cfg, &mut rng, 5, 8);

    let alone = {
        let batch = collate(&[&short], &CollateOptions::default()).unwrap();
        eval_forward(&params, &cfg, &batch).unwrap()[0].y_hat
    };
    let in_company = {
        let batch = collate(&[&long_a, &short, &long_b], &CollateOptions::default()).unwrap();
        eval_forward(&params, &cfg, &batch).unwrap()[1].y_hat
    };
    assert!((alone - in_company).abs() < 1e-9);
}

#[test]
fn reduced_modality_batches_run_every_fusion_variant() {
    for gate in FusionKind::ALL {
        for modalities in [
            ModalitySet::text_only(),
            ModalitySet { audio: true, video: false },
            ModalitySet { audio: false, video: true },
        ] {
            let cfg = tiny_cfg(gate, EncoderKind::Linear);
            let params = init_params(&cfg, modalities).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let samples = [random_utterance(&cfg, &mut rng, 3, 2)];
            let opts = CollateOptions {
                l2_normalize: true,
                modalities,
            };
            let batch = collate(&[&samples[0]], &opts).unwrap();
            let traces = eval_forward(&params, &cfg, &batch).unwrap();
            assert_eq!(traces.len(), 1);
            assert_eq!(batch.audio.is_some(), modalities.audio);
            assert_eq!(batch.video.is_some(), modalities.video);
            assert!(traces[0].y_hat.abs() <= 3.0);
        }
    }
}

#[test]
fn fusion_strategy_registry_drives_param_shapes() {
    // The registry's fused widths must agree with what init_params
    // builds for the head.
    let modalities = ModalitySet::all();
    for gate in FusionKind::ALL {
        let cfg = tiny_cfg(gate, EncoderKind::Linear);
        let params = init_params(&cfg, modalities).unwrap();
        let strategy = fusion::by_kind(gate);
        let expected = strategy.fused_width(&cfg, modalities.context_count());
        assert_eq!(params.get("head.hidden.w").unwrap().shape()[0], expected);
    }
}
