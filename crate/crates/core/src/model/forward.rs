//! The full forward pipeline.
//!
//! Per batch element: input dropout (train mode) → text projection →
//! sequence encoding → text-guided attention per modality → fusion →
//! ReLU hidden layer → bounded output. All intermediates are captured
//! in a [`ForwardTrace`] per element; predictions are concatenated
//! into one `[B]` var so a batch loss can backpropagate through
//! everything at once.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Batch, Modality, SeqBatch};
use crate::error::{DafError, Result};
use crate::model::attention::luong_attention;
use crate::model::{encoder, fusion, ModelConfig, OutputActivation, ParamSet, ParamVars};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Attention intermediates for one modality of one batch element.
#[derive(Clone, Debug)]
pub struct ModalityTrace {
    /// Encoded sequence, [T × d_attn].
    pub encoded: Tensor,
    /// Attention weights, [T]; zero on padded frames.
    pub alpha: Tensor,
    /// Attended context vector, [d_attn].
    pub context: Tensor,
}

/// Every intermediate of one batch element's forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    /// Projected text t′, [d_attn].
    pub t_proj: Tensor,
    pub audio: Option<ModalityTrace>,
    pub video: Option<ModalityTrace>,
    /// Gate weights, when the fusion strategy has a gate.
    pub gate: Option<Vec<f64>>,
    /// Fused representation z.
    pub fused: Tensor,
    /// Hidden layer h.
    pub hidden: Tensor,
    pub y_hat: f64,
}

pub struct BatchForward {
    /// Predictions for the whole batch, shape [B], still on the tape.
    pub y_hat: Var,
    pub traces: Vec<ForwardTrace>,
}

fn affine(tape: &mut Tape, x: Var, w: Var, b: Var) -> Result<Var> {
    let wide = tape.matmul(x, w)?;
    let cols = tape.value(wide).shape()[1];
    let b_row = tape.reshape(b, vec![1, cols])?;
    tape.add(wide, b_row)
}

/// t′ = t·W + b for a `[1 × d_text]` row. The bias is a harmless
/// generalization; zeroing it recovers the pure projection.
pub fn text_project(tape: &mut Tape, t: Var, w: Var, b: Var) -> Result<Var> {
    affine(tape, t, w, b)
}

/// h = relu(z·W_h + b_h), then ŷ = 3·tanh(z·W_out + b_out) under
/// `ScaledTanh` (|ŷ| ≤ 3 for all finite inputs) or the raw affine
/// value under `Linear`. Returns (hidden, prediction [1 × 1]).
pub fn head(
    tape: &mut Tape,
    z: Var,
    w_h: Var,
    b_h: Var,
    w_out: Var,
    b_out: Var,
    activation: OutputActivation,
) -> Result<(Var, Var)> {
    let pre_h = affine(tape, z, w_h, b_h)?;
    let hidden = tape.relu(pre_h)?;
    let out = affine(tape, hidden, w_out, b_out)?;
    let y = match activation {
        OutputActivation::ScaledTanh => {
            let t = tape.tanh(out)?;
            tape.scale(t, 3.0)?
        }
        OutputActivation::Linear => out,
    };
    Ok((hidden, y))
}

/// Inverted dropout: entries are zeroed with probability p, survivors
/// scaled by 1/(1−p) so eval needs no rescaling.
fn dropout(tape: &mut Tape, rng: &mut ChaCha8Rng, x: Var, p: f64) -> Result<Var> {
    let shape = tape.value(x).shape().to_vec();
    let n = tape.value(x).len();
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_range(0.0..1.0) < p {
                0.0
            } else {
                keep
            }
        })
        .collect();
    let m = tape.constant(Tensor::new(shape, mask)?);
    tape.mul(x, m)
}

/// Run the model over a preprocessed batch.
///
/// Train mode requires an RNG stream for dropout; eval mode is fully
/// deterministic. `gate_override` pins the gate weights to constants
/// (diagnostic; see [`fusion::FusionStrategy::fuse`]).
pub fn forward_batch(
    tape: &mut Tape,
    pv: &ParamVars,
    cfg: &ModelConfig,
    batch: &Batch,
    mode: Mode,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
    gate_override: Option<&[f64]>,
) -> Result<BatchForward> {
    if batch.is_empty() {
        return Err(DafError::EmptyInput("forward_batch"));
    }
    if mode == Mode::Train && dropout_rng.is_none() {
        return Err(DafError::InvalidArgument {
            op: "forward_batch",
            detail: "train mode requires an explicit RNG stream".to_string(),
        });
    }
    let drop_p = if mode == Mode::Train {
        cfg.input_dropout
    } else {
        0.0
    };
    let enc = encoder::by_kind(cfg.encoder_kind);
    let strategy = fusion::by_kind(cfg.gate_kind);
    let w_text = pv.get("text.proj.w")?;
    let b_text = pv.get("text.proj.b")?;
    let w_h = pv.get("head.hidden.w")?;
    let b_h = pv.get("head.hidden.b")?;
    let w_out = pv.get("head.out.w")?;
    let b_out = pv.get("head.out.b")?;

    let mut per_sample_y = Vec::with_capacity(batch.len());
    let mut traces = Vec::with_capacity(batch.len());

    for i in 0..batch.len() {
        let text = batch.text.index_axis0(i)?.reshape(vec![1, cfg.d_text])?;
        let mut t_in = tape.constant(text);
        if drop_p > 0.0 {
            let rng = dropout_rng.as_deref_mut().expect("checked above");
            t_in = dropout(tape, rng, t_in, drop_p)?;
        }
        let t_proj = text_project(tape, t_in, w_text, b_text)?;

        let mut contexts = Vec::new();
        let mut modality_traces: [Option<ModalityTrace>; 2] = [None, None];
        for (slot, (m, seq)) in [
            (Modality::Audio, batch.audio.as_ref()),
            (Modality::Video, batch.video.as_ref()),
        ]
        .into_iter()
        .enumerate()
        {
            let Some(seq) = seq else { continue };
            let (attended, trace) = attend_one(
                tape,
                pv,
                cfg,
                enc,
                m,
                seq,
                i,
                t_proj,
                drop_p,
                dropout_rng.as_deref_mut(),
            )?;
            contexts.push(attended);
            modality_traces[slot] = Some(trace);
        }

        let fused = strategy.fuse(tape, cfg, pv, t_proj, &contexts, gate_override)?;
        let (hidden, y) = head(tape, fused.z, w_h, b_h, w_out, b_out, cfg.output_activation)?;
        let y_flat = tape.reshape(y, vec![1])?;
        per_sample_y.push(y_flat);

        let [audio_trace, video_trace] = modality_traces;
        traces.push(ForwardTrace {
            t_proj: tape.value(t_proj).clone().reshape(vec![cfg.d_attn])?,
            audio: audio_trace,
            video: video_trace,
            gate: fused.gate.map(|g| tape.value(g).data().to_vec()),
            fused: flatten_row(tape.value(fused.z).clone())?,
            hidden: flatten_row(tape.value(hidden).clone())?,
            y_hat: tape.value(y_flat).data()[0],
        });
    }

    let y_hat = tape.concat(&per_sample_y, 0)?;
    Ok(BatchForward { y_hat, traces })
}

#[allow(clippy::too_many_arguments)]
fn attend_one(
    tape: &mut Tape,
    pv: &ParamVars,
    cfg: &ModelConfig,
    enc: &dyn encoder::SequenceEncoder,
    m: Modality,
    seq: &SeqBatch,
    i: usize,
    t_proj: Var,
    drop_p: f64,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Var, ModalityTrace)> {
    let (frames2d, mask) = seq.sample(i)?;
    let d_in = cfg.input_width(m);
    let t_len = frames2d.shape()[0];
    let mut frame_vars = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let row = frames2d.index_axis0(t)?.reshape(vec![1, d_in])?;
        let mut v = tape.constant(row);
        // Dropout draws happen only for real frames, so the stream does
        // not depend on how much padding the batch added.
        if drop_p > 0.0 && mask[t] {
            let r = rng.as_deref_mut().expect("train mode has an RNG");
            v = dropout(tape, r, v, drop_p)?;
        }
        frame_vars.push(v);
    }
    let prefix = format!("enc.{}", m.as_str());
    let rows = enc.encode(tape, pv, &prefix, &frame_vars, mask, cfg)?;
    let encoded = tape.concat(&rows, 0)?;
    let score_w = pv.get(&format!("attn.{}.w", m.as_str()))?;
    let att = luong_attention(tape, t_proj, encoded, score_w, mask)?;
    let trace = ModalityTrace {
        encoded: tape.value(encoded).clone(),
        alpha: tape.value(att.alpha).clone().reshape(vec![t_len])?,
        context: tape.value(att.context).clone().reshape(vec![cfg.d_attn])?,
    };
    Ok((att.context, trace))
}

fn flatten_row(t: Tensor) -> Result<Tensor> {
    let n = t.len();
    t.reshape(vec![n])
}

/// Deterministic eval-mode forward on a fresh tape, returning only the
/// traces.
pub fn eval_forward(
    params: &ParamSet,
    cfg: &ModelConfig,
    batch: &Batch,
) -> Result<Vec<ForwardTrace>> {
    let mut tape = Tape::new();
    let pv = params.register_on(&mut tape);
    let out = forward_batch(&mut tape, &pv, cfg, batch, Mode::Eval, None, None)?;
    Ok(out.traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row_var(tape: &mut Tape, v: &[f64]) -> Var {
        tape.constant(Tensor::new(vec![1, v.len()], v.to_vec()).unwrap())
    }

    #[test]
    fn text_project_zero_weights_give_zero() {
        let mut tape = Tape::new();
        let t = row_var(&mut tape, &[1.0, -2.0, 3.0]);
        let w = tape.constant(Tensor::zeros(vec![3, 2]));
        let b = tape.constant(Tensor::zeros(vec![2]));
        let out = text_project(&mut tape, t, w, b).unwrap();
        assert_eq!(tape.value(out).data(), &[0.0, 0.0]);
    }

    #[test]
    fn text_project_row_selector_copies_coordinates() {
        let mut tape = Tape::new();
        let t = row_var(&mut tape, &[10.0, 20.0, 30.0]);
        // selects coordinates 2 and 0
        let w = tape.constant(
            Tensor::new(vec![3, 2], vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]).unwrap(),
        );
        let b = tape.constant(Tensor::zeros(vec![2]));
        let out = text_project(&mut tape, t, w, b).unwrap();
        assert_eq!(tape.value(out).data(), &[30.0, 10.0]);
    }

    #[test]
    fn text_project_matches_direct_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (d_in, d_out) = (7, 4);
        let t: Vec<f64> = (0..d_in).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..d_in * d_out)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let b: Vec<f64> = (0..d_out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut direct = b.clone();
        for i in 0..d_in {
            for j in 0..d_out {
                direct[j] += t[i] * w[i * d_out + j];
            }
        }
        let mut tape = Tape::new();
        let tv = row_var(&mut tape, &t);
        let wv = tape.constant(Tensor::new(vec![d_in, d_out], w).unwrap());
        let bv = tape.constant(Tensor::from_vec(b));
        let out = text_project(&mut tape, tv, wv, bv).unwrap();
        for (got, want) in tape.value(out).data().iter().zip(&direct) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn text_project_width_mismatch_errors() {
        let mut tape = Tape::new();
        let t = row_var(&mut tape, &[1.0, 2.0]);
        let w = tape.constant(Tensor::zeros(vec![3, 2]));
        let b = tape.constant(Tensor::zeros(vec![2]));
        assert!(text_project(&mut tape, t, w, b).is_err());
    }

    fn head_vars(tape: &mut Tape, z_w: usize, hid: usize, b_out_val: f64) -> (Var, Var, Var, Var) {
        let w_h = tape.constant(Tensor::zeros(vec![z_w, hid]));
        let b_h = tape.constant(Tensor::zeros(vec![hid]));
        let w_out = tape.constant(Tensor::zeros(vec![hid, 1]));
        let b_out = tape.constant(Tensor::from_vec(vec![b_out_val]));
        (w_h, b_h, w_out, b_out)
    }

    #[test]
    fn head_all_zero_params_predict_zero() {
        let mut tape = Tape::new();
        let z = row_var(&mut tape, &[1.0, 2.0, 3.0]);
        let (w_h, b_h, w_out, b_out) = head_vars(&mut tape, 3, 2, 0.0);
        let (_, y) = head(&mut tape, z, w_h, b_h, w_out, b_out, OutputActivation::ScaledTanh)
            .unwrap();
        assert_eq!(tape.value(y).data(), &[0.0]);
    }

    #[test]
    fn head_saturates_at_three() {
        let mut tape = Tape::new();
        let z = row_var(&mut tape, &[1.0]);
        let (w_h, b_h, w_out, b_out) = head_vars(&mut tape, 1, 2, 1e6);
        let (_, y) = head(&mut tape, z, w_h, b_h, w_out, b_out, OutputActivation::ScaledTanh)
            .unwrap();
        assert!((tape.value(y).data()[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn linear_head_is_unbounded() {
        let mut tape = Tape::new();
        let z = row_var(&mut tape, &[1.0]);
        let (w_h, b_h, w_out, b_out) = head_vars(&mut tape, 1, 2, -3.7);
        let (_, y) =
            head(&mut tape, z, w_h, b_h, w_out, b_out, OutputActivation::Linear).unwrap();
        assert_eq!(tape.value(y).data(), &[-3.7]);
    }
}
