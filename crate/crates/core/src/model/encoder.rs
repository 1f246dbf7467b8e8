//! Sequence encoders behind a common trait, registered by name.
//!
//! Both kinds map a masked frame sequence to one `[1 × d_attn]` row
//! per position. Masked positions produce exact zero rows and never
//! update recurrent state, so appending padded frames cannot change
//! the encoding of real frames.

use rand_chacha::ChaCha8Rng;

use crate::error::{DafError, Result};
use crate::model::params::{glorot, ParamSet, ParamVars};
use crate::model::{EncoderKind, ModelConfig};
use crate::tensor::{Tape, Tensor, Var};

pub trait SequenceEncoder: Send + Sync {
    fn name(&self) -> &'static str;

    /// Create this encoder's parameters for one modality, prefixed so
    /// several instances can coexist in a [`ParamSet`].
    fn init_params(
        &self,
        cfg: &ModelConfig,
        d_in: usize,
        prefix: &str,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()>;

    /// Encode per-frame `[1 × d_in]` vars into per-frame `[1 × d_attn]`
    /// rows. `mask[t]` is false for padded frames.
    fn encode(
        &self,
        tape: &mut Tape,
        pv: &ParamVars,
        prefix: &str,
        frames: &[Var],
        mask: &[bool],
        cfg: &ModelConfig,
    ) -> Result<Vec<Var>>;
}

static LINEAR: LinearEncoder = LinearEncoder;
static BI_RECURRENT: BiRecurrentEncoder = BiRecurrentEncoder;

pub fn registry() -> &'static [&'static dyn SequenceEncoder] {
    static ALL: [&dyn SequenceEncoder; 2] = [&LINEAR, &BI_RECURRENT];
    &ALL
}

pub fn by_kind(kind: EncoderKind) -> &'static dyn SequenceEncoder {
    match kind {
        EncoderKind::Linear => &LINEAR,
        EncoderKind::BiRecurrent => &BI_RECURRENT,
    }
}

pub fn by_name(name: &str) -> Result<&'static dyn SequenceEncoder> {
    registry()
        .iter()
        .copied()
        .find(|e| e.name() == name)
        .ok_or_else(|| DafError::Config(format!("unknown encoder `{name}`")))
}

fn check_sequence(frames: &[Var], mask: &[bool]) -> Result<()> {
    if frames.is_empty() {
        return Err(DafError::EmptyInput("encode_sequence"));
    }
    if frames.len() != mask.len() {
        return Err(DafError::InvalidArgument {
            op: "encode_sequence",
            detail: format!("{} frames but {} mask entries", frames.len(), mask.len()),
        });
    }
    if !mask.iter().any(|&m| m) {
        return Err(DafError::InvalidArgument {
            op: "encode_sequence",
            detail: "every frame is masked".to_string(),
        });
    }
    Ok(())
}

fn affine_row(tape: &mut Tape, x: Var, w: Var, b: Var) -> Result<Var> {
    let wide = tape.matmul(x, w)?;
    let cols = tape.value(wide).shape()[1];
    let b_row = tape.reshape(b, vec![1, cols])?;
    tape.add(wide, b_row)
}

/// Per-frame affine map to the attention size.
pub struct LinearEncoder;

impl SequenceEncoder for LinearEncoder {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn init_params(
        &self,
        cfg: &ModelConfig,
        d_in: usize,
        prefix: &str,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()> {
        params.insert(
            format!("{prefix}.out.w"),
            glorot(rng, d_in, cfg.d_attn, vec![d_in, cfg.d_attn]),
        )?;
        params.insert(format!("{prefix}.out.b"), Tensor::zeros(vec![cfg.d_attn]))
    }

    fn encode(
        &self,
        tape: &mut Tape,
        pv: &ParamVars,
        prefix: &str,
        frames: &[Var],
        mask: &[bool],
        cfg: &ModelConfig,
    ) -> Result<Vec<Var>> {
        check_sequence(frames, mask)?;
        let w = pv.get(&format!("{prefix}.out.w"))?;
        let b = pv.get(&format!("{prefix}.out.b"))?;
        let mut rows = Vec::with_capacity(frames.len());
        for (t, &frame) in frames.iter().enumerate() {
            if mask[t] {
                rows.push(affine_row(tape, frame, w, b)?);
            } else {
                rows.push(tape.constant(Tensor::zeros(vec![1, cfg.d_attn])));
            }
        }
        Ok(rows)
    }
}

/// Gated recurrent cell (update + reset gates) run in both directions
/// over the unmasked frames; the two direction states are concatenated
/// per position and mapped affinely to the attention size.
pub struct BiRecurrentEncoder;

struct CellVars {
    w_reset: Var,
    u_reset: Var,
    b_reset: Var,
    w_update: Var,
    u_update: Var,
    b_update: Var,
    w_cand: Var,
    u_cand: Var,
    b_cand: Var,
}

impl CellVars {
    fn lookup(pv: &ParamVars, prefix: &str, dir: &str) -> Result<Self> {
        let get = |name: &str| pv.get(&format!("{prefix}.{dir}.{name}"));
        Ok(CellVars {
            w_reset: get("w_reset")?,
            u_reset: get("u_reset")?,
            b_reset: get("b_reset")?,
            w_update: get("w_update")?,
            u_update: get("u_update")?,
            b_update: get("b_update")?,
            w_cand: get("w_cand")?,
            u_cand: get("u_cand")?,
            b_cand: get("b_cand")?,
        })
    }
}

impl BiRecurrentEncoder {
    /// r = σ(xW_r + hU_r + b_r); z = σ(xW_z + hU_z + b_z);
    /// c = tanh(xW_c + (r⊙h)U_c + b_c); h' = z⊙h + (1−z)⊙c.
    fn step(tape: &mut Tape, cell: &CellVars, x: Var, h: Var, hidden: usize) -> Result<Var> {
        let gate = |tape: &mut Tape, w: Var, u: Var, b: Var, hin: Var| -> Result<Var> {
            let xw = tape.matmul(x, w)?;
            let hu = tape.matmul(hin, u)?;
            let s = tape.add(xw, hu)?;
            let b_row = tape.reshape(b, vec![1, hidden])?;
            tape.add(s, b_row)
        };
        let r_pre = gate(tape, cell.w_reset, cell.u_reset, cell.b_reset, h)?;
        let r = tape.sigmoid(r_pre)?;
        let z_pre = gate(tape, cell.w_update, cell.u_update, cell.b_update, h)?;
        let z = tape.sigmoid(z_pre)?;
        let rh = tape.mul(r, h)?;
        let c_pre = gate(tape, cell.w_cand, cell.u_cand, cell.b_cand, rh)?;
        let c = tape.tanh(c_pre)?;
        let zh = tape.mul(z, h)?;
        let one = tape.constant(Tensor::scalar(1.0));
        let inv = tape.sub(one, z)?;
        let ic = tape.mul(inv, c)?;
        tape.add(zh, ic)
    }

    fn run_direction(
        tape: &mut Tape,
        cell: &CellVars,
        frames: &[Var],
        mask: &[bool],
        hidden: usize,
        reverse: bool,
    ) -> Result<Vec<Option<Var>>> {
        let mut states: Vec<Option<Var>> = vec![None; frames.len()];
        let mut h = tape.constant(Tensor::zeros(vec![1, hidden]));
        let order: Vec<usize> = if reverse {
            (0..frames.len()).rev().collect()
        } else {
            (0..frames.len()).collect()
        };
        for t in order {
            if mask[t] {
                h = Self::step(tape, cell, frames[t], h, hidden)?;
                states[t] = Some(h);
            }
        }
        Ok(states)
    }
}

impl SequenceEncoder for BiRecurrentEncoder {
    fn name(&self) -> &'static str {
        "bi_recurrent"
    }

    fn init_params(
        &self,
        cfg: &ModelConfig,
        d_in: usize,
        prefix: &str,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()> {
        let h = cfg.encoder_hidden;
        for dir in ["fwd", "bwd"] {
            for gate in ["reset", "update", "cand"] {
                params.insert(
                    format!("{prefix}.{dir}.w_{gate}"),
                    glorot(rng, d_in, h, vec![d_in, h]),
                )?;
                params.insert(
                    format!("{prefix}.{dir}.u_{gate}"),
                    glorot(rng, h, h, vec![h, h]),
                )?;
                params.insert(format!("{prefix}.{dir}.b_{gate}"), Tensor::zeros(vec![h]))?;
            }
        }
        params.insert(
            format!("{prefix}.out.w"),
            glorot(rng, 2 * h, cfg.d_attn, vec![2 * h, cfg.d_attn]),
        )?;
        params.insert(format!("{prefix}.out.b"), Tensor::zeros(vec![cfg.d_attn]))
    }

    fn encode(
        &self,
        tape: &mut Tape,
        pv: &ParamVars,
        prefix: &str,
        frames: &[Var],
        mask: &[bool],
        cfg: &ModelConfig,
    ) -> Result<Vec<Var>> {
        check_sequence(frames, mask)?;
        let h = cfg.encoder_hidden;
        let fwd_cell = CellVars::lookup(pv, prefix, "fwd")?;
        let bwd_cell = CellVars::lookup(pv, prefix, "bwd")?;
        let fwd = Self::run_direction(tape, &fwd_cell, frames, mask, h, false)?;
        let bwd = Self::run_direction(tape, &bwd_cell, frames, mask, h, true)?;

        let w = pv.get(&format!("{prefix}.out.w"))?;
        let b = pv.get(&format!("{prefix}.out.b"))?;
        let mut rows = Vec::with_capacity(frames.len());
        for t in 0..frames.len() {
            match (fwd[t], bwd[t]) {
                (Some(f), Some(r)) => {
                    let both = tape.concat(&[f, r], 1)?;
                    rows.push(affine_row(tape, both, w, b)?);
                }
                _ => rows.push(tape.constant(Tensor::zeros(vec![1, cfg.d_attn]))),
            }
        }
        Ok(rows)
    }
}
