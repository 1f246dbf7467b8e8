//! Fusion strategies behind a common trait, registered by name and
//! selected at runtime (`--fusion softmax3|sigmoid2|static`).
//!
//! Each strategy combines the projected text vector with the attended
//! context vectors of whichever non-text modalities are present, so
//! the same implementations serve the full tri-modal model and the
//! reduced-gate ablation rows.

use rand_chacha::ChaCha8Rng;

use crate::error::{DafError, Result};
use crate::model::params::{glorot, ParamSet, ParamVars};
use crate::model::{FusionKind, ModelConfig};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Debug)]
pub struct Fused {
    /// The fused representation z, shape [1 × fused_width].
    pub z: Var,
    /// Gate weights when the strategy has a gate: softmax simplex
    /// weights over [text, contexts…] for softmax3, independent
    /// sigmoid weights over the contexts for sigmoid2.
    pub gate: Option<Var>,
}

pub trait FusionStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> FusionKind;

    /// Width of z given how many non-text contexts are present.
    fn fused_width(&self, cfg: &ModelConfig, n_contexts: usize) -> usize;

    fn init_params(
        &self,
        cfg: &ModelConfig,
        n_contexts: usize,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()>;

    /// Fuse `t_proj` ([1 × d_attn]) with the present context vectors
    /// (each [1 × d_attn], in audio-then-video order).
    ///
    /// `override_weights`, when given, replaces the computed gate
    /// weights by constants — a diagnostic for pinning the gate (for
    /// example to [1, 0, 0]) without retraining.
    fn fuse(
        &self,
        tape: &mut Tape,
        cfg: &ModelConfig,
        pv: &ParamVars,
        t_proj: Var,
        contexts: &[Var],
        override_weights: Option<&[f64]>,
    ) -> Result<Fused>;
}

static SOFTMAX3: SoftmaxGateFusion = SoftmaxGateFusion;
static SIGMOID2: SigmoidGateFusion = SigmoidGateFusion;
static STATIC: StaticConcatFusion = StaticConcatFusion;

pub fn registry() -> &'static [&'static dyn FusionStrategy] {
    static ALL: [&dyn FusionStrategy; 3] = [&SOFTMAX3, &SIGMOID2, &STATIC];
    &ALL
}

pub fn by_kind(kind: FusionKind) -> &'static dyn FusionStrategy {
    match kind {
        FusionKind::Softmax3 => &SOFTMAX3,
        FusionKind::Sigmoid2 => &SIGMOID2,
        FusionKind::StaticConcat => &STATIC,
    }
}

pub fn by_name(name: &str) -> Result<&'static dyn FusionStrategy> {
    let kind: FusionKind = name.parse()?;
    Ok(by_kind(kind))
}

fn override_var(tape: &mut Tape, weights: &[f64], expected: usize) -> Result<Var> {
    if weights.len() != expected {
        return Err(DafError::InvalidArgument {
            op: "fuse",
            detail: format!(
                "gate override has {} weights, expected {expected}",
                weights.len()
            ),
        });
    }
    Ok(tape.constant(Tensor::new(vec![1, expected], weights.to_vec())?))
}

/// Gating MLP over [t′ ∥ contexts…] producing softmax simplex weights;
/// z is the weighted sum of the inputs.
pub struct SoftmaxGateFusion;

impl FusionStrategy for SoftmaxGateFusion {
    fn name(&self) -> &'static str {
        "softmax3"
    }

    fn kind(&self) -> FusionKind {
        FusionKind::Softmax3
    }

    fn fused_width(&self, cfg: &ModelConfig, _n_contexts: usize) -> usize {
        cfg.d_attn
    }

    fn init_params(
        &self,
        cfg: &ModelConfig,
        n_contexts: usize,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()> {
        let n = 1 + n_contexts;
        let in_w = n * cfg.d_attn;
        params.insert(
            "gate.mlp.w1",
            glorot(rng, in_w, cfg.d_hidden, vec![in_w, cfg.d_hidden]),
        )?;
        params.insert("gate.mlp.b1", Tensor::zeros(vec![cfg.d_hidden]))?;
        params.insert(
            "gate.mlp.w2",
            glorot(rng, cfg.d_hidden, n, vec![cfg.d_hidden, n]),
        )?;
        params.insert("gate.mlp.b2", Tensor::zeros(vec![n]))
    }

    fn fuse(
        &self,
        tape: &mut Tape,
        cfg: &ModelConfig,
        pv: &ParamVars,
        t_proj: Var,
        contexts: &[Var],
        override_weights: Option<&[f64]>,
    ) -> Result<Fused> {
        let mut parts = vec![t_proj];
        parts.extend_from_slice(contexts);
        let n = parts.len();
        let stacked = tape.concat(&parts, 0)?; // [n × d_attn]

        let lambda = match override_weights {
            Some(w) => override_var(tape, w, n)?,
            None => {
                let gate_in = tape.concat(&parts, 1)?; // [1 × n·d_attn]
                let w1 = pv.get("gate.mlp.w1")?;
                let b1 = pv.get("gate.mlp.b1")?;
                let w2 = pv.get("gate.mlp.w2")?;
                let b2 = pv.get("gate.mlp.b2")?;
                let h1 = tape.matmul(gate_in, w1)?;
                let b1r = tape.reshape(b1, vec![1, cfg.d_hidden])?;
                let h1 = tape.add(h1, b1r)?;
                let h1 = tape.relu(h1)?;
                let logits = tape.matmul(h1, w2)?;
                let b2r = tape.reshape(b2, vec![1, n])?;
                let logits = tape.add(logits, b2r)?;
                tape.softmax(logits, None)?
            }
        };
        let z = tape.matmul(lambda, stacked)?;
        Ok(Fused {
            z,
            gate: Some(lambda),
        })
    }
}

/// Single affine layer + sigmoid over the concatenated contexts; the
/// weighted context sum is concatenated with t′ before the head. With
/// no non-text contexts this degrades to z = t′.
pub struct SigmoidGateFusion;

impl FusionStrategy for SigmoidGateFusion {
    fn name(&self) -> &'static str {
        "sigmoid2"
    }

    fn kind(&self) -> FusionKind {
        FusionKind::Sigmoid2
    }

    fn fused_width(&self, cfg: &ModelConfig, n_contexts: usize) -> usize {
        if n_contexts == 0 {
            cfg.d_attn
        } else {
            2 * cfg.d_attn
        }
    }

    fn init_params(
        &self,
        cfg: &ModelConfig,
        n_contexts: usize,
        rng: &mut ChaCha8Rng,
        params: &mut ParamSet,
    ) -> Result<()> {
        if n_contexts == 0 {
            return Ok(());
        }
        let in_w = n_contexts * cfg.d_attn;
        params.insert(
            "gate.sig.w",
            glorot(rng, in_w, n_contexts, vec![in_w, n_contexts]),
        )?;
        params.insert("gate.sig.b", Tensor::zeros(vec![n_contexts]))
    }

    fn fuse(
        &self,
        tape: &mut Tape,
        _cfg: &ModelConfig,
        pv: &ParamVars,
        t_proj: Var,
        contexts: &[Var],
        override_weights: Option<&[f64]>,
    ) -> Result<Fused> {
        let m = contexts.len();
        if m == 0 {
            return Ok(Fused {
                z: t_proj,
                gate: None,
            });
        }
        let weights = match override_weights {
            Some(w) => override_var(tape, w, m)?,
            None => {
                let gate_in = tape.concat(contexts, 1)?;
                let w = pv.get("gate.sig.w")?;
                let b = pv.get("gate.sig.b")?;
                let pre = tape.matmul(gate_in, w)?;
                let br = tape.reshape(b, vec![1, m])?;
                let pre = tape.add(pre, br)?;
                tape.sigmoid(pre)?
            }
        };
        let stacked = tape.concat(contexts, 0)?; // [m × d_attn]
        let h_fused = tape.matmul(weights, stacked)?;
        let z = tape.concat(&[t_proj, h_fused], 1)?;
        Ok(Fused {
            z,
            gate: Some(weights),
        })
    }
}

/// Plain concatenation [t′ ∥ contexts…] with no adaptive weighting.
pub struct StaticConcatFusion;

impl FusionStrategy for StaticConcatFusion {
    fn name(&self) -> &'static str {
        "static_concat"
    }

    fn kind(&self) -> FusionKind {
        FusionKind::StaticConcat
    }

    fn fused_width(&self, cfg: &ModelConfig, n_contexts: usize) -> usize {
        (1 + n_contexts) * cfg.d_attn
    }

    fn init_params(
        &self,
        _cfg: &ModelConfig,
        _n_contexts: usize,
        _rng: &mut ChaCha8Rng,
        _params: &mut ParamSet,
    ) -> Result<()> {
        Ok(())
    }

    fn fuse(
        &self,
        tape: &mut Tape,
        _cfg: &ModelConfig,
        _pv: &ParamVars,
        t_proj: Var,
        contexts: &[Var],
        _override_weights: Option<&[f64]>,
    ) -> Result<Fused> {
        let mut parts = vec![t_proj];
        parts.extend_from_slice(contexts);
        let z = tape.concat(&parts, 1)?;
        Ok(Fused { z, gate: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            d_attn: 3,
            d_hidden: 4,
            ..ModelConfig::default()
        }
    }

    fn zero_gate_params(cfg: &ModelConfig, n_contexts: usize) -> ParamSet {
        let n = 1 + n_contexts;
        let mut p = ParamSet::new();
        p.insert("gate.mlp.w1", Tensor::zeros(vec![n * cfg.d_attn, cfg.d_hidden]))
            .unwrap();
        p.insert("gate.mlp.b1", Tensor::zeros(vec![cfg.d_hidden])).unwrap();
        p.insert("gate.mlp.w2", Tensor::zeros(vec![cfg.d_hidden, n])).unwrap();
        p.insert("gate.mlp.b2", Tensor::zeros(vec![n])).unwrap();
        p
    }

    fn row(tape: &mut Tape, v: &[f64]) -> Var {
        tape.constant(Tensor::new(vec![1, v.len()], v.to_vec()).unwrap())
    }

    #[test]
    fn registry_resolves_all_names() {
        for (name, kind) in [
            ("softmax3", FusionKind::Softmax3),
            ("sigmoid2", FusionKind::Sigmoid2),
            ("static", FusionKind::StaticConcat),
            ("static_concat", FusionKind::StaticConcat),
        ] {
            assert_eq!(by_name(name).unwrap().kind(), kind);
        }
        assert!(by_name("late").is_err());
        assert_eq!(registry().len(), 3);
    }

    #[test]
    fn zero_gate_weights_give_uniform_simplex() {
        let cfg = tiny_cfg();
        let params = zero_gate_params(&cfg, 2);
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 2.0, 3.0]);
        let a = row(&mut tape, &[4.0, 5.0, 6.0]);
        let v = row(&mut tape, &[7.0, 8.0, 9.0]);
        let fused = SOFTMAX3.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        for &l in tape.value(fused.gate.unwrap()).data() {
            assert!((l - 1.0 / 3.0).abs() < 1e-15);
        }
        // z = mean of the three inputs
        for (i, &z) in tape.value(fused.z).data().iter().enumerate() {
            let want = (1.0 + 4.0 + 7.0) / 3.0 + i as f64;
            assert!((z - want).abs() < 1e-12);
        }
    }

    #[test]
    fn known_logits_give_half_quarter_quarter() {
        // logits [ln 2, 0, 0] → softmax [0.5, 0.25, 0.25]; reach them
        // through b2 with zero weights.
        let cfg = tiny_cfg();
        let mut params = zero_gate_params(&cfg, 2);
        params.get_mut("gate.mlp.b2").unwrap().data_mut()[0] = 2.0_f64.ln();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 0.0, 0.0]);
        let a = row(&mut tape, &[0.0, 1.0, 0.0]);
        let v = row(&mut tape, &[0.0, 0.0, 1.0]);
        let fused = SOFTMAX3.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        let lam = tape.value(fused.gate.unwrap());
        for (got, want) in lam.data().iter().zip([0.5, 0.25, 0.25]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in tape.value(fused.z).data().iter().zip([0.5, 0.25, 0.25]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn override_pins_the_gate() {
        let cfg = tiny_cfg();
        let params = zero_gate_params(&cfg, 2);
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 2.0, 3.0]);
        let a = row(&mut tape, &[-9.0, 4.0, 0.0]);
        let v = row(&mut tape, &[5.0, 5.0, 5.0]);
        let fused = SOFTMAX3
            .fuse(&mut tape, &cfg, &pv, t, &[a, v], Some(&[1.0, 0.0, 0.0]))
            .unwrap();
        assert_eq!(tape.value(fused.z).data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn equal_inputs_fuse_to_themselves_under_uniform_gate() {
        let cfg = tiny_cfg();
        let params = zero_gate_params(&cfg, 2);
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let u = [0.25, -1.5, 2.0];
        let t = row(&mut tape, &u);
        let a = row(&mut tape, &u);
        let v = row(&mut tape, &u);
        let fused = SOFTMAX3.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        for (z, want) in tape.value(fused.z).data().iter().zip(&u) {
            assert!((z - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_gate_zero_params_give_half_half() {
        let cfg = tiny_cfg();
        let mut params = ParamSet::new();
        params
            .insert("gate.sig.w", Tensor::zeros(vec![2 * cfg.d_attn, 2]))
            .unwrap();
        params.insert("gate.sig.b", Tensor::zeros(vec![2])).unwrap();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[0.0, 0.0, 1.0]);
        let a = row(&mut tape, &[2.0, 0.0, 0.0]);
        let v = row(&mut tape, &[0.0, 4.0, 0.0]);
        let fused = SIGMOID2.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        let w = tape.value(fused.gate.unwrap());
        assert_eq!(w.data(), &[0.5, 0.5]);
        // z = [t′ ∥ 0.5·a + 0.5·v]
        assert_eq!(tape.value(fused.z).data(), &[0.0, 0.0, 1.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn sigmoid_gate_saturates_with_large_bias() {
        let cfg = tiny_cfg();
        let mut params = ParamSet::new();
        params
            .insert("gate.sig.w", Tensor::zeros(vec![2 * cfg.d_attn, 2]))
            .unwrap();
        params
            .insert("gate.sig.b", Tensor::from_vec(vec![20.0, -20.0]))
            .unwrap();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[0.0; 3]);
        let a = row(&mut tape, &[1.0, 1.0, 1.0]);
        let v = row(&mut tape, &[1.0, 1.0, 1.0]);
        let fused = SIGMOID2.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        let w = tape.value(fused.gate.unwrap());
        assert!((w.data()[0] - 1.0).abs() < 1e-8);
        assert!(w.data()[1].abs() < 1e-8);
    }

    #[test]
    fn sigmoid_weights_stay_in_open_unit_interval() {
        use rand::Rng;
        let cfg = tiny_cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = ParamSet::new();
        SIGMOID2.init_params(&cfg, 2, &mut rng, &mut params).unwrap();
        for trial in 0..20 {
            let mut tape = Tape::new();
            let pv = params.register_on(&mut tape);
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let mut rand_row = |tape: &mut Tape| {
                let v: Vec<f64> = (0..cfg.d_attn).map(|_| rng.random_range(-5.0..5.0)).collect();
                tape.constant(Tensor::new(vec![1, cfg.d_attn], v).unwrap())
            };
            let t = rand_row(&mut tape);
            let a = rand_row(&mut tape);
            let v = rand_row(&mut tape);
            let fused = SIGMOID2.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
            for &w in tape.value(fused.gate.unwrap()).data() {
                assert!(w > 0.0 && w < 1.0);
            }
        }
    }

    #[test]
    fn sigmoid_without_contexts_passes_text_through() {
        let cfg = tiny_cfg();
        let params = ParamSet::new();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 2.0, 3.0]);
        let fused = SIGMOID2.fuse(&mut tape, &cfg, &pv, t, &[], None).unwrap();
        assert_eq!(tape.value(fused.z).data(), &[1.0, 2.0, 3.0]);
        assert!(fused.gate.is_none());
    }

    #[test]
    fn static_concat_stacks_in_order() {
        let cfg = tiny_cfg();
        let params = ParamSet::new();
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 0.0, 0.0]);
        let a = row(&mut tape, &[0.0, 1.0, 0.0]);
        let v = row(&mut tape, &[0.0, 0.0, 1.0]);
        let fused = STATIC.fuse(&mut tape, &cfg, &pv, t, &[a, v], None).unwrap();
        assert_eq!(
            tape.value(fused.z).data(),
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert!(fused.gate.is_none());
        assert_eq!(STATIC.fused_width(&cfg, 2), 9);
    }

    #[test]
    fn gate_arity_mismatch_in_override_is_an_error() {
        let cfg = tiny_cfg();
        let params = zero_gate_params(&cfg, 1);
        let mut tape = Tape::new();
        let pv = params.register_on(&mut tape);
        let t = row(&mut tape, &[1.0, 2.0, 3.0]);
        let a = row(&mut tape, &[0.0, 1.0, 0.0]);
        let err = SOFTMAX3
            .fuse(&mut tape, &cfg, &pv, t, &[a], Some(&[1.0, 0.0, 0.0]))
            .unwrap_err();
        assert!(err.to_string().contains("expected 2"));
    }
}
