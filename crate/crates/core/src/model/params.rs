//! Named parameter set.
//!
//! Parameters are kept as an ordered flat list of (name, tensor) so the
//! optimizer, gradient clipping, the gradient checker, and checkpoint
//! serialization can all enumerate them the same way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Modality, ModalitySet};
use crate::error::{DafError, Result};
use crate::model::{encoder, fusion, ModelConfig};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if self.get(&name).is_some() {
            return Err(DafError::InvalidArgument {
                op: "ParamSet::insert",
                detail: format!("duplicate parameter `{name}`"),
            });
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn entries(&self) -> &[(String, Tensor)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [(String, Tensor)] {
        &mut self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_elements(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Register every parameter as a differentiable leaf on `tape`.
    pub fn register_on(&self, tape: &mut Tape) -> ParamVars {
        ParamVars {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), tape.var(t.clone())))
                .collect(),
        }
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        for (name, t) in &self.entries {
            if !t.is_all_finite() {
                return Err(DafError::NonFinite {
                    context: format!("{context}: parameter `{name}`"),
                });
            }
        }
        Ok(())
    }
}

/// Tape handles for one registration of a [`ParamSet`], in the same
/// order.
pub struct ParamVars {
    entries: Vec<(String, Var)>,
}

impl ParamVars {
    /// Pair parameter names with vars registered by someone else (the
    /// gradient checker creates the leaves itself, in parameter order).
    pub fn from_order<'a>(names: impl Iterator<Item = &'a str>, vars: &[Var]) -> Self {
        ParamVars {
            entries: names
                .zip(vars)
                .map(|(n, v)| (n.to_string(), *v))
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Result<Var> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| DafError::InvalidArgument {
                op: "ParamVars::get",
                detail: format!("no parameter named `{name}`"),
            })
    }

    pub fn entries(&self) -> &[(String, Var)] {
        &self.entries
    }
}

/// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
pub(crate) fn glorot(
    rng: &mut ChaCha8Rng,
    fan_in: usize,
    fan_out: usize,
    shape: Vec<usize>,
) -> Tensor {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-s..s)).collect();
    Tensor::new(shape, data).expect("shape/data agree by construction")
}

/// Build the full parameter set for a configuration and modality set.
///
/// Parameters are created (and random draws consumed) in a fixed
/// order: text projection, audio encoder, video encoder, attention
/// score matrices, gate, head. Weights are Glorot-uniform, biases
/// zero, all driven by `cfg.seed`.
pub fn init_params(cfg: &ModelConfig, modalities: ModalitySet) -> Result<ParamSet> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ParamSet::new();

    params.insert(
        "text.proj.w",
        glorot(&mut rng, cfg.d_text, cfg.d_attn, vec![cfg.d_text, cfg.d_attn]),
    )?;
    params.insert("text.proj.b", Tensor::zeros(vec![cfg.d_attn]))?;

    let enc = encoder::by_kind(cfg.encoder_kind);
    for m in [Modality::Audio, Modality::Video] {
        if modalities.contains(m) {
            enc.init_params(
                cfg,
                cfg.input_width(m),
                &format!("enc.{}", m.as_str()),
                &mut rng,
                &mut params,
            )?;
        }
    }
    for m in [Modality::Audio, Modality::Video] {
        if modalities.contains(m) {
            params.insert(
                format!("attn.{}.w", m.as_str()),
                glorot(&mut rng, cfg.d_attn, cfg.d_attn, vec![cfg.d_attn, cfg.d_attn]),
            )?;
        }
    }

    let strategy = fusion::by_kind(cfg.gate_kind);
    let n_contexts = modalities.context_count();
    strategy.init_params(cfg, n_contexts, &mut rng, &mut params)?;

    let z_width = strategy.fused_width(cfg, n_contexts);
    params.insert(
        "head.hidden.w",
        glorot(&mut rng, z_width, cfg.d_hidden, vec![z_width, cfg.d_hidden]),
    )?;
    params.insert("head.hidden.b", Tensor::zeros(vec![cfg.d_hidden]))?;
    params.insert(
        "head.out.w",
        glorot(&mut rng, cfg.d_hidden, 1, vec![cfg.d_hidden, 1]),
    )?;
    params.insert("head.out.b", Tensor::zeros(vec![1]))?;

    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FusionKind;

    #[test]
    fn init_is_deterministic_and_finite() {
        let cfg = ModelConfig::default();
        let a = init_params(&cfg, ModalitySet::all()).unwrap();
        let b = init_params(&cfg, ModalitySet::all()).unwrap();
        assert_eq!(a, b);
        a.check_finite("init").unwrap();
    }

    #[test]
    fn shapes_follow_config() {
        let cfg = ModelConfig::default();
        let p = init_params(&cfg, ModalitySet::all()).unwrap();
        assert_eq!(p.get("text.proj.w").unwrap().shape(), &[768, 32]);
        assert_eq!(p.get("attn.audio.w").unwrap().shape(), &[32, 32]);
        assert_eq!(p.get("attn.video.w").unwrap().shape(), &[32, 32]);
        // softmax3 fuses to d_attn
        assert_eq!(p.get("head.hidden.w").unwrap().shape(), &[32, 32]);
        assert_eq!(p.get("head.out.w").unwrap().shape(), &[32, 1]);
    }

    #[test]
    fn static_concat_widens_the_head() {
        let cfg = ModelConfig {
            gate_kind: FusionKind::StaticConcat,
            ..ModelConfig::default()
        };
        let p = init_params(&cfg, ModalitySet::all()).unwrap();
        assert_eq!(p.get("head.hidden.w").unwrap().shape(), &[96, 32]);
        assert!(p.get("gate.mlp.w1").is_none());
    }

    #[test]
    fn text_only_omits_encoder_and_attention_params() {
        let cfg = ModelConfig::default();
        let p = init_params(&cfg, ModalitySet::text_only()).unwrap();
        assert!(p.get("enc.audio.out.w").is_none());
        assert!(p.get("attn.video.w").is_none());
        // gate still exists: softmax over the single text input
        assert_eq!(p.get("gate.mlp.w2").unwrap().shape(), &[32, 1]);
    }

    #[test]
    fn duplicate_parameter_names_are_rejected() {
        let mut p = ParamSet::new();
        p.insert("w", Tensor::scalar(1.0)).unwrap();
        assert!(p.insert("w", Tensor::scalar(2.0)).is_err());
    }
}
