//! The fusion architecture.
//!
//! A text embedding is projected to the attention size; audio and
//! video frame sequences are encoded (linear or bidirectional gated
//! recurrent) and attended to with text-guided Luong attention; a
//! fusion strategy combines the projected text with the attended
//! context vectors; a ReLU hidden layer and a bounded output head
//! produce the sentiment prediction.
//!
//! Encoders and fusion strategies are interchangeable trait objects
//! selected by name at runtime — see [`encoder`] and [`fusion`].

pub mod attention;
pub mod checkpoint;
pub mod encoder;
pub mod forward;
pub mod fusion;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use forward::{
    eval_forward, forward_batch, head, text_project, BatchForward, ForwardTrace, Mode,
    ModalityTrace,
};
pub use params::{init_params, ParamSet, ParamVars};

use serde::{Deserialize, Serialize};

use crate::error::{DafError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Linear,
    BiRecurrent,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Linear => "linear",
            EncoderKind::BiRecurrent => "bi_recurrent",
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(EncoderKind::Linear),
            "bi_recurrent" | "bi-recurrent" => Ok(EncoderKind::BiRecurrent),
            other => Err(DafError::Config(format!("unknown encoder kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionKind {
    Softmax3,
    Sigmoid2,
    StaticConcat,
}

impl FusionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FusionKind::Softmax3 => "softmax3",
            FusionKind::Sigmoid2 => "sigmoid2",
            FusionKind::StaticConcat => "static_concat",
        }
    }

    pub const ALL: [FusionKind; 3] = [
        FusionKind::Softmax3,
        FusionKind::Sigmoid2,
        FusionKind::StaticConcat,
    ];
}

impl std::str::FromStr for FusionKind {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softmax3" => Ok(FusionKind::Softmax3),
            "sigmoid2" => Ok(FusionKind::Sigmoid2),
            "static" | "static_concat" => Ok(FusionKind::StaticConcat),
            other => Err(DafError::Config(format!(
                "unknown fusion variant `{other}` (expected softmax3, sigmoid2, or static)"
            ))),
        }
    }
}

impl std::fmt::Display for FusionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    /// ŷ = 3·tanh(·), matching the [-3, 3] label range.
    ScaledTanh,
    Linear,
}

impl std::str::FromStr for OutputActivation {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled_tanh" => Ok(OutputActivation::ScaledTanh),
            "linear" => Ok(OutputActivation::Linear),
            other => Err(DafError::Config(format!(
                "unknown output activation `{other}`"
            ))),
        }
    }
}

/// Architecture hyperparameters. Defaults reproduce the reference
/// setup: 768/74/35 input widths, attention projection 32, fusion
/// hidden size 32, bidirectional encoders, input dropout 0.2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_text: usize,
    pub d_audio: usize,
    pub d_video: usize,
    /// Attention projection size.
    pub d_attn: usize,
    /// Fusion-layer hidden size.
    pub d_hidden: usize,
    pub encoder_kind: EncoderKind,
    /// Per-direction recurrent width (bi_recurrent only).
    pub encoder_hidden: usize,
    pub gate_kind: FusionKind,
    pub input_dropout: f64,
    pub output_activation: OutputActivation,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_text: 768,
            d_audio: 74,
            d_video: 35,
            d_attn: 32,
            d_hidden: 32,
            encoder_kind: EncoderKind::BiRecurrent,
            encoder_hidden: 16,
            gate_kind: FusionKind::Softmax3,
            input_dropout: 0.2,
            output_activation: OutputActivation::ScaledTanh,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("d_text", self.d_text),
            ("d_audio", self.d_audio),
            ("d_video", self.d_video),
            ("d_attn", self.d_attn),
            ("d_hidden", self.d_hidden),
            ("encoder_hidden", self.encoder_hidden),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be positive"));
            }
        }
        if !(0.0..1.0).contains(&self.input_dropout) {
            problems.push(format!(
                "input_dropout {} must be in [0, 1)",
                self.input_dropout
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DafError::Config(problems.join("; ")))
        }
    }

    pub fn input_width(&self, m: crate::data::Modality) -> usize {
        match m {
            crate::data::Modality::Text => self.d_text,
            crate::data::Modality::Audio => self.d_audio,
            crate::data::Modality::Video => self.d_video,
        }
    }
}
