//! Resolved run configuration: defaults, then config file, then flags.
//! Validation problems are collected and reported all at once.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use daf_core::data::{ModalitySet, SyntheticSpec, Utterance};
use daf_core::model::{FusionKind, ModelConfig};
use daf_core::train::TrainConfig;
use daf_core::{DafError, Result};

use crate::args::CommonOpts;

pub const RUN_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Absent modalities shrink the gate arity.
    ReduceGate,
    /// Absent modalities stay in the architecture with zeroed features.
    ZeroInput,
}

impl std::str::FromStr for MissingPolicy {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduce_gate" => Ok(MissingPolicy::ReduceGate),
            "zero_input" => Ok(MissingPolicy::ZeroInput),
            other => Err(DafError::Config(format!(
                "unknown missing-modality policy `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Path(String),
    Synthetic(SyntheticSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub data: DataSource,
    pub modalities: ModalitySet,
    pub fusion: FusionKind,
    pub missing_policy: MissingPolicy,
    pub l2_norm: bool,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out_dir: String,
}

impl RunConfig {
    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("run config serializes")
    }

    pub fn out_path(&self) -> PathBuf {
        PathBuf::from(&self.out_dir)
    }
}

struct Resolver {
    map: BTreeMap<String, String>,
    problems: Vec<String>,
}

impl Resolver {
    fn take<T: std::str::FromStr>(&mut self, key: &str, current: T) -> T
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => current,
            Some(raw) => match raw.parse() {
                Ok(v) => v,
                Err(e) => {
                    self.problems.push(format!("{key} = `{raw}`: {e}"));
                    current
                }
            },
        }
    }
}

/// Merge defaults, the optional config file, and command-line flags
/// (flags win) into a fully resolved [`RunConfig`].
pub fn resolve(common: &CommonOpts) -> Result<RunConfig> {
    let map = match &common.config {
        Some(path) => crate::config_file::parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let mut r = Resolver {
        map,
        problems: Vec::new(),
    };

    let mut model = ModelConfig::default();
    model.d_text = r.take("model.d_text", model.d_text);
    model.d_audio = r.take("model.d_audio", model.d_audio);
    model.d_video = r.take("model.d_video", model.d_video);
    model.d_attn = r.take("model.d_attn", model.d_attn);
    model.d_hidden = r.take("model.d_hidden", model.d_hidden);
    model.encoder_kind = r.take("model.encoder", model.encoder_kind);
    model.encoder_hidden = r.take("model.encoder_hidden", model.encoder_hidden);
    model.input_dropout = r.take("model.dropout", model.input_dropout);
    model.output_activation = r.take("model.output_activation", model.output_activation);

    let mut train = TrainConfig::default();
    train.learning_rate = r.take("train.lr", train.learning_rate);
    train.batch_size = r.take("train.batch_size", train.batch_size);
    train.max_epochs = r.take("train.epochs", train.max_epochs);
    train.patience = r.take("train.patience", train.patience);
    train.clip_max_norm = r.take("train.clip", train.clip_max_norm);
    train.beta1 = r.take("train.beta1", train.beta1);
    train.beta2 = r.take("train.beta2", train.beta2);
    train.epsilon = r.take("train.epsilon", train.epsilon);
    train.min_improvement = r.take("train.min_improvement", train.min_improvement);

    let mut fusion: FusionKind = r.take("run.fusion", FusionKind::Softmax3);
    let mut missing_policy: MissingPolicy = r.take("run.missing_policy", MissingPolicy::ReduceGate);
    let mut modalities = match r.map.get("run.modalities") {
        None => ModalitySet::all(),
        Some(raw) => match ModalitySet::parse(raw) {
            Ok(m) => m,
            Err(e) => {
                r.problems.push(e.to_string());
                ModalitySet::all()
            }
        },
    };
    let mut l2_norm = match r.map.get("data.l2_norm").map(String::as_str) {
        None => true,
        Some("on") => true,
        Some("off") => false,
        Some(other) => {
            r.problems.push(format!("data.l2_norm = `{other}`: expected on/off"));
            true
        }
    };

    let mut data = r.map.get("data.path").cloned().map(DataSource::Path);
    if r.map.keys().any(|k| k.starts_with("data.synthetic.")) {
        if data.is_some() {
            r.problems
                .push("both data.path and data.synthetic.* are set".to_string());
        }
        let mut spec = SyntheticSpec::default();
        spec.n_samples = r.take("data.synthetic.n_samples", spec.n_samples);
        spec.d_text = model.d_text;
        spec.d_audio = model.d_audio;
        spec.d_video = model.d_video;
        spec.noise_std = r.take("data.synthetic.noise_std", spec.noise_std);
        spec.seed = r.take("data.synthetic.seed", spec.seed);
        let lo = r.take("data.synthetic.seq_min", spec.seq_len_range.0);
        let hi = r.take("data.synthetic.seq_max", spec.seq_len_range.1);
        spec.seq_len_range = (lo, hi);
        if let Some(raw) = r.map.get("data.synthetic.probs").cloned() {
            match parse_probs(&raw) {
                Ok(p) => spec.modality_probs = p,
                Err(e) => r.problems.push(e.to_string()),
            }
        }
        data = Some(DataSource::Synthetic(spec));
    }

    let mut seeds: Vec<u64> = match r.map.get("run.seeds").cloned() {
        None => vec![0],
        Some(raw) => match parse_seeds(&raw) {
            Ok(s) => s,
            Err(e) => {
                r.problems.push(e.to_string());
                vec![0]
            }
        },
    };
    let mut out_dir = r
        .map
        .get("run.out")
        .cloned()
        .unwrap_or_else(|| "runs/out".to_string());

    // flags win
    if let Some(path) = &common.data {
        data = Some(DataSource::Path(path.display().to_string()));
    }
    if let Some(out) = &common.out {
        out_dir = out.display().to_string();
    }
    if let Some(raw) = &common.modalities {
        match ModalitySet::parse(raw) {
            Ok(m) => modalities = m,
            Err(e) => r.problems.push(e.to_string()),
        }
    }
    if let Some(raw) = &common.fusion {
        match raw.parse() {
            Ok(f) => fusion = f,
            Err(e) => r.problems.push(format!("{e}")),
        }
    }
    if let Some(raw) = &common.missing_policy {
        match raw.parse() {
            Ok(p) => missing_policy = p,
            Err(e) => r.problems.push(format!("{e}")),
        }
    }
    if let Some(raw) = &common.l2_norm {
        match raw.as_str() {
            "on" => l2_norm = true,
            "off" => l2_norm = false,
            other => r
                .problems
                .push(format!("--l2-norm `{other}`: expected on/off")),
        }
    }
    if let Some(lr) = common.lr {
        train.learning_rate = lr;
    }
    if let Some(epochs) = common.epochs {
        train.max_epochs = epochs;
        train.patience = train.patience.min(epochs);
    }
    if !common.seeds.is_empty() {
        seeds = common.seeds.clone();
    }
    if let Some(seed) = common.seed {
        seeds = vec![seed];
    }

    model.gate_kind = fusion;
    let mut problems = r.problems;
    if seeds.is_empty() {
        problems.push("seeds list is empty".to_string());
    }
    if data.is_none() {
        problems.push("no dataset: set --data, data.path, or data.synthetic.*".to_string());
    }
    if let Err(e) = model.validate() {
        problems.push(e.to_string());
    }
    if let Err(e) = train.validate() {
        problems.push(e.to_string());
    }
    if let Some(DataSource::Synthetic(spec)) = &data {
        if let Err(e) = spec.validate() {
            problems.push(e.to_string());
        }
    }
    if !problems.is_empty() {
        return Err(DafError::Config(problems.join("\n  - ")));
    }

    Ok(RunConfig {
        format_version: RUN_FORMAT_VERSION,
        data: data.expect("checked above"),
        modalities,
        fusion,
        missing_policy,
        l2_norm,
        model,
        train,
        seeds,
        out_dir,
    })
}

fn parse_probs(raw: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(DafError::Config(format!(
            "probs `{raw}`: expected three comma-separated numbers"
        )));
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .parse()
            .map_err(|e| DafError::Config(format!("probs `{raw}`: {e}")))?;
    }
    Ok(out)
}

pub fn parse_seeds(raw: &str) -> Result<Vec<u64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| DafError::Config(format!("seed `{s}`: {e}")))
        })
        .collect()
}

/// Apply the missing-modality policy: under `reduce_gate` the model
/// simply sees fewer modalities; under `zero_input` the full
/// architecture runs with the dropped modality's features zeroed.
pub fn apply_missing_policy(
    samples: &[Utterance],
    run: &RunConfig,
) -> Result<(Vec<Utterance>, ModalitySet)> {
    match run.missing_policy {
        MissingPolicy::ReduceGate => Ok((samples.to_vec(), run.modalities)),
        MissingPolicy::ZeroInput => {
            let mut cloned = samples.to_vec();
            for m in [daf_core::data::Modality::Audio, daf_core::data::Modality::Video] {
                if !run.modalities.contains(m) {
                    daf_core::data::zero_modality(&mut cloned, m)?;
                }
            }
            Ok((cloned, ModalitySet::all()))
        }
    }
}
