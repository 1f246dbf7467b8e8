//! Synthetic data with a known informative-modality oracle.
//!
//! Each sample draws a label s ~ U[-3, 3] and one informative modality
//! M. M's features carry (s/3)·direction_M plus Gaussian noise (every
//! real frame carries the signal); the other modalities are pure
//! noise. Which modality was informative is recorded per sample, so
//! tests can check that a learned gate actually routes weight to it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::format::Splits;
use crate::data::{Modality, Utterance, D_AUDIO, D_TEXT, D_VIDEO};
use crate::error::{DafError, Result};
use crate::tensor::Tensor;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub d_text: usize,
    pub d_audio: usize,
    pub d_video: usize,
    pub noise_std: f64,
    /// P(informative) for text, audio, video. Must sum to 1.
    pub modality_probs: [f64; 3],
    /// Inclusive range for audio/video sequence lengths.
    pub seq_len_range: (usize, usize),
    /// Train and val fractions; the remainder is test.
    pub split_fractions: (f64, f64),
    pub seed: u64,
    /// Unit signal directions (text, audio, video). Derived from the
    /// seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<[Vec<f64>; 3]>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_samples: 300,
            d_text: D_TEXT,
            d_audio: D_AUDIO,
            d_video: D_VIDEO,
            noise_std: 0.1,
            modality_probs: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            seq_len_range: (4, 12),
            split_fractions: (0.7, 0.15),
            seed: 7,
            directions: None,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n_samples == 0 {
            problems.push("n_samples must be positive".to_string());
        }
        for (name, d) in [
            ("d_text", self.d_text),
            ("d_audio", self.d_audio),
            ("d_video", self.d_video),
        ] {
            if d == 0 {
                problems.push(format!("{name} must be positive"));
            }
        }
        if self.noise_std < 0.0 {
            problems.push("noise_std must be >= 0".to_string());
        }
        let p_sum: f64 = self.modality_probs.iter().sum();
        if (p_sum - 1.0).abs() > 1e-9 || self.modality_probs.iter().any(|&p| p < 0.0) {
            problems.push(format!(
                "modality_probs must be nonnegative and sum to 1, got {:?}",
                self.modality_probs
            ));
        }
        let (lo, hi) = self.seq_len_range;
        if lo == 0 || lo > hi {
            problems.push(format!("seq_len_range ({lo}, {hi}) must satisfy 1 <= lo <= hi"));
        }
        let (ft, fv) = self.split_fractions;
        if !(0.0..1.0).contains(&ft) || !(0.0..1.0).contains(&fv) || ft + fv >= 1.0 {
            problems.push(format!(
                "split_fractions ({ft}, {fv}) must be in (0,1) with sum < 1"
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(DafError::Config(problems.join("; ")))
        }
    }

    fn dims_of(&self, m: Modality) -> usize {
        match m {
            Modality::Text => self.d_text,
            Modality::Audio => self.d_audio,
            Modality::Video => self.d_video,
        }
    }
}

pub struct SyntheticData {
    pub splits: Splits,
    /// Sample id → the modality that carries the label signal.
    pub oracle: BTreeMap<String, Modality>,
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let directions = match &spec.directions {
        Some(dirs) => {
            for (m, d) in [Modality::Text, Modality::Audio, Modality::Video]
                .iter()
                .zip(dirs)
            {
                if d.len() != spec.dims_of(*m) {
                    return Err(DafError::Config(format!(
                        "direction for {} has length {}, expected {}",
                        m.as_str(),
                        d.len(),
                        spec.dims_of(*m)
                    )));
                }
            }
            dirs.clone()
        }
        None => [
            unit_direction(&mut rng, spec.d_text),
            unit_direction(&mut rng, spec.d_audio),
            unit_direction(&mut rng, spec.d_video),
        ],
    };

    let noise = if spec.noise_std > 0.0 {
        Some(Normal::new(0.0, spec.noise_std).expect("validated std"))
    } else {
        None
    };
    let draw = |rng: &mut ChaCha8Rng| noise.map_or(0.0, |n| n.sample(rng));

    let n = spec.n_samples;
    let n_train = ((n as f64) * spec.split_fractions.0).round() as usize;
    let n_val = ((n as f64) * spec.split_fractions.1).round() as usize;

    let mut splits = Splits::default();
    let mut oracle = BTreeMap::new();
    for i in 0..n {
        let (split_name, local) = if i < n_train {
            ("train", i)
        } else if i < n_train + n_val {
            ("val", i - n_train)
        } else {
            ("test", i - n_train - n_val)
        };
        let id = format!("synth-{split_name}-{local:05}");
        let label: f64 = rng.random_range(-3.0..=3.0);
        let informative = pick_modality(&mut rng, &spec.modality_probs);
        let t_a = rng.random_range(spec.seq_len_range.0..=spec.seq_len_range.1);
        let t_v = rng.random_range(spec.seq_len_range.0..=spec.seq_len_range.1);
        let scale = label / 3.0;

        let vector = |m: Modality, rng: &mut ChaCha8Rng| -> Vec<f64> {
            let dir = &directions[m as usize];
            let signal = informative == m;
            dir.iter()
                .map(|&d| if signal { scale * d } else { 0.0 } + draw(rng))
                .collect()
        };

        let text = Tensor::from_vec(vector(Modality::Text, &mut rng));
        let mut audio = Vec::with_capacity(t_a * spec.d_audio);
        for _ in 0..t_a {
            audio.extend(vector(Modality::Audio, &mut rng));
        }
        let mut video = Vec::with_capacity(t_v * spec.d_video);
        for _ in 0..t_v {
            video.extend(vector(Modality::Video, &mut rng));
        }

        oracle.insert(id.clone(), informative);
        let sample = Utterance {
            id,
            label,
            text,
            audio: Tensor::new(vec![t_a, spec.d_audio], audio)?,
            video: Tensor::new(vec![t_v, spec.d_video], video)?,
        };
        match split_name {
            "train" => splits.train.push(sample),
            "val" => splits.val.push(sample),
            _ => splits.test.push(sample),
        }
    }

    Ok(SyntheticData { splits, oracle })
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        let v: Vec<f64> = (0..d).map(|_| normal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn pick_modality(rng: &mut ChaCha8Rng, probs: &[f64; 3]) -> Modality {
    let u: f64 = rng.random_range(0.0..1.0);
    if u < probs[0] {
        Modality::Text
    } else if u < probs[0] + probs[1] {
        Modality::Audio
    } else {
        Modality::Video
    }
}
