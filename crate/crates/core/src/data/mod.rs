//! Dataset types, preprocessing, and batching.
//!
//! An [`Utterance`] is one aligned sample: a sentence-level text
//! embedding, frame-level audio and video feature sequences, and a
//! scalar label in [-3, 3]. [`collate`] scrubs non-finite values,
//! optionally L2-normalizes audio/video frames, pads sequences to the
//! batch maximum with zeros, and builds the attention masks.

mod format;
mod synthetic;

pub use format::{
    load_dataset, write_dataset, DatasetEncoding, Dims, LoadedDataset, Manifest, Splits,
};
pub use synthetic::{gen_synthetic, SyntheticData, SyntheticSpec};

use serde::{Deserialize, Serialize};

use crate::error::{DafError, Result};
use crate::tensor::Tensor;

pub const D_TEXT: usize = 768;
pub const D_AUDIO: usize = 74;
pub const D_VIDEO: usize = 35;
pub const LABEL_MIN: f64 = -3.0;
pub const LABEL_MAX: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Text,
    Audio,
    Video,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Text => "text",
            Modality::Audio => "audio",
            Modality::Video => "video",
        }
    }
}

impl std::str::FromStr for Modality {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "text" => Ok(Modality::Text),
            "audio" => Ok(Modality::Audio),
            "video" => Ok(Modality::Video),
            other => Err(DafError::Config(format!("unknown modality `{other}`"))),
        }
    }
}

/// Which modalities participate in a run. Text is the anchor modality
/// and is always present.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalitySet {
    pub audio: bool,
    pub video: bool,
}

impl Default for ModalitySet {
    fn default() -> Self {
        ModalitySet {
            audio: true,
            video: true,
        }
    }
}

impl ModalitySet {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn text_only() -> Self {
        ModalitySet {
            audio: false,
            video: false,
        }
    }

    pub fn contains(self, m: Modality) -> bool {
        match m {
            Modality::Text => true,
            Modality::Audio => self.audio,
            Modality::Video => self.video,
        }
    }

    /// Number of non-text modalities present.
    pub fn context_count(self) -> usize {
        self.audio as usize + self.video as usize
    }

    /// Remove one modality. Text cannot be dropped — the architecture
    /// is text-anchored and has no audio-only or video-only path.
    pub fn without(self, which: Modality) -> Result<Self> {
        match which {
            Modality::Text => Err(DafError::Config(
                "cannot drop text: it is the anchor modality".to_string(),
            )),
            Modality::Audio => Ok(ModalitySet {
                audio: false,
                ..self
            }),
            Modality::Video => Ok(ModalitySet {
                video: false,
                ..self
            }),
        }
    }

    /// Parse a comma-separated list such as `text,audio,video`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut text = false;
        let mut set = ModalitySet::text_only();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            match part.parse::<Modality>()? {
                Modality::Text => text = true,
                Modality::Audio => set.audio = true,
                Modality::Video => set.video = true,
            }
        }
        if !text {
            return Err(DafError::Config(format!(
                "modality set `{s}` must include text"
            )));
        }
        Ok(set)
    }

    /// Row label in the style of the modality-comparison table.
    pub fn label(self) -> &'static str {
        match (self.audio, self.video) {
            (false, false) => "Text only",
            (true, false) => "Text + Audio",
            (false, true) => "Text + Video",
            (true, true) => "Text + Audio + Video",
        }
    }

    /// Which pretrained embeddings feed this modality set.
    pub fn embedding_label(self) -> &'static str {
        match (self.audio, self.video) {
            (false, false) => "BERT",
            (true, false) => "BERT + COVAREP",
            (false, true) => "BERT + FACET",
            (true, true) => "BERT + COVAREP + FACET",
        }
    }

    pub fn flag_string(self) -> String {
        let mut parts = vec!["text"];
        if self.audio {
            parts.push("audio");
        }
        if self.video {
            parts.push("video");
        }
        parts.join(",")
    }
}

/// One aligned sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Utterance {
    pub id: String,
    /// Sentiment in [-3, 3].
    pub label: f64,
    /// Sentence embedding, shape [768].
    pub text: Tensor,
    /// Acoustic frames, shape [T_a, 74].
    pub audio: Tensor,
    /// Facial-feature frames, shape [T_v, 35].
    pub video: Tensor,
}

/// A borrowed split plus the modalities a run actually consumes.
#[derive(Clone, Copy)]
pub struct DatasetView<'a> {
    pub samples: &'a [Utterance],
    pub modalities: ModalitySet,
}

impl<'a> DatasetView<'a> {
    pub fn new(samples: &'a [Utterance]) -> Self {
        DatasetView {
            samples,
            modalities: ModalitySet::all(),
        }
    }

    pub fn drop_modality(self, which: Modality) -> Result<Self> {
        Ok(DatasetView {
            samples: self.samples,
            modalities: self.modalities.without(which)?,
        })
    }
}

/// Padded frame sequences for one modality across a batch.
#[derive(Clone, Debug)]
pub struct SeqBatch {
    /// Shape [B, T_max, d]; padded cells are exactly 0.
    pub frames: Tensor,
    /// mask[b][t] is true for real frames. True-counts equal the
    /// original sequence lengths.
    pub mask: Vec<Vec<bool>>,
}

impl SeqBatch {
    /// Frames and mask for one batch element.
    pub fn sample(&self, i: usize) -> Result<(Tensor, &[bool])> {
        Ok((self.frames.index_axis0(i)?, &self.mask[i]))
    }
}

/// A preprocessed mini-batch ready for the forward pass.
#[derive(Clone, Debug)]
pub struct Batch {
    /// Shape [B, 768].
    pub text: Tensor,
    pub audio: Option<SeqBatch>,
    pub video: Option<SeqBatch>,
    pub labels: Vec<f64>,
    pub ids: Vec<String>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CollateOptions {
    /// Per-frame L2 normalization of audio and video features. Text is
    /// never normalized.
    pub l2_normalize: bool,
    pub modalities: ModalitySet,
}

impl Default for CollateOptions {
    fn default() -> Self {
        CollateOptions {
            l2_normalize: true,
            modalities: ModalitySet::all(),
        }
    }
}

/// Replace every NaN/inf entry with 0. Finite entries pass through.
pub fn scrub(mut t: Tensor) -> Tensor {
    for v in t.data_mut() {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    t
}

/// Divide each frame (row) by its Euclidean norm. Frames with norm
/// below 1e-12 — in particular all-zero frames — are left unchanged.
pub fn l2_normalize(mut frames: Tensor) -> Tensor {
    let cols = *frames.shape().last().unwrap_or(&0);
    if cols == 0 {
        return frames;
    }
    let data = frames.data_mut();
    for row in data.chunks_mut(cols) {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for v in row {
                *v /= norm;
            }
        }
    }
    frames
}

/// Assemble a padded, masked, preprocessed batch. Sample order is
/// preserved.
pub fn collate(samples: &[&Utterance], opts: &CollateOptions) -> Result<Batch> {
    if samples.is_empty() {
        return Err(DafError::EmptyInput("collate"));
    }
    let b = samples.len();
    let d_text = samples[0].text.len();
    let mut text = vec![0.0; b * d_text];
    for (i, s) in samples.iter().enumerate() {
        if s.text.len() != d_text {
            return Err(DafError::ShapeMismatch {
                op: "collate",
                lhs: vec![d_text],
                rhs: s.text.shape().to_vec(),
            });
        }
        let cleaned = scrub(s.text.clone());
        text[i * d_text..(i + 1) * d_text].copy_from_slice(cleaned.data());
    }
    let text = Tensor::new(vec![b, d_text], text)?;

    let pack = |pick: &dyn Fn(&Utterance) -> &Tensor| -> Result<SeqBatch> {
        let dim = pick(samples[0]).shape()[1];
        let t_max = samples
            .iter()
            .map(|s| pick(s).shape()[0])
            .max()
            .unwrap_or(0);
        let mut frames = vec![0.0; b * t_max * dim];
        let mut mask = Vec::with_capacity(b);
        for (i, s) in samples.iter().enumerate() {
            let seq = pick(s);
            if seq.rank() != 2 || seq.shape()[1] != dim {
                return Err(DafError::ShapeMismatch {
                    op: "collate",
                    lhs: vec![t_max, dim],
                    rhs: seq.shape().to_vec(),
                });
            }
            let len = seq.shape()[0];
            let mut cleaned = scrub(seq.clone());
            if opts.l2_normalize {
                cleaned = l2_normalize(cleaned);
            }
            let base = i * t_max * dim;
            frames[base..base + len * dim].copy_from_slice(cleaned.data());
            let mut row = vec![true; len];
            row.resize(t_max, false);
            mask.push(row);
        }
        Ok(SeqBatch {
            frames: Tensor::new(vec![b, t_max, dim], frames)?,
            mask,
        })
    };

    let audio = if opts.modalities.audio {
        Some(pack(&|s: &Utterance| &s.audio)?)
    } else {
        None
    };
    let video = if opts.modalities.video {
        Some(pack(&|s: &Utterance| &s.video)?)
    } else {
        None
    };

    Ok(Batch {
        text,
        audio,
        video,
        labels: samples.iter().map(|s| s.label).collect(),
        ids: samples.iter().map(|s| s.id.clone()).collect(),
    })
}

/// Collate an owned slice (convenience for whole-split batches).
pub fn collate_all(samples: &[Utterance], opts: &CollateOptions) -> Result<Batch> {
    let refs: Vec<&Utterance> = samples.iter().collect();
    collate(&refs, opts)
}

/// Zero a modality's features in place, keeping sequence lengths. Used
/// by the `zero_input` missing-modality policy.
pub fn zero_modality(samples: &mut [Utterance], which: Modality) -> Result<()> {
    if which == Modality::Text {
        return Err(DafError::Config(
            "cannot zero text: it is the anchor modality".to_string(),
        ));
    }
    for s in samples {
        let t = match which {
            Modality::Audio => &mut s.audio,
            Modality::Video => &mut s.video,
            Modality::Text => unreachable!(),
        };
        t.data_mut().iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(id: &str, t_a: usize, t_v: usize) -> Utterance {
        Utterance {
            id: id.to_string(),
            label: 1.0,
            text: Tensor::from_vec(vec![0.5; 4]),
            audio: Tensor::new(vec![t_a, 3], (0..t_a * 3).map(|i| i as f64).collect()).unwrap(),
            video: Tensor::new(vec![t_v, 2], vec![1.0; t_v * 2]).unwrap(),
        }
    }

    #[test]
    fn scrub_replaces_nonfinite_with_zero() {
        let t = Tensor::from_vec(vec![1.0, f64::NAN, f64::NEG_INFINITY]);
        let s = scrub(t);
        assert_eq!(s.data(), &[1.0, 0.0, 0.0]);
        // idempotent
        assert_eq!(scrub(s.clone()), s);
    }

    #[test]
    fn l2_normalize_three_four_five() {
        let t = Tensor::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0]]).unwrap();
        let n = l2_normalize(t);
        assert_eq!(n.data()[..2], [0.6, 0.8]);
        assert_eq!(n.data()[2..], [0.0, 0.0]);
    }

    #[test]
    fn l2_normalize_is_idempotent_within_1e12() {
        let t = Tensor::from_rows(&[vec![0.3, -1.9, 2.2]]).unwrap();
        let once = l2_normalize(t);
        let twice = l2_normalize(once.clone());
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn collate_pads_and_masks() {
        let a = sample("a", 2, 1);
        let b = sample("b", 5, 1);
        let batch = collate(&[&a, &b], &CollateOptions {
            l2_normalize: false,
            modalities: ModalitySet::all(),
        })
        .unwrap();
        let audio = batch.audio.unwrap();
        assert_eq!(audio.frames.shape(), &[2, 5, 3]);
        assert_eq!(audio.mask[0], vec![true, true, false, false, false]);
        assert_eq!(audio.mask[1], vec![true; 5]);
        // padded cells are exactly zero
        let (frames, _) = {
            let f = audio.frames.index_axis0(0).unwrap();
            (f, ())
        };
        assert!(frames.data()[6..].iter().all(|&v| v == 0.0));
        assert_eq!(batch.ids, vec!["a", "b"]);
    }

    #[test]
    fn collate_batch_of_one_has_no_padding() {
        let a = sample("a", 3, 2);
        let batch = collate(&[&a], &CollateOptions::default()).unwrap();
        let audio = batch.audio.unwrap();
        assert_eq!(audio.frames.shape(), &[1, 3, 3]);
        assert!(audio.mask[0].iter().all(|&m| m));
    }

    #[test]
    fn drop_modality_removes_tensor_from_batch() {
        let a = sample("a", 2, 2);
        let view = DatasetView::new(std::slice::from_ref(&a));
        let view = view.drop_modality(Modality::Audio).unwrap();
        let batch = collate_all(
            view.samples,
            &CollateOptions {
                l2_normalize: true,
                modalities: view.modalities,
            },
        )
        .unwrap();
        assert!(batch.audio.is_none());
        assert!(batch.video.is_some());

        // dropping video as well leaves the text-only configuration
        let text_only = view.drop_modality(Modality::Video).unwrap();
        assert_eq!(text_only.modalities, ModalitySet::text_only());
        assert_eq!(text_only.modalities.label(), "Text only");
    }

    #[test]
    fn dropping_text_is_an_error() {
        let a = sample("a", 1, 1);
        let view = DatasetView::new(std::slice::from_ref(&a));
        assert!(view.drop_modality(Modality::Text).is_err());
    }

    #[test]
    fn modality_set_parsing() {
        assert_eq!(ModalitySet::parse("text,audio").unwrap(), ModalitySet {
            audio: true,
            video: false
        });
        assert!(ModalitySet::parse("audio,video").is_err());
        assert_eq!(
            ModalitySet::parse("text, video").unwrap().label(),
            "Text + Video"
        );
    }
}
