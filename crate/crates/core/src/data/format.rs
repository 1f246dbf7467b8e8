//! Portable dataset layout.
//!
//! A dataset is a directory holding `manifest.json` plus one record
//! file per split. Two encodings carry the same logical schema:
//!
//! * JSONL — one object per line:
//!   `{"id": str, "label": float, "text": [768 floats],
//!     "audio": [[74 floats]…], "video": [[35 floats]…]}`.
//!   Non-finite values are encoded as the strings `"NaN"`, `"Inf"`,
//!   `"-Inf"`.
//! * Packed binary — little-endian, length-prefixed:
//!   file = magic `DAFDSET1` · u32 version · u64 record count · records;
//!   record = u32 id length · id bytes · f64 label
//!          · u32 text length · text f64s
//!          · u32 rows · u32 cols · audio f64s (row-major)
//!          · u32 rows · u32 cols · video f64s (row-major).
//!
//! Both encodings round-trip bit-for-bit. Records missing any modality
//! (an empty frame sequence or empty text) are dropped and counted,
//! never silently kept.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::data::{Utterance, LABEL_MAX, LABEL_MIN};
use crate::error::{DafError, Result};
use crate::tensor::Tensor;

const BINARY_MAGIC: &[u8; 8] = b"DAFDSET1";
const BINARY_VERSION: u32 = 1;
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub text: usize,
    pub audio: usize,
    pub video: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dims: Dims,
    pub label_range: [f64; 2],
    /// Split name → record file name, relative to the dataset dir.
    pub splits: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetEncoding {
    Jsonl,
    Binary,
}

impl DatasetEncoding {
    fn extension(self) -> &'static str {
        match self {
            DatasetEncoding::Jsonl => "jsonl",
            DatasetEncoding::Binary => "bin",
        }
    }
}

impl std::str::FromStr for DatasetEncoding {
    type Err = DafError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(DatasetEncoding::Jsonl),
            "binary" | "bin" => Ok(DatasetEncoding::Binary),
            other => Err(DafError::Config(format!("unknown encoding `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Splits {
    pub train: Vec<Utterance>,
    pub val: Vec<Utterance>,
    pub test: Vec<Utterance>,
}

impl Splits {
    pub fn get(&self, name: &str) -> Option<&[Utterance]> {
        match name {
            "train" => Some(&self.train),
            "val" => Some(&self.val),
            "test" => Some(&self.test),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct LoadedDataset {
    pub manifest: Manifest,
    pub splits: Splits,
    /// Per-split count of records dropped for missing modalities.
    pub dropped: BTreeMap<String, usize>,
}

impl LoadedDataset {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }
}

// ── Writing ─────────────────────────────────────────────────────────

/// Write `splits` under `dir` in the documented layout. The writer is
/// canonical: identical inputs produce identical bytes.
pub fn write_dataset(
    dir: &Path,
    splits: &Splits,
    dims: Dims,
    encoding: DatasetEncoding,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut names = BTreeMap::new();
    for split in ["train", "val", "test"] {
        names.insert(
            split.to_string(),
            format!("{split}.{}", encoding.extension()),
        );
    }
    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        dims,
        label_range: [LABEL_MIN, LABEL_MAX],
        splits: names.clone(),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    fs::write(dir.join("manifest.json"), manifest_bytes)?;

    for (split, file) in &names {
        let samples = splits.get(split).expect("fixed split names");
        let path = dir.join(file);
        match encoding {
            DatasetEncoding::Jsonl => write_jsonl(&path, samples)?,
            DatasetEncoding::Binary => write_binary(&path, samples)?,
        }
    }
    Ok(())
}

/// Serialize feature floats, spelling out non-finite values.
struct FloatCell(f64);

impl Serialize for FloatCell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("NaN")
        } else if self.0 > 0.0 {
            s.serialize_str("Inf")
        } else {
            s.serialize_str("-Inf")
        }
    }
}

struct FloatRow<'a>(&'a [f64]);

impl Serialize for FloatRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for &v in self.0 {
            seq.serialize_element(&FloatCell(v))?;
        }
        seq.end()
    }
}

struct FrameMatrix<'a>(&'a Tensor);

impl Serialize for FrameMatrix<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.0.shape()[0];
        let cols = self.0.shape()[1];
        let mut seq = s.serialize_seq(Some(rows))?;
        for r in 0..rows {
            seq.serialize_element(&FloatRow(&self.0.data()[r * cols..(r + 1) * cols]))?;
        }
        seq.end()
    }
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    label: f64,
    text: FloatRow<'a>,
    audio: FrameMatrix<'a>,
    video: FrameMatrix<'a>,
}

fn write_jsonl(path: &Path, samples: &[Utterance]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for s in samples {
        check_label(&s.id, s.label)?;
        let rec = RecordOut {
            id: &s.id,
            label: s.label,
            text: FloatRow(s.text.data()),
            audio: FrameMatrix(&s.audio),
            video: FrameMatrix(&s.video),
        };
        let line = serde_json::to_string(&rec)?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn write_binary(path: &Path, samples: &[Utterance]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(samples.len() as u64).to_le_bytes())?;
    for s in samples {
        check_label(&s.id, s.label)?;
        out.write_all(&(s.id.len() as u32).to_le_bytes())?;
        out.write_all(s.id.as_bytes())?;
        out.write_all(&s.label.to_le_bytes())?;
        out.write_all(&(s.text.len() as u32).to_le_bytes())?;
        write_f64s(&mut out, s.text.data())?;
        for t in [&s.audio, &s.video] {
            out.write_all(&(t.shape()[0] as u32).to_le_bytes())?;
            out.write_all(&(t.shape()[1] as u32).to_le_bytes())?;
            write_f64s(&mut out, t.data())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_f64s<W: Write>(out: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn check_label(id: &str, label: f64) -> Result<()> {
    if !label.is_finite() || !(LABEL_MIN..=LABEL_MAX).contains(&label) {
        return Err(DafError::Data(format!(
            "record `{id}`: label {label} outside [{LABEL_MIN}, {LABEL_MAX}]"
        )));
    }
    Ok(())
}

// ── Loading ─────────────────────────────────────────────────────────

/// Load a dataset directory: parse the manifest, then every split
/// file it names. Records missing any modality are dropped and
/// counted; malformed records and dimension mismatches are errors.
pub fn load_dataset(dir: &Path) -> Result<LoadedDataset> {
    let manifest_path = find_manifest(dir)?;
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(DafError::Data(format!(
            "unsupported dataset format version {}",
            manifest.format_version
        )));
    }

    let mut splits = Splits::default();
    let mut dropped = BTreeMap::new();
    for (split, file) in &manifest.splits {
        let path = dir.join(file);
        let (samples, n_dropped) = if file.ends_with(".bin") {
            load_binary(&path, &manifest)?
        } else {
            load_jsonl(&path, &manifest)?
        };
        dropped.insert(split.clone(), n_dropped);
        match split.as_str() {
            "train" => splits.train = samples,
            "val" => splits.val = samples,
            "test" => splits.test = samples,
            other => {
                return Err(DafError::Data(format!(
                    "manifest names unknown split `{other}`"
                )))
            }
        }
    }
    Ok(LoadedDataset {
        manifest,
        splits,
        dropped,
    })
}

fn find_manifest(dir: &Path) -> Result<PathBuf> {
    for name in ["manifest.json", "manifest"] {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(DafError::Data(format!(
        "no manifest.json in {}",
        dir.display()
    )))
}

fn load_jsonl(path: &Path, manifest: &Manifest) -> Result<(Vec<Utterance>, usize)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut samples = Vec::new();
    let mut dropped = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = format!("{}:{}", path.display(), lineno + 1);
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| DafError::Data(format!("{at}: malformed record: {e}")))?;
        match parse_record(&value, manifest, &at)? {
            Some(u) => samples.push(u),
            None => dropped += 1,
        }
    }
    Ok((samples, dropped))
}

fn parse_record(
    value: &serde_json::Value,
    manifest: &Manifest,
    at: &str,
) -> Result<Option<Utterance>> {
    let obj = value
        .as_object()
        .ok_or_else(|| DafError::Data(format!("{at}: record is not an object")))?;
    let id = obj
        .get("id")
        .and_then(|v| v.as_str())
        .ok_or_else(|| DafError::Data(format!("{at}: missing string field `id`")))?
        .to_string();
    let label = obj
        .get("label")
        .and_then(|v| v.as_f64())
        .ok_or_else(|| DafError::Data(format!("{at}: record `{id}`: missing numeric label")))?;
    let [lo, hi] = manifest.label_range;
    if !label.is_finite() || label < lo || label > hi {
        return Err(DafError::Data(format!(
            "{at}: record `{id}`: label {label} out of range [{lo}, {hi}]"
        )));
    }

    let text = parse_floats(obj.get("text"), at, &id, "text")?;
    let audio = parse_frames(obj.get("audio"), at, &id, "audio")?;
    let video = parse_frames(obj.get("video"), at, &id, "video")?;

    // Missing modality → drop, mirroring the discard rule.
    if text.is_empty() || audio.is_empty() || video.is_empty() {
        return Ok(None);
    }

    if text.len() != manifest.dims.text {
        return Err(DafError::Data(format!(
            "{at}: record `{id}`: text width {} != manifest {}",
            text.len(),
            manifest.dims.text
        )));
    }
    let audio = frames_tensor(audio, manifest.dims.audio, at, &id, "audio")?;
    let video = frames_tensor(video, manifest.dims.video, at, &id, "video")?;

    Ok(Some(Utterance {
        id,
        label,
        text: Tensor::from_vec(text),
        audio,
        video,
    }))
}

fn frames_tensor(
    rows: Vec<Vec<f64>>,
    width: usize,
    at: &str,
    id: &str,
    field: &str,
) -> Result<Tensor> {
    for row in &rows {
        if row.len() != width {
            return Err(DafError::Data(format!(
                "{at}: record `{id}`: {field} frame width {} != manifest {width}",
                row.len()
            )));
        }
    }
    let n = rows.len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    Tensor::new(vec![n, width], data)
}

fn parse_floats(
    value: Option<&serde_json::Value>,
    at: &str,
    id: &str,
    field: &str,
) -> Result<Vec<f64>> {
    match value {
        None | Some(serde_json::Value::Null) => Ok(Vec::new()),
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|v| parse_float_cell(v, at, id, field))
            .collect(),
        Some(_) => Err(DafError::Data(format!(
            "{at}: record `{id}`: `{field}` must be an array"
        ))),
    }
}

fn parse_frames(
    value: Option<&serde_json::Value>,
    at: &str,
    id: &str,
    field: &str,
) -> Result<Vec<Vec<f64>>> {
    match value {
        None | Some(serde_json::Value::Null) => Ok(Vec::new()),
        Some(serde_json::Value::Array(rows)) => rows
            .iter()
            .map(|row| parse_floats(Some(row), at, id, field))
            .collect(),
        Some(_) => Err(DafError::Data(format!(
            "{at}: record `{id}`: `{field}` must be an array of frames"
        ))),
    }
}

fn parse_float_cell(v: &serde_json::Value, at: &str, id: &str, field: &str) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| {
            DafError::Data(format!("{at}: record `{id}`: non-f64 number in `{field}`"))
        }),
        serde_json::Value::String(s) => match s.as_str() {
            "NaN" => Ok(f64::NAN),
            "Inf" => Ok(f64::INFINITY),
            "-Inf" => Ok(f64::NEG_INFINITY),
            other => Err(DafError::Data(format!(
                "{at}: record `{id}`: unknown float literal `{other}` in `{field}`"
            ))),
        },
        _ => Err(DafError::Data(format!(
            "{at}: record `{id}`: `{field}` holds a non-number"
        ))),
    }
}

fn load_binary(path: &Path, manifest: &Manifest) -> Result<(Vec<Utterance>, usize)> {
    let mut reader = BufReader::new(fs::File::open(path)?);
    let at = path.display().to_string();
    let mut magic = [0u8; 8];
    reader
        .read_exact(&mut magic)
        .map_err(|_| DafError::Data(format!("{at}: truncated header")))?;
    if &magic != BINARY_MAGIC {
        return Err(DafError::Data(format!("{at}: bad magic")));
    }
    let version = read_u32(&mut reader, &at)?;
    if version != BINARY_VERSION {
        return Err(DafError::Data(format!(
            "{at}: unsupported binary version {version}"
        )));
    }
    let count = read_u64(&mut reader, &at)?;

    let mut samples = Vec::new();
    let mut dropped = 0;
    for rec in 0..count {
        let id_len = read_u32(&mut reader, &at)? as usize;
        let mut id_bytes = vec![0u8; id_len];
        reader
            .read_exact(&mut id_bytes)
            .map_err(|_| DafError::Data(format!("{at}: record {rec}: truncated id")))?;
        let id = String::from_utf8(id_bytes)
            .map_err(|_| DafError::Data(format!("{at}: record {rec}: id is not UTF-8")))?;
        let label = read_f64(&mut reader, &at)?;
        let [lo, hi] = manifest.label_range;
        if !label.is_finite() || label < lo || label > hi {
            return Err(DafError::Data(format!(
                "{at}: record `{id}`: label {label} out of range [{lo}, {hi}]"
            )));
        }
        let text_len = read_u32(&mut reader, &at)? as usize;
        let text = read_f64s(&mut reader, text_len, &at)?;
        let audio_rows = read_u32(&mut reader, &at)? as usize;
        let audio_cols = read_u32(&mut reader, &at)? as usize;
        let audio = read_f64s(&mut reader, audio_rows * audio_cols, &at)?;
        let video_rows = read_u32(&mut reader, &at)? as usize;
        let video_cols = read_u32(&mut reader, &at)? as usize;
        let video = read_f64s(&mut reader, video_rows * video_cols, &at)?;

        if text.is_empty() || audio_rows == 0 || video_rows == 0 {
            dropped += 1;
            continue;
        }
        if text.len() != manifest.dims.text
            || audio_cols != manifest.dims.audio
            || video_cols != manifest.dims.video
        {
            return Err(DafError::Data(format!(
                "{at}: record `{id}`: dims ({}, {audio_cols}, {video_cols}) != manifest ({}, {}, {})",
                text.len(),
                manifest.dims.text,
                manifest.dims.audio,
                manifest.dims.video
            )));
        }
        samples.push(Utterance {
            id,
            label,
            text: Tensor::from_vec(text),
            audio: Tensor::new(vec![audio_rows, audio_cols], audio)?,
            video: Tensor::new(vec![video_rows, video_cols], video)?,
        });
    }
    Ok((samples, dropped))
}

fn read_u32<R: Read>(r: &mut R, at: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| DafError::Data(format!("{at}: truncated u32")))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, at: &str) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| DafError::Data(format!("{at}: truncated u64")))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R, at: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| DafError::Data(format!("{at}: truncated f64")))?;
    Ok(f64::from_le_bytes(buf))
}

fn read_f64s<R: Read>(r: &mut R, n: usize, at: &str) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(read_f64(r, at)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_dims() -> Dims {
        Dims {
            text: 4,
            audio: 3,
            video: 2,
        }
    }

    fn utt(id: &str, label: f64) -> Utterance {
        Utterance {
            id: id.to_string(),
            label,
            text: Tensor::from_vec(vec![0.25, -1.0, 0.0, 2.0]),
            audio: Tensor::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap(),
            video: Tensor::from_rows(&[vec![0.5, -0.5]]).unwrap(),
        }
    }

    fn splits_of(samples: Vec<Utterance>) -> Splits {
        Splits {
            train: samples,
            val: vec![],
            test: vec![],
        }
    }

    #[test]
    fn jsonl_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let splits = splits_of(vec![utt("a", 1.5), utt("b", -2.25)]);
        write_dataset(dir.path(), &splits, tiny_dims(), DatasetEncoding::Jsonl).unwrap();
        let first = fs::read(dir.path().join("train.jsonl")).unwrap();

        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.splits.train.len(), 2);
        assert_eq!(loaded.total_dropped(), 0);

        let dir2 = tempfile::tempdir().unwrap();
        write_dataset(dir2.path(), &loaded.splits, tiny_dims(), DatasetEncoding::Jsonl).unwrap();
        let second = fs::read(dir2.path().join("train.jsonl")).unwrap();
        assert_eq!(first, second);
        assert_eq!(
            fs::read(dir.path().join("manifest.json")).unwrap(),
            fs::read(dir2.path().join("manifest.json")).unwrap()
        );
    }

    #[test]
    fn nonfinite_values_survive_both_encodings() {
        let mut sample = utt("weird", 0.0);
        sample.audio.data_mut()[1] = f64::NAN;
        sample.audio.data_mut()[4] = f64::INFINITY;
        sample.video.data_mut()[0] = f64::NEG_INFINITY;

        let dir = tempfile::tempdir().unwrap();
        write_dataset(
            dir.path(),
            &splits_of(vec![sample.clone()]),
            tiny_dims(),
            DatasetEncoding::Jsonl,
        )
        .unwrap();
        let line = fs::read_to_string(dir.path().join("train.jsonl")).unwrap();
        assert!(line.contains("\"NaN\"") && line.contains("\"Inf\"") && line.contains("\"-Inf\""));
        let json = load_dataset(dir.path()).unwrap();

        let dir2 = tempfile::tempdir().unwrap();
        write_dataset(
            dir2.path(),
            &splits_of(vec![sample]),
            tiny_dims(),
            DatasetEncoding::Binary,
        )
        .unwrap();
        let bin = load_dataset(dir2.path()).unwrap();

        let (a, b) = (&json.splits.train[0], &bin.splits.train[0]);
        assert_eq!(a.id, b.id);
        for (x, y) in a.audio.data().iter().zip(b.audio.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert!(a.audio.data()[1].is_nan());
        assert_eq!(a.video.data()[0], f64::NEG_INFINITY);
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let splits = splits_of(vec![utt("x", 0.125)]);
        write_dataset(dir.path(), &splits, tiny_dims(), DatasetEncoding::Binary).unwrap();
        let first = fs::read(dir.path().join("train.bin")).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        write_dataset(dir2.path(), &loaded.splits, tiny_dims(), DatasetEncoding::Binary).unwrap();
        assert_eq!(first, fs::read(dir2.path().join("train.bin")).unwrap());
    }

    #[test]
    fn empty_modality_is_dropped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path()).unwrap();
        let manifest = Manifest {
            format_version: 1,
            dims: tiny_dims(),
            label_range: [LABEL_MIN, LABEL_MAX],
            splits: BTreeMap::from([("train".to_string(), "train.jsonl".to_string())]),
        };
        fs::write(
            dir.path().join("manifest.json"),
            serde_json::to_vec(&manifest).unwrap(),
        )
        .unwrap();
        fs::write(
            dir.path().join("train.jsonl"),
            concat!(
                "{\"id\":\"keep\",\"label\":1.0,\"text\":[1,2,3,4],\"audio\":[[1,2,3]],\"video\":[[1,2]]}\n",
                "{\"id\":\"noaudio\",\"label\":0.0,\"text\":[1,2,3,4],\"audio\":[],\"video\":[[1,2]]}\n",
            ),
        )
        .unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.splits.train.len(), 1);
        assert_eq!(loaded.dropped["train"], 1);
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let splits = splits_of(vec![utt("ok", 1.0)]);
        write_dataset(dir.path(), &splits, tiny_dims(), DatasetEncoding::Jsonl).unwrap();
        let path = dir.path().join("train.jsonl");
        let mut line = fs::read_to_string(&path).unwrap();
        line = line.replace("\"label\":1.0", "\"label\":3.5");
        fs::write(&path, line).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn dimension_mismatch_names_the_record() {
        let dir = tempfile::tempdir().unwrap();
        let mut bad = utt("bad", 0.0);
        bad.audio = Tensor::from_rows(&[vec![1.0, 2.0]]).unwrap();
        // writer doesn't enforce dims; the loader must
        write_dataset(dir.path(), &splits_of(vec![bad]), tiny_dims(), DatasetEncoding::Jsonl)
            .unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad") && msg.contains("width"), "{msg}");
    }

    #[test]
    fn malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &splits_of(vec![utt("a", 0.5)]), tiny_dims(), DatasetEncoding::Jsonl)
            .unwrap();
        let path = dir.path().join("train.jsonl");
        let mut content = fs::read_to_string(&path).unwrap();
        content.push_str("{not json\n");
        fs::write(&path, content).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("train.jsonl:2"), "{err}");
    }
}
