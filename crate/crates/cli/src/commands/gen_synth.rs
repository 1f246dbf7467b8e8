//! `daf gen-synth`: write a synthetic dataset in the documented layout
//! plus an `oracle.json` sidecar mapping sample id → informative
//! modality (for gate-routing assertions).

use std::collections::BTreeMap;
use std::fs;

use daf_core::data::{gen_synthetic, write_dataset, DatasetEncoding, Dims, SyntheticSpec};
use daf_core::{DafError, Result};

use crate::args::GenSynthArgs;

pub fn run(args: &GenSynthArgs) -> Result<()> {
    let spec = spec_from_args(args)?;
    let encoding: DatasetEncoding = args.encoding.parse()?;
    let data = gen_synthetic(&spec)?;

    fs::create_dir_all(&args.out)?;
    write_dataset(
        &args.out,
        &data.splits,
        Dims {
            text: spec.d_text,
            audio: spec.d_audio,
            video: spec.d_video,
        },
        encoding,
    )?;
    let mut oracle = serde_json::to_vec_pretty(&data.oracle)?;
    oracle.push(b'\n');
    fs::write(args.out.join("oracle.json"), oracle)?;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in data.oracle.values() {
        *counts.entry(m.as_str()).or_insert(0) += 1;
    }
    println!(
        "wrote {} samples ({} train / {} val / {} test) to {}",
        spec.n_samples,
        data.splits.train.len(),
        data.splits.val.len(),
        data.splits.test.len(),
        args.out.display()
    );
    println!(
        "informative modality counts: {:?}; noise_std = {}",
        counts, spec.noise_std
    );
    Ok(())
}

pub fn spec_from_args(args: &GenSynthArgs) -> Result<SyntheticSpec> {
    let dims = parse_triple_usize(&args.dims, "dims")?;
    let probs = parse_triple_f64(&args.probs, "probs")?;
    let (lo, hi) = parse_pair_usize(&args.seq_len, "seq-len")?;
    let (f_train, f_val) = parse_pair_f64(&args.split, "split")?;
    let spec = SyntheticSpec {
        n_samples: args.n,
        d_text: dims[0],
        d_audio: dims[1],
        d_video: dims[2],
        noise_std: args.noise_std,
        modality_probs: probs,
        seq_len_range: (lo, hi),
        split_fractions: (f_train, f_val),
        seed: args.seed,
        directions: None,
    };
    spec.validate()?;
    Ok(spec)
}

fn split_n<'a>(raw: &'a str, n: usize, what: &str) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(DafError::Config(format!(
            "--{what} `{raw}`: expected {n} comma-separated values"
        )));
    }
    Ok(parts)
}

fn parse_triple_usize(raw: &str, what: &str) -> Result<[usize; 3]> {
    let parts = split_n(raw, 3, what)?;
    let mut out = [0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?;
    }
    Ok(out)
}

fn parse_triple_f64(raw: &str, what: &str) -> Result<[f64; 3]> {
    let parts = split_n(raw, 3, what)?;
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?;
    }
    Ok(out)
}

fn parse_pair_usize(raw: &str, what: &str) -> Result<(usize, usize)> {
    let parts = split_n(raw, 2, what)?;
    Ok((
        parts[0]
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?,
        parts[1]
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?,
    ))
}

fn parse_pair_f64(raw: &str, what: &str) -> Result<(f64, f64)> {
    let parts = split_n(raw, 2, what)?;
    Ok((
        parts[0]
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?,
        parts[1]
            .parse()
            .map_err(|e| DafError::Config(format!("--{what} `{raw}`: {e}")))?,
    ))
}
