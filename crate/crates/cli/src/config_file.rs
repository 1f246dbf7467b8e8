//! Flat key=value configuration files with dotted sections.
//!
//! ```text
//! # comment
//! run.fusion = softmax3
//! train.lr = 0.00005
//! data.path = ./dataset
//! ```
//!
//! Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use daf_core::{DafError, Result};

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DafError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, &path.display().to_string())
}

pub fn parse_config_str(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(DafError::Config(format!(
                "{origin}:{}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
