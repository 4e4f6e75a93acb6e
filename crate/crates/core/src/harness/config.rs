//! Flat `key = value` configuration files.
//!
//! Keys mirror the long CLI flag names without the leading dashes
//! (`horizon = 100000`, `algo = ind-ucb`). Blank lines and lines starting
//! with `#` are ignored. Later duplicates win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_flat_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Format {
                path: "<config>".into(),
                message: format!("line {}: expected key = value, got {line:?}", idx + 1),
            });
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(Error::Format {
                path: "<config>".into(),
                message: format!("line {}: empty key", idx + 1),
            });
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn load_flat_config(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_flat_config(&text).map_err(|e| match e {
        Error::Format { message, .. } => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}
