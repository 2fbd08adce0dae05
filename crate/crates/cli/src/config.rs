//! Loading configuration files and writing reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Command-line overrides applied on top of a configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub thetas: Option<Vec<f64>>,
}

pub fn read_value(path: &Path) -> CliResult<serde_json::Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Deserialize, naming the offending field on failure.
pub fn parse_value<T: DeserializeOwned>(value: serde_json::Value, path: &Path) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let at = e.path().to_string();
        let at = if at == "." { String::new() } else { format!(" at `{at}`") };
        CliError::Usage(format!("{}{at}: {}", path.display(), e.inner()))
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_value(read_value(path)?, path)
}

/// Directory containing the config, for resolving relative tensor paths.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// File-name-safe version of an experiment name.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() { "report".into() } else { s }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, serde::Deserialize)]
    #[allow(dead_code)]
    struct Inner {
        n: usize,
    }

    #[derive(Debug, serde::Deserialize)]
    #[allow(dead_code)]
    struct Outer {
        inner: Inner,
    }

    #[test]
    fn errors_point_at_field() {
        let v = serde_json::json!({"inner": {"n": "three"}});
        let err = parse_value::<Outer>(v, Path::new("c.json")).unwrap_err();
        assert!(err.to_string().contains("inner.n"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("thm 1/arith"), "thm_1_arith");
        assert_eq!(slug(""), "report");
    }
}
