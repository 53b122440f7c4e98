//! `key = value` run configuration files (TOML syntax).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::io::Format;

/// Every field is optional; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scenario: Option<String>,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub tau: Option<f64>,
    pub steps: Option<usize>,
    pub stop_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
    pub diagnostics: Option<bool>,
    pub format: Option<Format>,
    pub snapshot_every: Option<usize>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub parallel: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys() {
        let c = FileConfig::parse(
            "# sinus run\nscenario = \"sinus\"\nn = 41\neps = 0.01\ntau = 0.25\nformat = \"csv\"\nsvg = true\n",
        )
        .unwrap();
        assert_eq!(c.scenario.as_deref(), Some("sinus"));
        assert_eq!(c.n, Some(41));
        assert_eq!(c.format, Some(Format::Csv));
        assert_eq!(c.svg, Some(true));
        assert_eq!(c.steps, None);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(FileConfig::parse("tua = 0.1\n").is_err());
    }
}
