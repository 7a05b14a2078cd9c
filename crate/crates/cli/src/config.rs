//! Flat `key = value` run configuration for the `mc` command.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use krrh2_core::harness::McConfig;
use krrh2_core::presets::{preset, Scale};

/// A parse failure, carrying the 1-based line it happened on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Monte Carlo settings plus the optional genotype file they run on.
///
/// A file may start from `preset = NAME` (and `scale = desk|full`); every
/// other key overrides one field regardless of where it appears. Serializing
/// writes every field explicitly and no preset line, so parsing the output
/// gives the same configuration back.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfigFile {
    pub mc: McConfig,
    pub genotypes: Option<PathBuf>,
}

const EXTRA_KEYS: [&str; 3] = ["preset", "scale", "genotypes"];

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !McConfig::KEYS.contains(&k.as_str()) && !EXTRA_KEYS.contains(&k.as_str()) {
                return Err(ConfigError { line: line_no, message: format!("unknown key `{k}`") });
            }
            if let Some((first, ..)) = entries.iter().find(|(_, key, _)| *key == k) {
                return Err(ConfigError {
                    line: line_no,
                    message: format!("duplicate key `{k}` (first set on line {first})"),
                });
            }
            entries.push((line_no, k, v));
        }

        let find = |key: &str| entries.iter().find(|(_, k, _)| k == key);
        let scale = match find("scale") {
            Some((line, _, v)) => {
                v.parse::<Scale>().map_err(|e| ConfigError { line: *line, message: e.to_string() })?
            }
            None => Scale::Desk,
        };
        let (preset_line, preset_name) = match find("preset") {
            Some((line, _, v)) => (*line, v.as_str()),
            None => (0, "hwe-linear-low"),
        };
        let p = preset(preset_name).map_err(|e| ConfigError { line: preset_line, message: e.to_string() })?;
        let mut mc = McConfig::from_preset(p, scale);
        let mut genotypes = None;
        for (line, k, v) in &entries {
            match k.as_str() {
                "preset" | "scale" => {}
                "genotypes" => genotypes = (!v.is_empty()).then(|| PathBuf::from(v)),
                _ => {
                    mc.set(k, v).map_err(|e| ConfigError { line: *line, message: e.to_string() })?;
                }
            }
        }
        Ok(Self { mc, genotypes })
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.mc.key_values() {
            let _ = writeln!(out, "{k} = {v}");
        }
        let g = self.genotypes.as_ref().map_or_else(String::new, |p| p.display().to_string());
        let _ = writeln!(out, "genotypes = {g}");
        out
    }
}
