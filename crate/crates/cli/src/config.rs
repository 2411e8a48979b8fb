//! TOML configuration: network parameters, sweep axes, ESPAR settings.
//!
//! Every table rejects unknown keys. Errors carry the dotted key path of the
//! offending entry.

use std::path::{Path, PathBuf};

use cogbeam::simulator::{Mode, SweepGrid};
use cogbeam::NetworkConfig;
use serde::{Deserialize, Serialize};

use crate::presets::{ExperimentPreset, PresetName};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: at `{key}`: {message}")]
    Parse {
        path: PathBuf,
        key: String,
        message: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub espar: Option<EsparSection>,
}

/// Axes of a custom sweep; omitted axes take the single value from `[network]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_list: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Mode>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsparSection {
    pub m_elements: usize,
    /// Parasitic ring radius in wavelengths.
    pub radius: f64,
    /// `[re, im]` in volts.
    pub feed_voltage: [f64; 2],
    /// `M × M` entries `[re, im]` in siemens; the bundled synthetic matrix if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admittance: Option<Vec<Vec<[f64; 2]>>>,
    /// Parasitic load reactances in ohms (`M − 1` values).
    pub reactances: Vec<f64>,
    pub grid_size: usize,
}

impl Default for EsparSection {
    fn default() -> Self {
        Self {
            m_elements: 4,
            radius: cogbeam::espar::DEFAULT_RADIUS,
            feed_voltage: [1.0, 0.0],
            admittance: None,
            reactances: vec![0.0; 3],
            grid_size: 360,
        }
    }
}

impl EsparSection {
    pub fn to_config(&self) -> Result<cogbeam::EsparConfig, ConfigError> {
        use num_complex::Complex;
        let admittance = match &self.admittance {
            Some(rows) => rows
                .iter()
                .map(|r| r.iter().map(|&[re, im]| Complex::new(re, im)).collect())
                .collect(),
            None => cogbeam::espar::synthetic_admittance(self.m_elements),
        };
        cogbeam::EsparConfig::circular(
            self.m_elements,
            self.radius,
            admittance,
            Complex::new(self.feed_voltage[0], self.feed_voltage[1]),
        )
        .map_err(|e| invalid("espar", e))
    }
}

fn invalid(section: &str, err: cogbeam::Error) -> ConfigError {
    let key = match &err {
        cogbeam::Error::InvalidParameter { name, .. } => format!("{section}.{name}"),
        _ => section.to_string(),
    };
    ConfigError::Invalid {
        key,
        message: err.to_string(),
    }
}

/// Parses TOML text; `origin` names the source in error messages.
pub fn parse_str(text: &str, origin: &Path) -> Result<FileConfig, ConfigError> {
    let parse_err = |key: String, message: String| ConfigError::Parse {
        path: origin.to_path_buf(),
        key,
        message,
    };
    let de = toml::Deserializer::parse(text).map_err(|e| parse_err(String::from("."), e.message().to_string()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        parse_err(key, e.into_inner().message().to_string())
    })
}

/// The effective configuration as TOML; parsing it back yields the same value.
pub fn to_toml(config: &FileConfig) -> String {
    toml::to_string_pretty(config).expect("configuration is always representable in TOML")
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<(NetworkConfig, ExperimentPreset), ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file = parse_str(&text, path)?;
    resolve(&file, None)
}

/// Validated network template plus the experiment to run. `preset`
/// overrides the file's `preset` key.
pub fn resolve(
    file: &FileConfig,
    preset: Option<PresetName>,
) -> Result<(NetworkConfig, ExperimentPreset), ConfigError> {
    let network = file.network.clone().validated().map_err(|e| invalid("network", e))?;
    let name = preset.or(file.preset).unwrap_or(PresetName::Custom);
    let grids = match name {
        PresetName::Custom => vec![custom_grid(file)?],
        other => other.grids(),
    };
    Ok((
        network.clone(),
        ExperimentPreset {
            name,
            overrides: network,
            output_path: file.output.clone(),
            grids,
        },
    ))
}

fn custom_grid(file: &FileConfig) -> Result<SweepGrid<f64>, ConfigError> {
    let net = &file.network;
    let Some(sweep) = &file.sweep else {
        return Ok(SweepGrid {
            n_list: vec![net.n_users],
            k_list: vec![net.k_factor],
            m_list: vec![net.m_patterns],
            modes: vec![net.mode],
        });
    };
    let grid = SweepGrid {
        n_list: sweep.n_list.clone(),
        k_list: sweep.k_list.clone().unwrap_or_else(|| vec![net.k_factor]),
        m_list: sweep.m_list.clone().unwrap_or_else(|| vec![net.m_patterns]),
        modes: sweep.modes.clone().unwrap_or_else(|| vec![net.mode]),
    };
    let empty = [
        ("sweep.n_list", grid.n_list.is_empty()),
        ("sweep.k_list", grid.k_list.is_empty()),
        ("sweep.m_list", grid.m_list.is_empty()),
        ("sweep.modes", grid.modes.is_empty()),
    ];
    if let Some((key, _)) = empty.iter().find(|(_, e)| *e) {
        return Err(ConfigError::Invalid {
            key: key.to_string(),
            message: "must not be empty".into(),
        });
    }
    for (key, bad) in [
        ("sweep.n_list", grid.n_list.contains(&0)),
        ("sweep.m_list", grid.m_list.contains(&0)),
        ("sweep.k_list", grid.k_list.iter().any(|k| !(k.is_finite() && *k >= 0.0))),
    ] {
        if bad {
            return Err(ConfigError::Invalid {
                key: key.into(),
                message: "values out of range".into(),
            });
        }
    }
    Ok(grid)
}
