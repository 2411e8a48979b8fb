//! Named experiment grids.
//!
//! All presets share `γ̄_s = γ̄_sp = 1`, `γ̄_p = 0` and `Q_p = 1` unless the
//! config's `[network]` table overrides them. Absolute capacity levels then
//! differ from other power settings by a near-constant offset, while
//! effective-user ratios and growth rates are unaffected.

use std::path::PathBuf;

use clap::ValueEnum;
use cogbeam::simulator::{Mode, SweepGrid};
use cogbeam::NetworkConfig;
use serde::{Deserialize, Serialize};

/// `8, 16, …, 512`.
pub const LOG_GRID: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    /// Baseline capacity vs N for K ∈ {0, 2, 3, 10}.
    Fig5,
    /// Multiuser gain C_N/C_1 with beamforming over M ∈ {2, 3, 4} at K = 10,
    /// with baseline K ∈ {0, 10} for reference.
    Fig6,
    /// Baseline and two-pattern beamforming for K ∈ {0, 10, 100}.
    Fig7,
    /// Baseline and two-pattern beamforming at K = 10, with C/ln N and
    /// C/ln ln N columns.
    Fig8,
    /// Grid from the `[sweep]` table, or the single `[network]` point.
    Custom,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig5 => "fig5",
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
            PresetName::Fig8 => "fig8",
            PresetName::Custom => "custom",
        }
    }

    /// Sweep grids of a figure preset; empty for `Custom`.
    pub fn grids(self) -> Vec<SweepGrid<f64>> {
        let grid = |modes: &[Mode], k: &[f64], m: &[usize]| SweepGrid {
            n_list: LOG_GRID.to_vec(),
            k_list: k.to_vec(),
            m_list: m.to_vec(),
            modes: modes.to_vec(),
        };
        match self {
            PresetName::Fig5 => vec![grid(&[Mode::Baseline], &[0.0, 2.0, 3.0, 10.0], &[1])],
            PresetName::Fig6 => vec![
                grid(&[Mode::Baseline], &[0.0, 10.0], &[1]),
                grid(&[Mode::Rab], &[10.0], &[2, 3, 4]),
            ],
            PresetName::Fig7 => vec![grid(&[Mode::Baseline, Mode::Rab], &[0.0, 10.0, 100.0], &[2])],
            PresetName::Fig8 => vec![grid(&[Mode::Baseline, Mode::Rab], &[10.0], &[2])],
            PresetName::Custom => Vec::new(),
        }
    }
}

/// A resolved experiment: which grids to sweep with which network template.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    /// Template for every grid point (axes of the grid replace N, K, M, mode).
    pub overrides: NetworkConfig,
    pub output_path: Option<PathBuf>,
    pub grids: Vec<SweepGrid<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_grids() {
        let g = PresetName::Fig5.grids();
        assert_eq!(g[0].k_list, vec![0.0, 2.0, 3.0, 10.0]);
        assert_eq!(g[0].points().len(), 4 * 7);
        let g = PresetName::Fig7.grids();
        assert_eq!(g[0].points().len(), 2 * 3 * 7);
        assert!(PresetName::Custom.grids().is_empty());
        assert_eq!(PresetName::Fig6.grids()[1].points().len(), 3 * 7);
    }
}
