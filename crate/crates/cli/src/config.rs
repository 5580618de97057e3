//! Settings shared by flags and the JSON config file. Flags win on conflict.

use std::path::{Path, PathBuf};

use disteer_core::protocol::{NoiseModel, ProtocolConfig};
use serde::Deserialize;

use crate::output::read_to_string;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Werner,
    AliceFlip,
}

impl From<Noise> for NoiseModel {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Werner => NoiseModel::WernerSource,
            Noise::AliceFlip => NoiseModel::AliceFlip,
        }
    }
}

/// Every field is optional; [`Settings::or`] fills gaps from a lower-priority source.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub v_grid: Option<Vec<f64>>,
    pub fidelities: Option<[f64; 3]>,
    pub chsh: Option<[f64; 3]>,
    pub from_counts: Option<PathBuf>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub resamples: Option<usize>,
    pub visibility: Option<f64>,
    pub bc_visibility: Option<f64>,
    pub noise: Option<Noise>,
    pub yes_efficiency: Option<f64>,
}

macro_rules! merge {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Settings {
    pub fn or(self, other: Settings) -> Settings {
        merge!(
            self, other, v_grid, fidelities, chsh, from_counts, budget, seed, out, format, resamples, visibility,
            bc_visibility, noise, yes_efficiency
        )
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn protocol(&self, visibility: f64) -> ProtocolConfig {
        let mut cfg = ProtocolConfig::with_visibility(visibility);
        if let Some(w) = self.bc_visibility {
            cfg.bc_visibility = w;
        }
        if let Some(n) = self.noise {
            cfg.noise = n.into();
        }
        if let Some(e) = self.yes_efficiency {
            cfg.yes_efficiency = e;
        }
        cfg
    }
}

/// Parses `a,b,c` into three reals.
pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v = parse_list(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected three comma-separated numbers, got {}", v.len()))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

/// Strictly increasing grid inside `[0, 1]`.
pub fn check_grid(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Input("visibility grid is empty".into()));
    }
    if grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(CliError::Input("visibility grid must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Input("visibility grid must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let flags = Settings { seed: Some(3), ..Default::default() };
        let file: Settings = serde_json::from_str(r#"{"seed": 9, "budget": 100, "v-grid": [0.5, 0.6]}"#).unwrap();
        let s = flags.or(file);
        assert_eq!(s.seed, Some(3));
        assert_eq!(s.budget, Some(100));
        assert_eq!(s.v_grid, Some(vec![0.5, 0.6]));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn triples_and_grids() {
        assert_eq!(parse_triple("1, 0.5,0.25").unwrap(), [1.0, 0.5, 0.25]);
        assert!(parse_triple("1,2").is_err());
        assert!(check_grid(&[0.5, 0.5]).is_err());
        assert!(check_grid(&[0.5, 1.2]).is_err());
        assert!(check_grid(&[0.1, 0.2]).is_ok());
    }
}
