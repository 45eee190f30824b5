//! TOML run configuration. Every key is optional; command-line flags win.
//!
//! ```toml
//! system = "burgers"
//! seed = 7
//! samples = 200
//!
//! [sweep]
//! epsilons = [0.0625, 0.03125]   # explicit list, overrides the geometric sweep
//! max_cells = 16.0               # geometric sweep from max_cells*h ...
//! min_cells = 4.0                # ... down to min_cells*h
//! ratio = 1.4142135623730951
//! kernel = "spatial"             # or "space-time"
//!
//! [region]
//! margin = 0.1
//!
//! [psi]                          # test-function box as fractions of each axis, time first
//! lo = [0.25, 0.25]
//! hi = [0.75, 0.75]
//!
//! [balance]
//! epsilon = 0.05
//!
//! [tolerances]
//! compat_residual = 1e-10
//! compat_fd_relative = 1e-4
//! balance_closure = 0.05
//! residual = 1e-3                # max companion residual at the finest scale
//! shell = 1e-3                   # max shell integral at the finest scale
//! ```

use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    SpaceTime,
    Spatial,
}

impl From<KernelChoice> for cldiag_core::residuals::KernelAxes {
    fn from(k: KernelChoice) -> Self {
        match k {
            KernelChoice::SpaceTime => Self::SpaceTime,
            KernelChoice::Spatial => Self::Spatial,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub sweep: SweepConfig,
    pub region: RegionConfig,
    pub psi: PsiConfig,
    pub balance: BalanceConfig,
    pub tolerances: Tolerances,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Option<Vec<f64>>,
    pub max_cells: f64,
    pub min_cells: f64,
    pub ratio: f64,
    pub kernel: Option<KernelChoice>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            epsilons: None,
            max_cells: 16.0,
            min_cells: 4.0,
            ratio: std::f64::consts::SQRT_2,
            kernel: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub margin: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsiConfig {
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceConfig {
    pub epsilon: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub compat_residual: f64,
    pub compat_fd_relative: f64,
    pub balance_closure: f64,
    pub residual: Option<f64>,
    pub shell: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            compat_residual: 1e-10,
            compat_fd_relative: 1e-4,
            balance_closure: 0.05,
            residual: None,
            shell: None,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_has_defaults() {
        let c: Config = toml::from_str("").unwrap();
        assert_eq!(c.sweep.max_cells, 16.0);
        assert_eq!(c.tolerances.compat_residual, 1e-10);
        assert!(c.system.is_none());
    }

    #[test]
    fn sections_parse() {
        let c: Config = toml::from_str(
            "system = \"comp-euler\"\nseed = 3\n[sweep]\nepsilons = [0.1, 0.05]\nkernel = \"spatial\"\n[tolerances]\nshell = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.system.as_deref(), Some("comp-euler"));
        assert_eq!(c.sweep.epsilons, Some(vec![0.1, 0.05]));
        assert_eq!(c.sweep.kernel, Some(KernelChoice::Spatial));
        assert_eq!(c.tolerances.shell, Some(0.5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[sweep]\nepsilon = 1.0\n").is_err());
    }
}
