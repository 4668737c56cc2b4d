//! Flat TOML configuration for `run` and `taylor-test`. Unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::OptimizerKind;
use crate::power::default_alpha;

/// Overrides the output directory of any command.
pub const OUT_ENV: &str = "FARMOPT_OUT";

/// Settings of `farmopt run`; every key is optional in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Preset name, e.g. `channel-1` or `double-basin`.
    pub scenario: String,
    pub n_turbines: usize,
    /// `local`, `hybrid-ga` or `hybrid-bh`.
    pub optimizer: String,
    /// GA generations or basin-hopping hops.
    pub stage1_iterations: usize,
    pub stage2_iterations: usize,
    pub seed: u64,
    /// Power scaling (W s^3 / m^3).
    pub alpha: f64,
    /// Stage-1 and stage-2 synthetic table spacing (m).
    pub stage1_table_spacing: f64,
    pub stage2_table_spacing: f64,
    /// Reduction table file used by both stages instead of the synthetic ones.
    pub wake_table: Option<PathBuf>,
    pub out: PathBuf,
    /// Fill the `seconds` column of report.csv (makes it non-reproducible).
    pub timing: bool,
    /// Write decile layout snapshots under `snapshots/`.
    pub snapshots: bool,
    /// Worker threads for GA evaluation; 0 uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: "channel-1".into(),
            n_turbines: 8,
            optimizer: "hybrid-ga".into(),
            stage1_iterations: 100,
            stage2_iterations: 200,
            seed: 0,
            alpha: default_alpha(10.0),
            stage1_table_spacing: 5.0,
            stage2_table_spacing: 2.5,
            wake_table: None,
            out: PathBuf::from("farmopt-run"),
            timing: false,
            snapshots: false,
            jobs: 0,
        }
    }
}

impl RunConfig {
    pub fn optimizer_kind(&self) -> Result<OptimizerKind> {
        self.optimizer.parse()
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer_kind()?;
        if self.n_turbines == 0 {
            return Err(Error::Config("n_turbines must be at least 1".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.stage1_table_spacing > 0.0 && self.stage2_table_spacing > 0.0) {
            return Err(Error::Config("table spacings must be positive".into()));
        }
        Ok(())
    }
}

/// Settings of `farmopt taylor-test`: random turbines in a 640 x 320 m box
/// under the flow `(1 + x/1280, 1 + y/640)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorConfig {
    pub n_turbines: usize,
    pub seed: u64,
    pub directions: usize,
    pub h0: f64,
    pub levels: usize,
    pub alpha: f64,
    pub table_spacing: f64,
    pub wake_table: Option<PathBuf>,
}

impl Default for TaylorConfig {
    fn default() -> Self {
        TaylorConfig {
            n_turbines: 2,
            seed: 0,
            directions: 5,
            h0: 0.01,
            levels: 6,
            alpha: 1.0,
            table_spacing: 5.0,
            wake_table: None,
        }
    }
}

/// Parses a config file; a missing or malformed file is a configuration error.
pub fn load_config<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text, path)
}

pub fn parse_config<C: DeserializeOwned>(text: &str, path: &Path) -> Result<C> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))
}

pub fn to_toml<C: Serialize>(config: &C) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = to_toml(&c).unwrap();
        let back: RunConfig = parse_config(&text, Path::new("echo.toml")).unwrap();
        assert_eq!(back, c);
        let t = TaylorConfig::default();
        assert_eq!(parse_config::<TaylorConfig>(&to_toml(&t).unwrap(), Path::new("t")).unwrap(), t);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = parse_config("scenario = \"island-4\"\nn_turbines = 4\n", Path::new("c.toml")).unwrap();
        assert_eq!(c.scenario, "island-4");
        assert_eq!(c.n_turbines, 4);
        assert_eq!(c.stage2_iterations, 200);
    }

    #[test]
    fn unknown_key_is_named() {
        let err =
            parse_config::<RunConfig>("scenario = \"channel-1\"\npopulation = 5\n", Path::new("c.toml")).unwrap_err();
        assert!(err.to_string().contains("population"), "{err}");
    }

    #[test]
    fn bad_values_rejected() {
        let c = RunConfig { optimizer: "simplex".into(), ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { alpha: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(load_config::<RunConfig>(Path::new("/nonexistent/run.toml")).is_err());
    }
}
