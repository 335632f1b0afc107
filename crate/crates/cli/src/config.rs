//! Run configuration: defaults, optional JSON config file, command-line
//! flags. Precedence is flags > config file > defaults.

use crate::error::CliError;
use serde::Deserialize;
use shapesig::analysis::DistanceMethod;
use shapesig::reparam::DpGrid;

pub const DEFAULT_LEVEL: usize = 3;
pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_MAX_STEP: usize = 4;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::usage(format!(
                "--format must be csv or json, got {other:?}"
            ))),
        }
    }
}

/// Optional JSON config file; every field may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub method: Option<String>,
    pub level: Option<usize>,
    pub grid: Option<usize>,
    pub max_step: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub parallel: Option<bool>,
    pub joints: Option<Vec<String>>,
    pub weights: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: Option<&str>) -> Result<Self, CliError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::data(format!("cannot read config {p}: {e}")))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::data(format!("bad config {p}: {e}")))
            }
        }
    }
}

/// The fully resolved configuration a subcommand runs with.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: String,
    pub level: usize,
    pub grid: usize,
    pub max_step: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub parallel: bool,
    pub joints: Option<Vec<String>>,
    pub weights: Option<Vec<f64>>,
}

impl RunConfig {
    /// Resolve flags over config-file values over defaults.
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        file: &ConfigFile,
        method: Option<String>,
        level: Option<usize>,
        grid: Option<usize>,
        max_step: Option<usize>,
        seed: Option<u64>,
        format: Option<String>,
        no_parallel: bool,
        joints: Option<Vec<String>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, CliError> {
        let format = match format.or_else(|| file.format.clone()) {
            Some(f) => OutputFormat::parse(&f)?,
            None => OutputFormat::Csv,
        };
        let parallel = if no_parallel {
            false
        } else {
            file.parallel.unwrap_or(true)
        };
        Ok(RunConfig {
            method: method
                .or_else(|| file.method.clone())
                .unwrap_or_else(|| "signature".to_string()),
            level: level.or(file.level).unwrap_or(DEFAULT_LEVEL),
            grid: grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            max_step: max_step.or(file.max_step).unwrap_or(DEFAULT_MAX_STEP),
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            format,
            parallel,
            joints: joints.or_else(|| file.joints.clone()),
            weights: weights.or_else(|| file.weights.clone()),
        })
    }

    /// Validates method-specific fields and builds the distance method.
    pub fn distance_method(&self) -> Result<DistanceMethod, CliError> {
        match self.method.as_str() {
            "signature" => {
                if !(1..=6).contains(&self.level) {
                    return Err(CliError::usage(format!(
                        "--level must be in 1..=6, got {}",
                        self.level
                    )));
                }
                if self.weights.is_some() {
                    return Err(CliError::usage(
                        "--weights applies to srvt / srvt_dp only".to_string(),
                    ));
                }
                Ok(DistanceMethod::Signature { level: self.level })
            }
            "srvt" => {
                self.check_weights()?;
                Ok(DistanceMethod::Srvt)
            }
            "srvt_dp" => {
                self.check_weights()?;
                let grid = DpGrid::with_max_step(self.grid, self.max_step)
                    .map_err(|e| CliError::usage(format!("bad grid: {e}")))?;
                Ok(DistanceMethod::SrvtDp { grid })
            }
            other => Err(CliError::usage(format!(
                "unknown method {other:?}; expected signature, srvt, or srvt_dp"
            ))),
        }
    }

    fn check_weights(&self) -> Result<(), CliError> {
        if let Some(w) = &self.weights {
            if w.is_empty() || w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
                return Err(CliError::usage(
                    "--weights must be positive finite numbers".to_string(),
                ));
            }
        }
        Ok(())
    }
}
