//! Run configuration files.
//!
//! ```json
//! {
//!   "substance": { "kind": "cavity", "mode_constant": 1.0 },
//!   "cycle": { "kind": "brayton", "F1": 4, "F0": 1, "L_A": 1, "L_B": 2 },
//!   "numerics": { "quad_tol": 1e-10 },
//!   "output": { "report": "report.json", "diagram": "diagram.csv" }
//! }
//! ```

use std::path::{Path, PathBuf};

use qcycle_core::{CycleParameters, NumericsPolicy, SpectrumModel, SubstanceKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstanceConfig {
    pub kind: SubstanceKind,
    #[serde(default = "one")]
    pub mass: f64,
    /// `kappa` for the cavity, `hbar omega L` for the oscillators.
    #[serde(default = "one")]
    pub mode_constant: f64,
}

fn one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    qcycle_core::processes::DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Report JSON path; printed to stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Diagram CSV path; no diagram is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<PathBuf>,
    #[serde(default = "default_samples")]
    pub samples_per_segment: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: None,
            diagram: None,
            samples_per_segment: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub substance: SubstanceConfig,
    pub cycle: CycleParameters,
    #[serde(default)]
    pub numerics: NumericsPolicy,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn model(&self) -> CliResult<SpectrumModel> {
        SpectrumModel::with_parameters(
            self.substance.kind,
            self.substance.mass,
            self.substance.mode_constant,
        )
        .map_err(|e| CliError::Config(format!("substance: {e}")))
    }

    /// Checks everything that does not need a thermal state.
    pub fn validate(&self) -> CliResult<()> {
        self.model()?;
        self.numerics
            .validate()
            .map_err(|e| CliError::Config(format!("numerics: {e}")))?;
        if self.output.samples_per_segment < 2 {
            return Err(CliError::Config(format!(
                "output.samples_per_segment: need at least 2, got {}",
                self.output.samples_per_segment
            )));
        }
        validate_cycle(&self.cycle)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Field-level checks on the cycle record with its own field names.
pub fn validate_cycle(cycle: &CycleParameters) -> CliResult<()> {
    for name in cycle.field_names() {
        let value = cycle.field(name).expect("listed field");
        if !value.is_finite() {
            return Err(CliError::Config(format!(
                "cycle.{name}: must be finite, got {value}"
            )));
        }
    }
    if let CycleParameters::Diesel { r_c, r_e, .. } = *cycle {
        if !(0.0 < r_c && r_c < r_e && r_e < 1.0) {
            return Err(CliError::Config(format!(
                "cycle: Diesel ratios must satisfy 0 < r_C < r_E < 1, got r_C = {r_c}, r_E = {r_e}"
            )));
        }
    }
    Ok(())
}

/// Parses and validates a configuration document. Errors name the offending
/// field path.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}
