//! Experiment configuration: a versioned JSON document. Unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use crate::error::HarnessError;
use hydrolim_core::{Grid, Scheme};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IcKind {
    #[serde(rename = "well-prepared")]
    WellPrepared,
    #[serde(rename = "ill-prepared")]
    IllPrepared,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    pub kind: IcKind,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeConfig {
    #[serde(rename = "imex-euler")]
    ImexEuler,
    #[serde(rename = "cnab2")]
    Cnab2,
}

impl From<SchemeConfig> for Scheme {
    fn from(s: SchemeConfig) -> Scheme {
        match s {
            SchemeConfig::ImexEuler => Scheme::ImexEuler,
            SchemeConfig::Cnab2 => Scheme::Cnab2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub grid: GridConfig,
    pub dt: f64,
    pub t_final: f64,
    pub eps_list: Vec<f64>,
    pub ic: IcConfig,
    pub scheme: SchemeConfig,
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::ReadFile {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| HarnessError::Json {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.version != 1 {
            return fail(format!("unsupported config version {}", self.version));
        }
        Grid::new(self.grid.nx, self.grid.ny, self.grid.nz)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.dt > 0.0) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0) {
            return fail(format!("t_final must be nonnegative, got {}", self.t_final));
        }
        if self.eps_list.is_empty() {
            return fail("eps_list must not be empty".into());
        }
        for &eps in &self.eps_list {
            if !(eps > 0.0 && eps < 1.0) {
                return fail(format!("eps values must lie in (0,1), got {eps}"));
            }
        }
        for pair in self.eps_list.windows(2) {
            if pair[1] >= pair[0] {
                return fail(format!(
                    "eps_list must be strictly decreasing, got {} after {}",
                    pair[1], pair[0]
                ));
            }
        }
        if self.ic.amplitude < 0.0 {
            return fail(format!(
                "ic.amplitude must be nonnegative, got {}",
                self.ic.amplitude
            ));
        }
        if self.record_every == 0 {
            return fail("record_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid.nx, self.grid.ny, self.grid.nz).expect("validated grid")
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// The reference configuration of the rate experiment.
    pub fn reference() -> ExperimentConfig {
        ExperimentConfig {
            version: 1,
            grid: GridConfig {
                nx: 32,
                ny: 32,
                nz: 32,
            },
            dt: 2.5e-4,
            t_final: 0.25,
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            ic: IcConfig {
                kind: IcKind::WellPrepared,
                amplitude: 1.0,
            },
            scheme: SchemeConfig::Cnab2,
            record_every: 10,
            out_dir: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_valid() {
        ExperimentConfig::reference().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "version": 1,
            "grid": {"nx": 8, "ny": 8, "nz": 8},
            "dt": 0.001, "t_final": 0.01,
            "eps_list": [0.2, 0.1],
            "ic": {"kind": "well-prepared", "amplitude": 1.0},
            "scheme": "cnab2",
            "record_every": 1,
            "typo_field": 3
        }"#;
        let parsed: Result<ExperimentConfig, _> = serde_json::from_str(text);
        assert!(parsed.is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        let mut c = ExperimentConfig::reference();
        c.eps_list = vec![0.1, 0.2];
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::reference();
        c.eps_list = vec![0.2, 1.5];
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::reference();
        c.t_final = -0.1;
        assert!(c.validate().is_err());

        // a zero horizon is allowed (initial diagnostics only)
        let mut c = ExperimentConfig::reference();
        c.t_final = 0.0;
        assert!(c.validate().is_ok());

        let mut c = ExperimentConfig::reference();
        c.version = 2;
        assert!(c.validate().is_err());
    }
}
