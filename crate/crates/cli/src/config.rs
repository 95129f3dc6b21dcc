//! Run configuration, parsed strictly from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use torusmix_core::energy::{validate_kappa_prime, MIN_ENERGY_RES};
use torusmix_core::flow::FlowSpec;
use torusmix_core::maps::MapDescriptor;
use torusmix_core::mixing::{geometric_eps_grid, validate_kappa, DEFAULT_EPS_RATIO, DEFAULT_GRID_RES, MIN_GRID_RES};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Energy,
    MixScale,
    VerifyTheorem,
    VerifyCorollary,
    ProofTrace,
    Render,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub kappa: f64,
    pub kappa_prime: f64,
    /// Image indicator, proof-trace and space-time quadrature resolution.
    pub grid_res: usize,
    /// Lagrangian energy quadrature resolution.
    pub energy_res: usize,
    pub eps_max: f64,
    pub eps_min: f64,
    pub eps_ratio: f64,
    /// Explicit ε grid; overrides the geometric one.
    pub eps_grid: Option<Vec<f64>>,
    /// Center pitch as a multiple of ε.
    pub center_spacing_factor: Option<f64>,
    /// Scale for the proof trace; defaults to the certified ε*, else `eps_max`.
    pub proof_eps: Option<f64>,
    pub s_samples: usize,
    pub t_samples: usize,
    pub incompressibility_res: usize,
    /// Random starting points for the Grönwall check.
    pub trajectories: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            kappa: 0.3,
            kappa_prime: 1.0,
            grid_res: DEFAULT_GRID_RES,
            energy_res: 128,
            eps_max: 0.25,
            eps_min: 0.01,
            eps_ratio: DEFAULT_EPS_RATIO,
            eps_grid: None,
            center_spacing_factor: None,
            proof_eps: None,
            s_samples: 8,
            t_samples: 10,
            incompressibility_res: 32,
            trajectories: 100,
        }
    }
}

impl Params {
    pub fn eps_grid(&self) -> Result<Vec<f64>, CliError> {
        match &self.eps_grid {
            Some(g) => Ok(g.clone()),
            None => geometric_eps_grid(self.eps_max, self.eps_min, self.eps_ratio).map_err(CliError::config),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        validate_kappa(self.kappa).map_err(CliError::config)?;
        validate_kappa_prime(self.kappa_prime).map_err(CliError::config)?;
        if self.grid_res < MIN_GRID_RES {
            return Err(CliError::Config(format!("grid_res must be >= {MIN_GRID_RES}")));
        }
        if self.energy_res < MIN_ENERGY_RES {
            return Err(CliError::Config(format!("energy_res must be >= {MIN_ENERGY_RES}")));
        }
        let grid = self.eps_grid()?;
        if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0 && *e <= 0.25)) {
            return Err(CliError::Config("every ε must lie in (0, 1/4]".into()));
        }
        if let Some(e) = self.proof_eps {
            if !(e > 0.0 && e <= 0.25) {
                return Err(CliError::Config(format!("proof_eps must lie in (0, 1/4], got {e}")));
            }
        }
        if let Some(f) = self.center_spacing_factor {
            if !(f > 0.0 && f <= 0.5) {
                return Err(CliError::Config(format!("center_spacing_factor must lie in (0, 1/2], got {f}")));
            }
        }
        for (name, v) in [
            ("s_samples", self.s_samples),
            ("t_samples", self.t_samples),
            ("trajectories", self.trajectories),
        ] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.incompressibility_res < 16 {
            return Err(CliError::Config("incompressibility_res must be >= 16".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub analyses: Vec<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapDescriptor<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec<f64>>,
    #[serde(default)]
    pub params: Params,
}

pub enum Subject<'a> {
    Map(&'a MapDescriptor<f64>),
    Flow(&'a FlowSpec<f64>),
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(CliError::Config(format!(
                "name must be non-empty and use only [A-Za-z0-9-_.], got {:?}",
                self.name
            )));
        }
        if self.analyses.is_empty() {
            return Err(CliError::Config("analyses list is empty".into()));
        }
        match (&self.map, &self.flow) {
            (Some(m), None) => m.validate().map_err(CliError::config)?,
            (None, Some(f)) => f.validate().map_err(CliError::config)?,
            _ => return Err(CliError::Config("exactly one of [map] or [flow] is required".into())),
        }
        if self.map.is_some() && self.analyses.contains(&Analysis::VerifyCorollary) {
            return Err(CliError::Config("verify-corollary needs a [flow] subject".into()));
        }
        self.params.validate()
    }

    pub fn subject(&self) -> Subject<'_> {
        match (&self.map, &self.flow) {
            (Some(m), _) => Subject::Map(m),
            (None, Some(f)) => Subject::Flow(f),
            (None, None) => unreachable!("validated config has a subject"),
        }
    }

    pub fn wants(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const V10: &str = r#"
name = "v10"
analyses = ["energy", "verify-theorem"]

[[map.stage]]
kind = "vshear"
n = 10

[params]
kappa = 0.3
"#;

    #[test]
    fn parses_map_config() {
        let c = RunConfig::parse(V10).unwrap();
        assert_eq!(c.map.as_ref().unwrap().stages().len(), 1);
        assert_eq!(c.params.kappa_prime, 1.0);
        assert!(c.wants(Analysis::VerifyTheorem));
    }

    #[test]
    fn parses_flow_config() {
        let c = RunConfig::parse(
            "name = \"f\"\nanalyses = [\"verify-corollary\"]\n[flow]\nsteps = 200\nfield = { kind = \"alternating\", u = 0.2, k = 1, period = 0.25 }\n",
        )
        .unwrap();
        assert!(matches!(c.subject(), Subject::Flow(_)));
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = V10.replace("kappa = 0.3", "kappa = 0.3\nkapa = 0.2");
        assert!(matches!(RunConfig::parse(&bad), Err(CliError::Config(_))));
        let bad = format!("colour = 1\n{V10}");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn rejects_bad_domains() {
        let err = RunConfig::parse(&V10.replace("kappa = 0.3", "kappa = 0.6")).unwrap_err();
        assert!(err.to_string().contains("(0, 1/2)"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(RunConfig::parse(&V10.replace("n = 10", "n = 10\n[[map.stage]]\nkind = \"linear\"\nmatrix = [[2, 0], [0, 1]]")).is_err());
        assert!(RunConfig::parse(&V10.replace("[params]", "[params]\ngrid_res = 10")).is_err());
        assert!(RunConfig::parse("name = \"x\"\nanalyses = [\"energy\"]\n").is_err());
        assert!(RunConfig::parse(&V10.replace("verify-theorem", "verify-corollary")).is_err());
    }
}
