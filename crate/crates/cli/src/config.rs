//! Effective run configuration: built-in defaults, then a TOML file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cavity_entangle::analysis::{Axis, SearchBounds, SearchOptions, Spacing, SweepSpec, ThresholdOptions};
use cavity_entangle::lindblad::{OracleParams, DEFAULT_FOCK_CUTOFF};
use cavity_entangle::SystemParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub sweep: SweepSection,
    pub search: SearchSection,
    pub evolve: EvolveSection,
    pub oracle: OracleSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub gamma: f64,
    pub pump: f64,
    pub k: f64,
    pub eta: f64,
    pub corrected: bool,
    pub solver: String,
    pub method: String,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            pump: 1.0,
            k: 1.0,
            eta: 10.0,
            corrected: true,
            solver: "null-space".into(),
            method: "closed-form".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub pump_min: f64,
    pub pump_max: f64,
    pub pump_count: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
    pub spacing: Spacing,
}

impl Default for SweepSection {
    fn default() -> Self {
        let spec = SweepSpec::default();
        Self {
            pump_min: spec.pump.min,
            pump_max: spec.pump.max,
            pump_count: spec.pump.count,
            k_min: spec.k.min,
            k_max: spec.k.max,
            k_count: spec.k.count,
            spacing: spec.pump.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub pump_min: f64,
    pub pump_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub tol: f64,
    pub coarse: usize,
    pub eta_lo: f64,
    pub eta_hi: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let b = SearchBounds::default();
        let t = ThresholdOptions::default();
        Self {
            pump_min: b.pump_min,
            pump_max: b.pump_max,
            k_min: b.k_min,
            k_max: b.k_max,
            tol: 1e-3,
            coarse: t.search.coarse,
            eta_lo: t.eta_lo,
            eta_hi: t.eta_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSection {
    pub t_final: f64,
    pub dt: f64,
    /// Print every n-th step.
    pub every: usize,
    /// P_g, P_s1, P_s2, P_o'2 and optionally the two dark populations.
    pub initial: Vec<f64>,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            t_final: 200.0,
            dt: 1e-2,
            every: 100,
            initial: vec![1.0, 0.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub g: f64,
    pub fock_cutoff: usize,
    pub mirror: String,
    pub convergence_tol: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            g: 100.0,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            mirror: "per-state".into(),
            convergence_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// csv or json
    pub format: Option<String>,
    pub path: Option<PathBuf>,
    pub json: bool,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        Ok(SystemParams::new(s.gamma, s.pump, s.k, s.eta)?)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let s = &self.sweep;
        let spec = SweepSpec {
            pump: Axis::new(s.pump_min, s.pump_max, s.pump_count, s.spacing)?,
            k: Axis::new(s.k_min, s.k_max, s.k_count, s.spacing)?,
            eta: self.system.eta,
            gamma: self.system.gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn search_bounds(&self) -> Result<SearchBounds> {
        let s = &self.search;
        let bounds = SearchBounds {
            pump_min: s.pump_min,
            pump_max: s.pump_max,
            k_min: s.k_min,
            k_max: s.k_max,
        };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions {
            eta_lo: self.search.eta_lo,
            eta_hi: self.search.eta_hi,
            search: SearchOptions {
                coarse: self.search.coarse,
                ..SearchOptions::default()
            },
        }
    }

    pub fn oracle_params(&self) -> Result<OracleParams> {
        Ok(OracleParams::new(self.oracle.g, self.oracle.fock_cutoff, self.system_params()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = toml::from_str("[system]\neta = 12.0\n[oracle]\ng = 50.0\n").unwrap();
        assert_eq!(c.system.eta, 12.0);
        assert_eq!(c.system.gamma, 1.0);
        assert_eq!(c.oracle.g, 50.0);
        assert_eq!(c.oracle.fock_cutoff, 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[system]\netta = 1.0\n").is_err());
    }

    #[test]
    fn typed_views_validate() {
        let mut c = RunConfig::default();
        assert_eq!(c.sweep_spec().unwrap(), SweepSpec::default());
        c.system.gamma = 0.0;
        assert!(c.system_params().is_err());
        c.system.gamma = 1.0;
        c.search.k_max = 0.01;
        assert!(c.search_bounds().is_err());
    }
}
