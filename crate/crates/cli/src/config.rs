//! Run configuration: explorer, inner annealing and cost sections, read from
//! TOML or JSON.

use std::path::{Path, PathBuf};

use multiplace::bdio::AnnealSchedule;
use multiplace::cost::CostWeights;
use multiplace::explorer::{ExplorerConfig, OuterSchedule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Names the config file used when `--config` is not given.
pub const CONFIG_ENV: &str = "MULTIPLACE_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorerSection {
    pub coverage_target: f64,
    pub max_outer_iterations: usize,
    pub perturb_block_fraction: f64,
    pub expansion_step: i64,
    pub seed: u64,
    /// `None` starts at the first candidate's average cost.
    pub initial_temperature: Option<f64>,
    pub cooling_factor: f64,
}

impl Default for ExplorerSection {
    fn default() -> Self {
        let d = ExplorerConfig::<f64>::default();
        Self {
            coverage_target: d.coverage_target,
            max_outer_iterations: d.max_outer_iterations,
            perturb_block_fraction: d.perturb_block_fraction,
            expansion_step: d.expansion_step,
            seed: d.rng_seed,
            initial_temperature: d.outer.initial_temperature,
            cooling_factor: d.outer.cooling_factor,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub explorer: ExplorerSection,
    pub bdio: AnnealSchedule<f64>,
    pub cost: CostWeights<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| CliError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Reads `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Self, CliError> {
        let path: Option<PathBuf> = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        };
        match path {
            Some(p) => {
                let text = crate::read_file(&p)?;
                Self::parse(&text, &p)
            }
            None => Ok(Self::default()),
        }
    }

    pub fn explorer_config(&self) -> ExplorerConfig<f64> {
        let e = &self.explorer;
        ExplorerConfig {
            coverage_target: e.coverage_target,
            max_outer_iterations: e.max_outer_iterations,
            outer: OuterSchedule {
                initial_temperature: e.initial_temperature,
                cooling_factor: e.cooling_factor,
            },
            inner: self.bdio,
            perturb_block_fraction: e.perturb_block_fraction,
            expansion_step: e.expansion_step,
            weights: self.cost,
            rng_seed: e.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = RunConfig::parse("", Path::new("x.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.explorer_config(), ExplorerConfig::default());
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_text = "[explorer]\ncoverage_target = 0.5\nseed = 9\n\n[bdio]\niterations = 200\n\n[cost]\narea_weight = 0.25\n";
        let json_text = r#"{"explorer": {"coverage_target": 0.5, "seed": 9}, "bdio": {"iterations": 200}, "cost": {"area_weight": 0.25}}"#;
        let a = RunConfig::parse(toml_text, Path::new("a.toml")).unwrap();
        let b = RunConfig::parse(json_text, Path::new("b.json")).unwrap();
        assert_eq!(a, b);
        let cfg = a.explorer_config();
        assert_eq!(cfg.coverage_target, 0.5);
        assert_eq!(cfg.rng_seed, 9);
        assert_eq!(cfg.inner.iterations, 200);
        assert_eq!(cfg.weights.area_weight, 0.25);
        assert_eq!(cfg.weights.wirelength_weight, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[explorer]\ncoverage = 0.5\n", Path::new("a.toml")).unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }));
    }
}
