use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use teichkit_core::domains::{CoefficientSpec, HolomorphicFunction};

use crate::error::{config, Result};

/// Every subcommand accepted by [`crate::run`].
pub const COMMANDS: [&str; 12] = [
    "norm",
    "solve",
    "bers",
    "aw",
    "bilip",
    "weld",
    "besov",
    "extend",
    "characterize",
    "roundtrip",
    "constants",
    "verify-all",
];

/// Exponents used when none are given.
pub const DEFAULT_P: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// Tolerance names and their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 6] = [
    ("equivalence", 1e-2),
    ("identity", 5e-2),
    ("residual", 1e-3),
    ("roundtrip", 0.1),
    ("section", 5e-3),
    ("welding", 1e-2),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    /// Half width of the computational box; each operation's default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// A single exponent or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PList {
    One(f64),
    Many(Vec<f64>),
}

impl PList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            PList::One(p) => vec![*p],
            PList::Many(v) => v.clone(),
        }
    }
}

/// Holomorphic test functions on the disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Monomial {
        n: usize,
    },
    /// `1/(z - a)` with `|a| > 1`.
    SimplePole {
        a: [f64; 2],
    },
    /// `-6c/(z² - c)²` on the exterior disk.
    DiskSchwarzian {
        c: [f64; 2],
    },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<HolomorphicFunction> {
        match *self {
            FunctionSpec::Monomial { n } => Ok(HolomorphicFunction::monomial(n)),
            FunctionSpec::SimplePole { a } => {
                let a = Complex64::new(a[0], a[1]);
                if a.norm() <= 1.0 {
                    return Err(config("simple pole must lie outside the closed disk"));
                }
                Ok(HolomorphicFunction::simple_pole(a, 96))
            }
            FunctionSpec::DiskSchwarzian { c } => Ok(HolomorphicFunction::disk_schwarzian(
                Complex64::new(c[0], c[1]),
                64,
            )),
        }
    }

    pub fn on_exterior(&self) -> bool {
        matches!(self, FunctionSpec::DiskSchwarzian { .. })
    }
}

/// The `(k, r)` grid of `k χ_{|z|<r}` used by `constants`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub k: Vec<f64>,
    pub r: Vec<f64>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            k: vec![0.1, 0.2, 0.3],
            r: vec![0.3, 0.5, 0.7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Extension kernel for `extend`: `gaussian` or `box`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    /// Criteria run by `verify-all`; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
}

impl ExperimentConfig {
    pub fn new(command: &str) -> Self {
        ExperimentConfig {
            command: command.to_string(),
            mu: None,
            phi: None,
            p: None,
            grid: None,
            tolerances: BTreeMap::new(),
            output_path: None,
            seed: 0,
            delta: None,
            kernel: None,
            family: None,
            criteria: None,
        }
    }

    /// Whether `p` must exceed one for this command.
    fn needs_p_above_one(&self) -> bool {
        matches!(
            self.command.as_str(),
            "besov" | "extend" | "characterize" | "roundtrip"
        )
    }

    /// Exponents for this command.  The default list drops `p = 1` where
    /// only `p > 1` is meaningful; an explicit `p = 1` there is an error.
    pub fn p_values(&self) -> Vec<f64> {
        match &self.p {
            Some(p) => p.values(),
            None if self.needs_p_above_one() => {
                DEFAULT_P.iter().copied().filter(|&p| p > 1.0).collect()
            }
            None => DEFAULT_P.to_vec(),
        }
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .expect("known tolerance")
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(crate::error::CliError::UnknownCommand(self.command.clone()));
        }
        for (name, &v) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return Err(config(format!("unknown tolerance {name:?}")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(config(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        if let Some(g) = self.grid {
            if !g.n.is_power_of_two() || g.n < 8 {
                return Err(config(format!(
                    "grid N = {} is not a power of two >= 8",
                    g.n
                )));
            }
            if let Some(w) = g.half_width {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(config("grid half_width must be positive"));
                }
            }
        }
        let ps = self.p_values();
        if ps.is_empty() {
            return Err(config("empty exponent list"));
        }
        let floor = if self.needs_p_above_one() {
            "> 1"
        } else {
            ">= 1"
        };
        for &p in &ps {
            let ok = p.is_finite()
                && if self.needs_p_above_one() {
                    p > 1.0
                } else {
                    p >= 1.0
                };
            if !ok {
                return Err(config(format!("{} needs p {floor}, got {p}", self.command)));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 1.0 / 3.0) {
                return Err(config(format!("delta must lie in (0, 1/3], got {d}")));
            }
        }
        if let Some(k) = &self.kernel {
            if k != "gaussian" && k != "box" {
                return Err(config(format!("unknown kernel {k:?}")));
            }
        }
        Ok(())
    }
}

/// Contents of a `--config` file: one experiment or a batch.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ConfigFile {
    Batch { experiments: Vec<ExperimentConfig> },
    Single(ExperimentConfig),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Vec<ExperimentConfig>> {
        let text = std::fs::read_to_string(path)?;
        let file: ConfigFile = serde_json::from_str(&text)?;
        Ok(match file {
            ConfigFile::Batch { experiments } => experiments,
            ConfigFile::Single(c) => vec![c],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_exponents_depend_on_the_command() {
        assert_eq!(
            ExperimentConfig::new("norm").p_values(),
            vec![1.0, 1.5, 2.0, 3.0]
        );
        assert_eq!(
            ExperimentConfig::new("besov").p_values(),
            vec![1.5, 2.0, 3.0]
        );
    }

    #[test]
    fn rejects_invalid_settings() {
        let mut c = ExperimentConfig::new("besov");
        c.p = Some(PList::One(1.0));
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new("norm");
        c.grid = Some(GridConfig {
            n: 300,
            half_width: None,
        });
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new("norm");
        c.tolerances.insert("residual".into(), -1.0);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::new("norm");
        c.tolerances.insert("nonsense".into(), 1.0);
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::new("plot").validate().is_err());
    }

    #[test]
    fn parses_single_and_batch_files() {
        let single: ConfigFile = serde_json::from_str(
            r#"{"command": "norm", "mu": {"kind": "constant_disk", "k": 0.3, "r": 0.5}, "p": 2}"#,
        )
        .unwrap();
        assert!(matches!(single, ConfigFile::Single(ref c) if c.p == Some(PList::One(2.0))));
        let batch: ConfigFile = serde_json::from_str(
            r#"{"experiments": [{"command": "norm"}, {"command": "bers", "p": [1, 2]}]}"#,
        )
        .unwrap();
        assert!(matches!(batch, ConfigFile::Batch { ref experiments } if experiments.len() == 2));
    }
}
