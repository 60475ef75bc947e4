//! Run configuration: a TOML document with four sections.
//!
//! ```toml
//! [hyperparameters]      # required; num_particles, dim, num_iterations, bound
//! num_particles = 500    # (aliases M, d, T, L) plus optional alpha, eta,
//! dim = 1                # epsilon, gamma, perturb_std, seed,
//! num_iterations = 2000  # record_trajectory, cheap_history
//! bound = 5.0
//!
//! [target]               # required; kind = gaussian | mixture | banana | ring
//! kind = "gaussian"
//! mean = [0.0]
//! std = 1.0
//!
//! [baseline]             # optional Metropolis-Hastings reference run
//! num_chains = 256
//! steps = 5000
//! proposal_std = 1.0
//! burn_in = 1000
//! bound = 5.0
//!
//! [output]               # optional
//! directory = "out"
//! trajectory = false
//! metrics = true
//! ```
//!
//! Unknown keys are rejected in every section.

use std::path::PathBuf;

use rparvi::{Density, HyperparameterInput, Hyperparameters, MhConfig, TargetDensity};
use serde::{Deserialize, Serialize};

use crate::CliError;

const SECTIONS: &[&str] = &["hyperparameters", "target", "baseline", "output"];
const OUTPUT_KEYS: &[&str] = &[
    "directory",
    "trajectory",
    "metrics",
    "ks",
    "mode_centers",
    "mode_radius",
    "mmd_bandwidth",
];
const BASELINE_KEYS: &[&str] = &["num_chains", "steps", "proposal_std", "burn_in", "seed", "bound", "thin"];

fn target_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "gaussian" => &["kind", "mean", "std"],
        "mixture" => &["kind", "components"],
        "banana" => &["kind", "curvature", "scale"],
        "ring" => &["kind", "radius", "width"],
        _ => return None,
    })
}

fn default_directory() -> PathBuf {
    PathBuf::from("rparvi-out")
}

fn yes() -> bool {
    true
}

fn unit_radius() -> f64 {
    1.0
}

/// Where and what to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    /// Write trajectory.csv (forces trajectory recording).
    #[serde(default)]
    pub trajectory: bool,
    #[serde(default = "yes")]
    pub metrics: bool,
    /// KS statistics against closed-form marginals, where the target has them.
    #[serde(default = "yes")]
    pub ks: bool,
    /// Centers for mode occupancy; defaults to the target's known modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_centers: Option<Vec<Vec<f64>>>,
    #[serde(default = "unit_radius")]
    pub mode_radius: f64,
    /// Fixed RBF bandwidth for MMD; median heuristic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmd_bandwidth: Option<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            trajectory: false,
            metrics: true,
            ks: true,
            mode_centers: None,
            mode_radius: 1.0,
            mmd_bandwidth: None,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hyperparameters: Hyperparameters,
    pub target: TargetDensity,
    pub baseline: Option<MhConfig>,
    pub output: OutputConfig,
}

#[derive(Serialize)]
struct Document<'a> {
    hyperparameters: HyperparameterInput,
    target: &'a TargetDensity,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<&'a MhConfig>,
    output: &'a OutputConfig,
}

fn reject_unknown(table: &toml::Table, allowed: &[&str], section: &str) -> Result<(), CliError> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(key) if section.is_empty() => Err(CliError::Config(format!("unknown key: {key}"))),
        Some(key) => Err(CliError::Config(format!("unknown key: {key} (in [{section}])"))),
        None => Ok(()),
    }
}

fn section<'a>(doc: &'a toml::Table, name: &str) -> Result<Option<&'a toml::Table>, CliError> {
    match doc.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(CliError::Config(format!("[{name}] must be a table"))),
    }
}

fn decode<T: serde::de::DeserializeOwned>(table: &toml::Table, name: &str) -> Result<T, CliError> {
    table
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("invalid [{name}]: {}", e.message())))
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("malformed config: {}", e.message())))?;
    reject_unknown(&doc, SECTIONS, "")?;

    let hp_table = section(&doc, "hyperparameters")?
        .ok_or_else(|| CliError::Config("missing [hyperparameters] section".into()))?;
    reject_unknown(hp_table, HyperparameterInput::KEYS, "hyperparameters")?;
    let raw: HyperparameterInput = decode(hp_table, "hyperparameters")?;

    let target_table = section(&doc, "target")?.ok_or_else(|| CliError::Config("missing target".into()))?;
    let kind = target_table
        .get("kind")
        .and_then(toml::Value::as_str)
        .ok_or_else(|| CliError::Config("target.kind must be a string".into()))?;
    let keys = target_keys(kind).ok_or_else(|| {
        CliError::Config(format!(
            "unknown target kind: {kind} (expected one of {})",
            TargetDensity::KINDS.join(", ")
        ))
    })?;
    reject_unknown(target_table, keys, "target")?;
    let target: TargetDensity = decode(target_table, "target")?;

    let baseline = match section(&doc, "baseline")? {
        Some(t) => {
            reject_unknown(t, BASELINE_KEYS, "baseline")?;
            Some(decode::<MhConfig>(t, "baseline")?)
        }
        None => None,
    };
    let output = match section(&doc, "output")? {
        Some(t) => {
            reject_unknown(t, OUTPUT_KEYS, "output")?;
            decode(t, "output")?
        }
        None => OutputConfig::default(),
    };

    RunConfig::new(raw, target, baseline, output)
}

impl RunConfig {
    pub fn new(
        mut raw: HyperparameterInput,
        target: TargetDensity,
        baseline: Option<MhConfig>,
        output: OutputConfig,
    ) -> Result<Self, CliError> {
        if output.trajectory {
            raw.record_trajectory = Some(true);
        }
        let hyperparameters = raw.validate().map_err(|e| CliError::Config(e.to_string()))?;
        target
            .validate()
            .map_err(|e| CliError::Config(format!("target: {e}")))?;
        if target.dim() != hyperparameters.dim() {
            return Err(CliError::Config(format!(
                "target dimension {} does not match dim = {}",
                target.dim(),
                hyperparameters.dim()
            )));
        }
        if let Some(b) = &baseline {
            b.validate().map_err(|e| CliError::Config(format!("baseline: {e}")))?;
        }
        if !(output.mode_radius > 0.0 && output.mode_radius.is_finite()) {
            return Err(CliError::Config("output: mode_radius must be positive".into()));
        }
        if let Some(centers) = &output.mode_centers {
            if centers.is_empty() || centers.iter().any(|c| c.len() != hyperparameters.dim()) {
                return Err(CliError::Config(
                    "output: mode_centers must be nonempty with one coordinate per dimension".into(),
                ));
            }
        }
        if matches!(output.mmd_bandwidth, Some(h) if !(h > 0.0 && h.is_finite())) {
            return Err(CliError::Config("output: mmd_bandwidth must be positive".into()));
        }
        Ok(Self {
            hyperparameters,
            target,
            baseline,
            output,
        })
    }

    /// Serialize back to a TOML document with every default made explicit.
    pub fn to_toml(&self) -> String {
        let doc = Document {
            hyperparameters: self.hyperparameters.to_input(),
            target: &self.target,
            baseline: self.baseline.as_ref(),
            output: &self.output,
        };
        toml::to_string(&doc).expect("run config is always representable as TOML")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.hyperparameters = self.hyperparameters.with_seed(seed);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[hyperparameters]
M = 100
d = 2
T = 1000
L = 5.0

[target]
kind = "gaussian"
mean = [0.0, 0.0]
std = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        let hp = &cfg.hyperparameters;
        assert_eq!((hp.alpha(), hp.beta(), hp.gamma()), (0.6, 0.4, 0.9));
        assert_eq!((hp.epsilon(), hp.eta(), hp.perturb_std()), (0.1, 0.1, 0.1));
        assert_eq!(cfg.output, OutputConfig::default());
        assert!(cfg.baseline.is_none());
    }

    #[test]
    fn alpha_out_of_range() {
        let text = MINIMAL.replace("L = 5.0", "L = 5.0\nalpha = 1.5");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("alpha"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("L = 5.0", "L = 5.0\nmomentum = 0.5");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().starts_with("unknown key: momentum"), "{err}");

        let text = MINIMAL.replace("std = 1.0", "std = 1.0\nskew = 2");
        assert!(parse_config(&text).unwrap_err().to_string().contains("unknown key: skew"));
        let text = format!("{MINIMAL}\n[extras]\nx = 1\n");
        assert!(parse_config(&text).unwrap_err().to_string().contains("unknown key: extras"));
    }

    #[test]
    fn missing_target() {
        let text = MINIMAL.split("[target]").next().unwrap();
        assert!(parse_config(text).unwrap_err().to_string().contains("missing target"));
    }

    #[test]
    fn type_mismatch_names_section() {
        let text = MINIMAL.replace("M = 100", "M = \"many\"");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("[hyperparameters]"), "{err}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = MINIMAL.replace("mean = [0.0, 0.0]", "mean = [0.0]");
        assert!(parse_config(&text).unwrap_err().to_string().contains("dimension"));
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
[hyperparameters]
num_particles = 10
dim = 1
num_iterations = 20
bound = 4.0
alpha = 0.75
seed = 99
cheap_history = true

[target]
kind = "mixture"
components = [
  { weight = 0.5, mean = [-2.0], std = 0.5 },
  { weight = 0.5, mean = [2.0], std = 0.5 },
]

[baseline]
num_chains = 8
steps = 100
proposal_std = 1.0
burn_in = 10
bound = 4.0

[output]
directory = "somewhere"
trajectory = true
mode_centers = [[-2.0], [2.0]]
mmd_bandwidth = 0.7
"#;
        let cfg = parse_config(text).unwrap();
        assert!(cfg.hyperparameters.record_trajectory());
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }
}
