use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geometry::{Torus, TorusSpec};
use crate::graph::BuildMode;
use crate::kernels::KernelSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Degree,
    Phase,
    JointGroups,
    ConnectionCheck,
    Visualize,
}

/// One experiment, as read from a JSON document.
///
/// ```json
/// {
///   "kind": "phase",
///   "kernel": {"family": "gaussian", "params": {"sigma": 1.0}, "d": 2},
///   "torus": {"d": 2, "measure": "area", "value": 1000},
///   "replicates": 10,
///   "seed": 1
/// }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub kernel: KernelSpec,
    pub torus: TorusSpec,
    /// Vertex intensity; background intensity for planted experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Phase grid rows; defaults to `0.25, 0.5, ..., 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_values: Option<Vec<f64>>,
    /// Phase grid columns; defaults to `0.25, 0.5, ..., 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_values: Option<Vec<f64>>,
    /// Probe distances for planted-pair experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub build: BuildMode,
    /// Significance level of the dispersion test.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Confidence of the Wilson intervals.
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.01
}

fn default_confidence() -> f64 {
    0.99
}

/// `0.25, 0.5, ..., 4.0`.
pub fn default_phase_values() -> Vec<f64> {
    (1..=16).map(|k| k as f64 * 0.25).collect()
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(kind: ExperimentKind, kernel: KernelSpec, torus: TorusSpec) -> Self {
        ExperimentConfig {
            kind,
            kernel,
            torus,
            lambda: None,
            mu: None,
            lambda_values: None,
            mu_values: None,
            probes: None,
            replicates: 1,
            seed: 0,
            build: BuildMode::default(),
            alpha: default_alpha(),
            confidence: default_confidence(),
            output_dir: None,
        }
    }

    /// Parse and validate.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let torus = self.torus.resolve().map_err(|e| Error::config(format!("torus: {e}")))?;
        if self.kernel.dim() != torus.dim() {
            return Err(Error::config(format!(
                "kernel dimension {} differs from torus dimension {}",
                self.kernel.dim(),
                torus.dim()
            )));
        }
        self.kernel.norm().map_err(|e| Error::config(format!("kernel: {e}")))?;
        if self.replicates == 0 {
            return Err(Error::config("replicates must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::config(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        if let BuildMode::Truncated { eps_tail } | BuildMode::Auto { eps_tail } = self.build {
            if !(0.0..1.0).contains(&eps_tail) {
                return Err(Error::config(format!("eps_tail must lie in [0, 1), got {eps_tail}")));
            }
        }
        for (name, value) in [("lambda", self.lambda), ("mu", self.mu)] {
            if let Some(x) = value {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::config(format!("{name} must be non-negative, got {x}")));
                }
            }
        }
        for (name, grid) in [("lambda_values", &self.lambda_values), ("mu_values", &self.mu_values)] {
            if let Some(values) = grid {
                check_grid(name, values)?;
            }
        }
        if let Some(probes) = &self.probes {
            if probes.is_empty() || probes.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                return Err(Error::config("probes must be a non-empty list of non-negative distances"));
            }
        }
        let need = |name: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(Error::config(format!("{:?} experiments need \"{name}\"", self.kind)))
            }
        };
        match self.kind {
            ExperimentKind::Degree | ExperimentKind::Visualize => {
                need("lambda", self.lambda.is_some())?;
                need("mu", self.mu.is_some())?;
            }
            ExperimentKind::Phase => {}
            ExperimentKind::JointGroups | ExperimentKind::ConnectionCheck => {
                need("mu", self.mu.is_some())?;
                need("probes", self.probes.is_some())?;
                let half = 0.5 * torus.side();
                if let Some(t) = self.probes.as_ref().unwrap().iter().find(|&&t| t > half) {
                    return Err(Error::config(format!(
                        "probe distance {t} exceeds half the torus side {half}"
                    )));
                }
            }
        }
        if self.kind == ExperimentKind::Visualize && torus.dim() != 2 {
            return Err(Error::config("visualization needs a 2-dimensional torus"));
        }
        Ok(())
    }

    pub fn resolved_torus(&self) -> Result<Torus> {
        self.torus.resolve()
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        self.lambda_values.clone().unwrap_or_else(default_phase_values)
    }

    pub fn mu_grid(&self) -> Vec<f64> {
        self.mu_values.clone().unwrap_or_else(default_phase_values)
    }

    /// Intensity of the background vertex cloud in planted experiments.
    pub fn background_lambda(&self) -> f64 {
        self.lambda.unwrap_or(0.0)
    }
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(format!("{name} must not be empty")));
    }
    if values.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::config(format!("{name} must be strictly positive")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(format!("{name} must be strictly ascending")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHASE: &str = r#"{
        "kind": "phase",
        "kernel": {"family": "gaussian", "params": {"sigma": 1.0}, "d": 2},
        "torus": {"d": 2, "measure": "area", "value": 1000},
        "replicates": 10,
        "seed": 7
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json_str(PHASE).unwrap();
        assert_eq!(c.kind, ExperimentKind::Phase);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.lambda_grid().len(), 16);
        assert_eq!(c.mu_grid()[15], 4.0);
        assert_eq!(c.build, BuildMode::Auto { eps_tail: 1e-6 });
        assert_eq!(c.alpha, 0.01);
        assert!((c.kernel.norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trips() {
        let c = ExperimentConfig::from_json_str(PHASE).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            PHASE.replace("\"seed\": 7", "\"seed\": 7, \"sed\": 1"),
            PHASE.replace("\"replicates\": 10", "\"replicates\": 0"),
            PHASE.replace("\"phase\"", "\"percolation\""),
            PHASE.replace("\"d\": 2, \"measure\"", "\"d\": 3, \"measure\""),
            PHASE.replace("\"seed\": 7", "\"seed\": 7, \"mu_values\": [1, 0.5]"),
            PHASE.replace("\"seed\": 7", "\"seed\": 7, \"lambda_values\": [0, 1]"),
            PHASE.replace("\"kind\": \"phase\"", "\"kind\": \"degree\""),
            PHASE.replace("\"kind\": \"phase\"", "\"kind\": \"joint_groups\", \"mu\": 2"),
            PHASE.replace("\"seed\": 7", "\"seed\": 7, \"build\": {\"mode\": \"truncated\", \"eps_tail\": 2}"),
            PHASE.replace(
                "\"kind\": \"phase\"",
                "\"kind\": \"joint_groups\", \"mu\": 2, \"probes\": [0, 40]",
            ),
        ];
        for text in cases {
            assert!(
                matches!(ExperimentConfig::from_json_str(&text), Err(Error::Config(_))),
                "accepted {text}"
            );
        }
    }

    #[test]
    fn build_modes_parse() {
        let t = PHASE.replace("\"seed\": 7", "\"seed\": 7, \"build\": {\"mode\": \"truncated\", \"eps_tail\": 0.001}");
        assert_eq!(
            ExperimentConfig::from_json_str(&t).unwrap().build,
            BuildMode::Truncated { eps_tail: 0.001 }
        );
        let t = PHASE.replace("\"seed\": 7", "\"seed\": 7, \"build\": {\"mode\": \"exact\"}");
        assert_eq!(ExperimentConfig::from_json_str(&t).unwrap().build, BuildMode::Exact);
    }
}
