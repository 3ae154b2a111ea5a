use super::{ExperimentError, Result};
use crate::controller::{ControllerConfig, Switching};
use crate::delay_history::PreHistory;
use crate::frac_calc::FractionalOrder;
use crate::systems::{gyro_system_with_forcing, SystemDefinition, GYRO_FORCING_AMPLITUDE};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Infinity-norm threshold on the periodicity defect used for convergence.
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    AdaptiveDelayed,
    LinearDelayed,
    None,
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControllerKind::AdaptiveDelayed => "adaptive_delayed",
            ControllerKind::LinearDelayed => "linear_delayed",
            ControllerKind::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub h: f64,
    pub t_end: f64,
    pub x0: Vec<f64>,
    pub theta_hat0: Vec<f64>,
    pub k_hat0: f64,
    pub memory_window: Option<usize>,
    pub pre_history: PreHistory,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub system: SystemDefinition,
    pub simulation: SimulationConfig,
    pub controller: ControllerConfig,
    pub kind: ControllerKind,
    pub baseline_gains: Vec<f64>,
    pub convergence_threshold: f64,
    pub out_dir: Option<PathBuf>,
    /// Gyro forcing frequency override.
    pub forcing_frequency: Option<f64>,
}

/// On-disk scenario description. Everything except `system` falls back to
/// the plant's preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_hat0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_hat0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub robustness: Option<f64>,
    /// `sign`, `saturation` or `sigmoid`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switching: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_on: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerKind>,
    #[serde(rename = "K_baseline", skip_serializing_if = "Option::is_none")]
    pub baseline_gains: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_switching: Option<bool>,
    /// `zero_control` or `hold_initial`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_history: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_threshold: Option<f64>,
    /// Gyro only: frequency of the parametric forcing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forcing_frequency: Option<f64>,
}

struct Preset {
    gamma: Vec<f64>,
    gamma_k: f64,
    settle_after_activation: f64,
    baseline_gains: Vec<f64>,
}

fn preset(name: &str) -> Preset {
    match name {
        "gyro" => Preset {
            gamma: vec![2.0; 4],
            gamma_k: 2.0,
            settle_after_activation: 30.0,
            baseline_gains: vec![2.0, 0.5],
        },
        _ => Preset {
            gamma: vec![5.0; 4],
            gamma_k: 1.0,
            settle_after_activation: 40.0,
            baseline_gains: vec![2.0, 5.0],
        },
    }
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut system = SystemDefinition::by_name(&self.system)?;
        let base = preset(&system.name);
        if let Some(w) = self.forcing_frequency {
            if system.name != "gyro" {
                return Err(ExperimentError::Config(
                    "forcing_frequency only applies to the gyro plant".into(),
                ));
            }
            if !w.is_finite() {
                return Err(ExperimentError::Config(format!("forcing_frequency = {w}")));
            }
            system = gyro_system_with_forcing(GYRO_FORCING_AMPLITUDE, w);
        }
        if let Some(a) = self.alpha {
            let alpha = FractionalOrder::new(a).map_err(|e| ExperimentError::Config(e.to_string()))?;
            system = system.with_alpha(alpha);
        }
        if let Some(period) = self.period {
            system = system.with_period(period);
        }
        let period = system.period;
        let t_on = self.t_on.unwrap_or(4.0 * period);
        let t_end = self.t_end.unwrap_or(t_on + base.settle_after_activation);
        let delta = self.delta.unwrap_or(0.01);
        let switching = match self.switching.as_deref().unwrap_or("saturation") {
            "sign" => Switching::Sign,
            "saturation" | "sat" => Switching::Saturation { delta },
            "sigmoid" => Switching::Sigmoid { delta },
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown switching mode {other:?} (sign, saturation, sigmoid)"
                )))
            }
        };
        let pre_history = match self.pre_history.as_deref().unwrap_or("zero_control") {
            "zero_control" => PreHistory::ZeroControl,
            "hold_initial" => PreHistory::HoldInitial,
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown pre_history policy {other:?} (zero_control, hold_initial)"
                )))
            }
        };
        let controller = ControllerConfig {
            period,
            eta: self.eta.clone().unwrap_or_else(|| vec![1.0, 2.0]),
            gamma: self.gamma.clone().unwrap_or(base.gamma),
            gamma_k: self.gamma_k.unwrap_or(base.gamma_k),
            mu: self.mu.unwrap_or(0.1),
            robustness: self.robustness.unwrap_or(10.0),
            switching,
            t_on,
            reduced_switching: self.reduced_switching.unwrap_or(true),
        };
        let simulation = SimulationConfig {
            h: self.h.unwrap_or(0.005),
            t_end,
            x0: self.x0.clone().unwrap_or_else(|| vec![0.15, 0.1]),
            theta_hat0: self
                .theta_hat0
                .clone()
                .unwrap_or_else(|| vec![-1.5, 1.5, 0.2, 0.5]),
            k_hat0: self.k_hat0.unwrap_or(0.1),
            memory_window: self.memory_window,
            pre_history,
        };
        let cfg = ScenarioConfig {
            system,
            simulation,
            controller,
            kind: self.controller.unwrap_or(ControllerKind::AdaptiveDelayed),
            baseline_gains: self.baseline_gains.clone().unwrap_or(base.baseline_gains),
            convergence_threshold: self
                .convergence_threshold
                .unwrap_or(DEFAULT_CONVERGENCE_THRESHOLD),
            out_dir: self.out_dir.clone(),
            forcing_frequency: self.forcing_frequency,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    /// Preset scenario for a named plant (`duffing` or `gyro`).
    pub fn preset(system: &str) -> Result<Self> {
        ScenarioFile {
            system: system.to_string(),
            ..Default::default()
        }
        .resolve()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        ScenarioFile::from_path(path)?.resolve()
    }

    pub fn with_kind(mut self, kind: ControllerKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.system.alpha
    }

    pub fn period(&self) -> f64 {
        self.controller.period
    }

    pub fn validate(&self) -> Result<()> {
        let sys = &self.system;
        let sim = &self.simulation;
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if sim.x0.len() != sys.n {
            return bad(format!("x0 has {} entries, plant order is {}", sim.x0.len(), sys.n));
        }
        if sim.theta_hat0.len() != sys.m {
            return bad(format!(
                "theta_hat0 has {} entries, plant has {} parameters",
                sim.theta_hat0.len(),
                sys.m
            ));
        }
        if self.baseline_gains.len() != sys.n {
            return bad(format!(
                "K_baseline has {} entries, plant order is {}",
                self.baseline_gains.len(),
                sys.n
            ));
        }
        if !(sim.h.is_finite() && sim.h > 0.0) {
            return bad(format!("h = {} must be positive", sim.h));
        }
        if (self.controller.period - sys.period).abs() > 0.0 {
            return bad("controller and plant periods differ".into());
        }
        let period = self.controller.period;
        if !(period.is_finite() && period >= sim.h) {
            return bad(format!("T = {period} must be at least one step"));
        }
        if !(self.convergence_threshold > 0.0) {
            return bad("convergence_threshold must be positive".into());
        }
        if !(sim.t_end > self.controller.t_on + 2.0 * period) {
            return bad(format!(
                "t_end = {} must exceed t_on + 2T = {}",
                sim.t_end,
                self.controller.t_on + 2.0 * period
            ));
        }
        if self.controller.t_on < period {
            log::warn!(
                "t_on = {} is shorter than one period; the delayed state is pre-history at activation",
                self.controller.t_on
            );
        }
        Ok(())
    }

    /// Back to the on-disk form (plant by name).
    pub fn to_file(&self) -> ScenarioFile {
        let c = &self.controller;
        let s = &self.simulation;
        let (switching, delta) = match c.switching {
            Switching::Sign => ("sign", None),
            Switching::Saturation { delta } => ("saturation", Some(delta)),
            Switching::Sigmoid { delta } => ("sigmoid", Some(delta)),
        };
        ScenarioFile {
            system: self.system.name.clone(),
            alpha: Some(self.system.alpha.value()),
            h: Some(s.h),
            t_end: Some(s.t_end),
            x0: Some(s.x0.clone()),
            theta_hat0: Some(s.theta_hat0.clone()),
            k_hat0: Some(s.k_hat0),
            eta: Some(c.eta.clone()),
            gamma: Some(c.gamma.clone()),
            gamma_k: Some(c.gamma_k),
            mu: Some(c.mu),
            robustness: Some(c.robustness),
            switching: Some(switching.into()),
            delta,
            period: Some(c.period),
            t_on: Some(c.t_on),
            controller: Some(self.kind),
            baseline_gains: Some(self.baseline_gains.clone()),
            out_dir: self.out_dir.clone(),
            reduced_switching: Some(c.reduced_switching),
            pre_history: Some(
                match s.pre_history {
                    PreHistory::ZeroControl => "zero_control",
                    PreHistory::HoldInitial => "hold_initial",
                }
                .into(),
            ),
            memory_window: s.memory_window,
            convergence_threshold: Some(self.convergence_threshold),
            forcing_frequency: self.forcing_frequency,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn duffing_preset_values() {
        let c = ScenarioConfig::preset("duffing").unwrap();
        assert_eq!(c.simulation.h, 0.005);
        assert_eq!(c.simulation.x0, vec![0.15, 0.1]);
        assert_eq!(c.simulation.theta_hat0, vec![-1.5, 1.5, 0.2, 0.5]);
        assert_eq!(c.simulation.k_hat0, 0.1);
        assert_eq!(c.controller.gamma, vec![5.0; 4]);
        assert_eq!(c.controller.gamma_k, 1.0);
        assert_eq!(c.controller.period, 2.0 * PI);
        assert_eq!(c.controller.t_on, 8.0 * PI);
        assert_eq!(c.simulation.t_end, 8.0 * PI + 40.0);
        assert_eq!(c.alpha().value(), 0.98);
        assert!(c.controller.reduced_switching);
        assert_eq!(c.controller.switching, Switching::Saturation { delta: 0.01 });
        assert_eq!(c.baseline_gains, vec![2.0, 5.0]);
    }

    #[test]
    fn gyro_preset_values() {
        let c = ScenarioConfig::preset("gyro").unwrap();
        assert_eq!(c.controller.gamma, vec![2.0; 4]);
        assert_eq!(c.controller.gamma_k, 2.0);
        assert_eq!(c.controller.period, 4.0 * PI);
        assert_eq!(c.controller.t_on, 16.0 * PI);
        assert_eq!(c.simulation.t_end, 16.0 * PI + 30.0);
    }

    #[test]
    fn file_overrides_and_round_trip() {
        let text = r#"
            system = "duffing"
            alpha = 0.96
            T = 6.0
            switching = "sign"
            controller = "linear_delayed"
            K_baseline = [1.0, 2.0]
            M = 3.0
        "#;
        let c = ScenarioFile::from_toml_str(text).unwrap().resolve().unwrap();
        assert_eq!(c.alpha().value(), 0.96);
        assert_eq!(c.controller.period, 6.0);
        assert_eq!(c.system.period, 6.0);
        assert_eq!(c.controller.t_on, 24.0);
        assert_eq!(c.controller.switching, Switching::Sign);
        assert_eq!(c.kind, ControllerKind::LinearDelayed);
        assert_eq!(c.controller.robustness, 3.0);
        let again = ScenarioFile::from_toml_str(&c.to_file().to_toml_string())
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(again.to_file(), c.to_file());
    }

    #[test]
    fn config_errors() {
        assert!(ScenarioFile::from_toml_str("system = \"duffing\"\nbogus = 1").is_err());
        assert!(ScenarioFile::from_toml_str("system = \"lorenz\"")
            .unwrap()
            .resolve()
            .is_err());
        let short = ScenarioFile::from_toml_str("system = \"duffing\"\nt_end = 30.0").unwrap();
        assert!(matches!(short.resolve(), Err(ExperimentError::Config(_))));
        let bad_x0 = ScenarioFile::from_toml_str("system = \"gyro\"\nx0 = [1.0]").unwrap();
        assert!(bad_x0.resolve().is_err());
        let bad_alpha = ScenarioFile::from_toml_str("system = \"gyro\"\nalpha = 1.2").unwrap();
        assert!(bad_alpha.resolve().is_err());
    }
}
