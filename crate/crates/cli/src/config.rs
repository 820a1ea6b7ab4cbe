//! Experiment configuration: one JSON document with the sections
//! `parameters`, `potential`, `input`, `schedule` and `run`.

use std::path::Path;

use cal_core::dynamics::CauchyData;
use cal_core::input::InputSignal;
use cal_core::overload::{ResetMode, Schedule};
use cal_core::params::{derive, CALParameters, RawParameters};
use cal_core::potential::PotentialSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Analyze,
    Simulate,
    CompareGradientFlow,
    ActionOracle,
    ResetExperiment,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Analyze => "analyze",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::CompareGradientFlow => "compare-gradient-flow",
            ExperimentKind::ActionOracle => "action-oracle",
            ExperimentKind::ResetExperiment => "reset-experiment",
        }
    }
}

/// Exactly one of the `raw` and `derived` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParametersRepr", into = "ParametersRepr")]
pub enum Parameters {
    Raw(RawParameters),
    Derived(CALParameters),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParametersRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw: Option<RawParameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    derived: Option<CALParameters>,
}

impl TryFrom<ParametersRepr> for Parameters {
    type Error = String;

    fn try_from(r: ParametersRepr) -> Result<Self, String> {
        match (r.raw, r.derived) {
            (Some(raw), None) => Ok(Parameters::Raw(raw)),
            (None, Some(d)) => Ok(Parameters::Derived(d)),
            (Some(_), Some(_)) => {
                Err("both `raw` and `derived` parameter blocks are present; keep exactly one".into())
            }
            (None, None) => Err("expected a `raw` or a `derived` parameter block".into()),
        }
    }
}

impl From<Parameters> for ParametersRepr {
    fn from(p: Parameters) -> Self {
        match p {
            Parameters::Raw(raw) => ParametersRepr {
                raw: Some(raw),
                derived: None,
            },
            Parameters::Derived(d) => ParametersRepr {
                raw: None,
                derived: Some(d),
            },
        }
    }
}

impl Parameters {
    pub fn cal(&self) -> CliResult<CALParameters> {
        match self {
            Parameters::Raw(raw) => derive(raw).map_err(|e| CliError::config("parameters.raw", e.to_string())),
            Parameters::Derived(d) => CALParameters::new(d.theta, d.mu, d.nu, d.gamma, d.k)
                .map_err(|e| CliError::config("parameters.derived", e.to_string())),
        }
    }

    pub fn raw(&self) -> Option<&RawParameters> {
        match self {
            Parameters::Raw(raw) => Some(raw),
            Parameters::Derived(_) => None,
        }
    }
}

/// Either explicit breakpoints or a periodic generator; the horizon is
/// `run.horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Breakpoints {
        breakpoints: Vec<f64>,
    },
    Periodic {
        period_a: f64,
        period_b: f64,
        count: usize,
    },
}

impl ScheduleSpec {
    pub fn build(&self, horizon: f64) -> CliResult<Schedule> {
        let s = match self {
            ScheduleSpec::Breakpoints { breakpoints } => Schedule::new(breakpoints.clone(), horizon),
            ScheduleSpec::Periodic {
                period_a,
                period_b,
                count,
            } => Schedule::periodic(*period_a, *period_b, *count, horizon),
        };
        s.map_err(|e| CliError::config("schedule", e.to_string()))
    }
}

/// B-phase coefficients for schedule runs. Precedence: `epsilon` (adaptive
/// design per B-phase), then `b_parameters`, then `rho` (fixed design).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetSpec {
    #[serde(default = "default_mode")]
    pub mode: ResetMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Defaults to the bound `C` of the design.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vandermonde_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_parameters: Option<Parameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// `γ̄` of the design; defaults to `ρ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_bar: Option<f64>,
    /// Random entry states drawn for the latch tally of `reset-experiment`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

fn default_mode() -> ResetMode {
    ResetMode::SimulateB
}

impl Default for ResetSpec {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            epsilon: None,
            vandermonde_bound: None,
            b_parameters: None,
            rho: None,
            gamma_bar: None,
            trials: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub horizon: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Missing entries default to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<CauchyData>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// θ values for `compare-gradient-flow`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thetas: Vec<f64>,
    /// Compare through the mechanics-mode reduction.
    #[serde(default, skip_serializing_if = "is_false")]
    pub mechanics: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<ResetSpec>,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub parameters: Parameters,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    /// Defaults to a zero signal of the potential's input dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSignal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSpec>,
    pub run: RunSpec,
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::Zero { dim: 1 }
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the field path plus the line and
    /// column reported by the parser.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let location = format!("{path} (line {}, column {})", inner.line(), inner.column());
            CliError::config(location, strip_position(&inner.to_string()))
        })?;
        de.end()
            .map_err(|e| CliError::config(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config { location, message } => {
                CliError::config(format!("{}: {location}", path.display()), message)
            }
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let run = &self.run;
        if !(run.horizon.is_finite() && run.horizon > 0.0) {
            return Err(CliError::config("run.horizon", format!("must be positive, got {}", run.horizon)));
        }
        if !(run.step.is_finite() && run.step > 0.0 && run.step <= run.horizon) {
            return Err(CliError::config(
                "run.step",
                format!("must lie in (0, horizon], got {}", run.step),
            ));
        }
        self.parameters.cal()?;
        let n = self.potential.weight_dim();
        if let Some(c) = &run.cauchy {
            let fields = [
                ("run.cauchy.q0", Some(&c.q0)),
                ("run.cauchy.q1", Some(&c.q1)),
                ("run.cauchy.q2", c.q2.as_ref()),
                ("run.cauchy.q3", c.q3.as_ref()),
            ];
            for (what, v) in fields {
                if let Some(v) = v {
                    if v.len() != n {
                        return Err(CliError::config(
                            what,
                            format!("expected {n} entries for the potential's weights, got {}", v.len()),
                        ));
                    }
                }
            }
        }
        let input = self.input_signal();
        input
            .validate()
            .map_err(|e| CliError::config("input", e.to_string()))?;
        if let Some(m) = self.potential.input_dim() {
            if input.dim() != m {
                return Err(CliError::config(
                    "input",
                    format!("potential expects input dimension {m}, got {}", input.dim()),
                ));
            }
        }
        if let Some(s) = &self.schedule {
            s.build(run.horizon)?;
        }
        if let Some(r) = &run.reset {
            for (what, v) in [("run.reset.epsilon", r.epsilon), ("run.reset.rho", r.rho)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(CliError::config(what, format!("must be positive, got {v}")));
                    }
                }
            }
            if let Some(b) = &r.b_parameters {
                b.cal()?;
            }
        }
        Ok(())
    }

    pub fn input_signal(&self) -> InputSignal {
        self.input.clone().unwrap_or_else(|| InputSignal::Zero {
            dim: self
                .potential
                .input_dim()
                .unwrap_or_else(|| self.potential.weight_dim()),
        })
    }

    pub fn cauchy(&self) -> CauchyData {
        let n = self.potential.weight_dim();
        self.run
            .cauchy
            .clone()
            .unwrap_or_else(|| CauchyData::new(vec![0.0; n], vec![0.0; n]))
    }
}

/// serde_json appends " at line L column C"; the location is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
