//! Experiment and optimizer configuration files (JSON). Parsing is
//! strict: unknown fields and structural errors fail with the location
//! serde reports, and a config either parses completely or not at all.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use bellsim_core::hamiltonians::SpinSystem;
use bellsim_core::operator::Operator;
use bellsim_core::optimize::{ObjectiveKind, ParamPath};
use bellsim_core::pulse::EightPulseCycleSpec;

/// Errors surfaced by the CLI with their process exit codes: config
/// problems exit 2, numerical failures exit 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical error in {module}: {source}")]
    Numerical {
        module: &'static str,
        source: bellsim_core::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn numerical(module: &'static str) -> impl FnOnce(bellsim_core::Error) -> CliError {
        move |source| CliError::Numerical { module, source }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub shift_1_hz: f64,
    pub shift_2_hz: f64,
    pub splitting_hz: f64,
}

impl SystemConfig {
    pub fn to_system(&self) -> Result<SpinSystem, CliError> {
        SpinSystem::new(self.shift_1_hz, self.shift_2_hz, self.splitting_hz)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[serde(rename = "pseudopure_00")]
    Pseudopure00,
    BellPhiPlus,
    BellPhiMinus,
    Custom(Operator),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// Start exactly in the named state.
    Ideal,
    /// Prepare it with the pulse-sequence model (pseudopure channel, then
    /// the entangler for the Bell states).
    Sequence,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionConfig {
    /// Forward plus π/2-phase-shifted evolution at the solved time.
    TwoVariant,
    /// Average over an array of evolution times under the extracted
    /// effective Hamiltonian.
    TimeArray {
        n_times: usize,
        tol: f64,
        #[serde(default = "default_ta_budget")]
        budget: usize,
        #[serde(default)]
        seed: u64,
    },
    /// The analytic dephasing oracle in the Bell basis.
    IdealOracle,
}

fn default_ta_budget() -> usize {
    20_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleConfig {
    /// The shipped timing pattern parameterized by its cycle time.
    Reference {
        cycle_time_us: f64,
        pulse_width_us: f64,
        repeat: u32,
    },
    /// Fully explicit timing.
    Explicit(EightPulseCycleSpec),
}

impl CycleConfig {
    pub fn to_spec(&self) -> Result<EightPulseCycleSpec, CliError> {
        let spec = match self {
            CycleConfig::Reference { cycle_time_us, pulse_width_us, repeat } => {
                bellsim_core::pulse::reference_dq_cycle(
                    cycle_time_us * 1e-6,
                    pulse_width_us * 1e-6,
                    *repeat,
                )
                .map_err(|e| CliError::Config(e.to_string()))?
            }
            CycleConfig::Explicit(spec) => spec.clone(),
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub enabled: bool,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub initial_state: InitialState,
    pub preparation: Preparation,
    pub projection: ProjectionConfig,
    pub cycle: CycleConfig,
    pub tomography: TomographyConfig,
    /// Acceptance bound on the trace distance between the dynamical
    /// projection and the ideal dephasing oracle.
    pub oracle_bound: f64,
    pub outputs: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.system.to_system()?;
        self.cycle.to_spec()?;
        if self.oracle_bound.is_nan() || self.oracle_bound <= 0.0 {
            return Err(CliError::Config("oracle_bound must be positive".into()));
        }
        if self.tomography.noise_sigma < 0.0 {
            return Err(CliError::Config("noise_sigma must be nonnegative".into()));
        }
        if matches!(self.initial_state, InitialState::Custom(_))
            && self.preparation == Preparation::Sequence
        {
            return Err(CliError::Config(
                "custom initial states have no preparation sequence; use \"ideal\"".into(),
            ));
        }
        if let ProjectionConfig::TimeArray { n_times, tol, .. } = &self.projection {
            if *n_times < 2 {
                return Err(CliError::Config("time_array needs n_times >= 2".into()));
            }
            if tol.is_nan() || *tol <= 0.0 {
                return Err(CliError::Config("time_array tol must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Configuration of an `optimize` run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub system: SystemConfig,
    pub cycle: CycleConfig,
    pub objective: ObjectiveKind,
    /// Per-delay bounds as multiples of the reference interval unit
    /// `u = (cycle_time - 8 width)/24`.
    pub delay_lower_factor: f64,
    pub delay_upper_factor: f64,
    /// Parameters to leave free; defaults to all nine delays.
    #[serde(default)]
    pub free: Option<Vec<ParamPath>>,
    pub budget: u64,
    pub seed: u64,
    pub outputs: String,
}

impl OptimizeConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: OptimizeConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.delay_lower_factor.is_nan()
            || cfg.delay_lower_factor < 0.0
            || cfg.delay_lower_factor >= cfg.delay_upper_factor
        {
            return Err(CliError::Config("delay bound factors must satisfy 0 <= lower < upper".into()));
        }
        if cfg.budget == 0 {
            return Err(CliError::Config("budget must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Shipped configs, also available as files under `configs/`.
pub const PAPER_CONFIG_JSON: &str = include_str!("../configs/paper.json");
pub const IDEAL_CONFIG_JSON: &str = include_str!("../configs/ideal.json");
pub const OPTIMIZE_PAPER_CONFIG_JSON: &str = include_str!("../configs/optimize_paper.json");

pub fn builtin_config(name: &str) -> Option<&'static str> {
    match name {
        "paper" => Some(PAPER_CONFIG_JSON),
        "ideal" => Some(IDEAL_CONFIG_JSON),
        _ => None,
    }
}
