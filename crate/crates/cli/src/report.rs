//! Run reports and their file emission. Every number in a report is a
//! pure function of the config, so two runs of the same config produce
//! byte-identical payloads; no timestamps are recorded.

use serde::Serialize;
use std::fs;
use std::path::Path;

use bellsim_core::hamiltonians::bell_transform;
use bellsim_core::operator::{DensityMatrix, Operator};
use bellsim_core::tomography::bar_export;

use crate::config::{CliError, ExperimentConfig};

#[derive(Clone, Debug, Serialize)]
pub struct StatePair {
    pub multiplicative: Operator,
    pub bell: Operator,
}

impl StatePair {
    pub fn of(rho: &DensityMatrix) -> Result<Self, CliError> {
        let bell = bellsim_core::operator::change_basis(rho.operator(), &bell_transform())
            .map_err(CliError::numerical("quantum-core"))?;
        Ok(Self { multiplicative: rho.operator().clone(), bell })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveSummary {
    pub eigenvalues_rad_s: [f64; 4],
    pub bell_overlaps: [f64; 4],
    pub cycle_time_s: f64,
    pub h_eff: Operator,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingSummary {
    pub repeat: u32,
    pub total_time_s: f64,
    /// Cumulative delay rescaling applied so whole cycles meet the π/2
    /// condition.
    pub delay_scale: f64,
    /// |total_time·gap - π/2| of the executed sequence.
    pub timing_residual_rad: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TomographySummary {
    pub noise_sigma: f64,
    pub seed: u64,
    pub fidelity_reconstructed_vs_true: f64,
    pub reconstructed: Operator,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: Option<String>,
    pub config: ExperimentConfig,
    pub before: StatePair,
    pub after: StatePair,
    /// Uhlmann fidelity between the projected state and the input state.
    pub fidelity_after_vs_before: f64,
    pub bell_populations_before: [f64; 4],
    pub bell_populations_after: [f64; 4],
    /// Trace distance of the dynamical projection output to the ideal
    /// Bell-basis dephasing of the same input.
    pub oracle_deviation: f64,
    pub oracle_bound: f64,
    pub within_oracle_bound: bool,
    pub preparation_fidelity: Option<f64>,
    pub effective_hamiltonian: Option<EffectiveSummary>,
    pub lambda_gap_rad_s: Option<f64>,
    pub timing: Option<TimingSummary>,
    pub time_array: Option<bellsim_core::projection::TimeArray>,
    pub tomography: Option<TomographySummary>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Write `report.json` plus the four bar tables
    /// (before/after × multiplicative/Bell) under `dir`, prefixed by the
    /// scenario or `run`.
    pub fn write_files(&self, dir: &Path, before: &DensityMatrix, after: &DensityMatrix) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let prefix = self.scenario.clone().unwrap_or_else(|| "run".into());
        fs::write(dir.join(format!("{prefix}_report.json")), self.to_json())?;
        let bell = bell_transform();
        let tables = [
            ("before_mult", bar_export(before, None)),
            ("before_bell", bar_export(before, Some(&bell))),
            ("after_mult", bar_export(after, None)),
            ("after_bell", bar_export(after, Some(&bell))),
        ];
        for (name, table) in tables {
            let table = table.map_err(CliError::numerical("tomography"))?;
            fs::write(dir.join(format!("{prefix}_{name}.csv")), table.to_csv())?;
        }
        Ok(())
    }
}
