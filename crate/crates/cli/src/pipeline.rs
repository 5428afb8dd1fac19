//! The scenario pipeline: prepare → project → (optionally) reconstruct →
//! report, plus the optimizer and inspection entry points the
//! subcommands call.

use std::path::Path;

use bellsim_core::average::{extract_effective, EffectiveHamiltonian};
use bellsim_core::hamiltonians::{bell_state, bell_transform, BellState, SpinSystem};
use bellsim_core::operator::{dephase_in_basis, evolve, fidelity, trace_distance, DensityMatrix};
use bellsim_core::optimize::{
    optimize, solve_two_cycle_timing, OptimizationProblem, OptimizationResult, ParamPath,
    ParamSpec,
};
use bellsim_core::projection::{
    canonical_two_variant, compute_time_array, project_general, project_two_variant,
};
use bellsim_core::pulse::{
    bell_prep_sequence, eight_pulse_cycle, propagator_of, pseudopure_prep, EightPulseCycleSpec,
    PulseTarget,
};
use bellsim_core::tomography::{reconstruct, simulate_readout, ReadoutSet};

use crate::config::{
    CliError, ExperimentConfig, InitialState, OptimizeConfig, Preparation, ProjectionConfig,
};
use crate::report::{
    EffectiveSummary, RunReport, StatePair, TimingSummary, TomographySummary,
};

/// Built-in reproduction scenarios on the published-experiment parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Ground state |00⟩ in, Bell mixture out.
    Fig2,
    /// Bell state |Φ+⟩ in, preserved out.
    Fig3,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "fig2" => Ok(Scenario::Fig2),
            "fig3" => Ok(Scenario::Fig3),
            other => Err(CliError::Config(format!(
                "unknown scenario '{other}'; available: fig2, fig3"
            ))),
        }
    }

    fn label(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
        }
    }
}

struct Prepared {
    rho: DensityMatrix,
    preparation_fidelity: Option<f64>,
}

fn prepare_initial(config: &ExperimentConfig, sys: &SpinSystem, width_s: f64) -> Result<Prepared, CliError> {
    let ground = DensityMatrix::basis_state(4, 0).map_err(CliError::numerical("quantum-core"))?;
    let build_bell = |which: BellState| -> Result<Prepared, CliError> {
        let target = DensityMatrix::pure(&bell_state(which))
            .map_err(CliError::numerical("quantum-core"))?;
        match config.preparation {
            Preparation::Ideal => Ok(Prepared { rho: target, preparation_fidelity: None }),
            Preparation::Sequence => {
                let pp = pseudopure_prep(&ground);
                let seq = bell_prep_sequence(sys, which, PulseTarget::Spin2, width_s)
                    .map_err(CliError::numerical("pulse-engine"))?;
                let u = propagator_of(&seq, sys).map_err(CliError::numerical("pulse-engine"))?;
                let rho = evolve(&pp, &u).map_err(CliError::numerical("quantum-core"))?;
                let fid = fidelity(&rho, &target).map_err(CliError::numerical("quantum-core"))?;
                Ok(Prepared { rho, preparation_fidelity: Some(fid) })
            }
        }
    };
    match &config.initial_state {
        InitialState::Pseudopure00 => {
            let rho = match config.preparation {
                Preparation::Ideal => ground,
                Preparation::Sequence => pseudopure_prep(&ground),
            };
            Ok(Prepared { rho, preparation_fidelity: None })
        }
        InitialState::BellPhiPlus => build_bell(BellState::PhiPlus),
        InitialState::BellPhiMinus => build_bell(BellState::PhiMinus),
        InitialState::Custom(op) => {
            let rho = DensityMatrix::new(op.clone()).map_err(|e| {
                CliError::Config(format!("custom initial state is not a density matrix: {e}"))
            })?;
            Ok(Prepared { rho, preparation_fidelity: None })
        }
    }
}

/// Rescale the cycle until an integer number of repetitions meets the
/// π/2 condition of its own effective Hamiltonian. Rescaling changes the
/// effective Hamiltonian in turn, so iterate to a fixed point.
fn converge_timing(
    spec: &EightPulseCycleSpec,
    sys: &SpinSystem,
) -> Result<(EightPulseCycleSpec, EffectiveHamiltonian, TimingSummary), CliError> {
    let mut scaled = spec.clone().with_repeat(1);
    let mut cumulative_scale = 1.0;
    let mut repeat = 1u32;
    let mut total_time = 0.0;
    for _ in 0..6 {
        let e = extract_effective(&eight_pulse_cycle(&scaled), sys)
            .map_err(CliError::numerical("effective-hamiltonian"))?;
        let timing = solve_two_cycle_timing(&e).map_err(CliError::numerical("optimizer"))?;
        repeat = timing.repeat;
        total_time = timing.total_time_s;
        cumulative_scale *= timing.delay_scale;
        scaled = scaled.scale_delays(timing.delay_scale);
        if (timing.delay_scale - 1.0).abs() < 1e-9 {
            break;
        }
    }
    let e = extract_effective(&eight_pulse_cycle(&scaled), sys)
        .map_err(CliError::numerical("effective-hamiltonian"))?;
    let residual =
        (repeat as f64 * e.cycle_time_s * e.lambda_gap() - std::f64::consts::PI / 2.0).abs();
    let summary = TimingSummary {
        repeat,
        total_time_s: total_time,
        delay_scale: cumulative_scale,
        timing_residual_rad: residual,
    };
    Ok((scaled.with_repeat(repeat), e, summary))
}

/// Execute a full experiment described by `config`, returning the report
/// and the before/after states for table emission.
pub fn run_experiment(
    config: &ExperimentConfig,
    scenario: Option<Scenario>,
) -> Result<(RunReport, DensityMatrix, DensityMatrix), CliError> {
    config.validate()?;
    let sys = config.system.to_system()?;
    let base_spec = config.cycle.to_spec()?;

    let prepared = prepare_initial(config, &sys, base_spec.pulse_width_s)?;
    let before = prepared.rho;

    let bell = bell_transform();
    let oracle_out = dephase_in_basis(&before, &bell).map_err(CliError::numerical("quantum-core"))?;

    let mut effective = None;
    let mut timing = None;
    let mut time_array = None;
    let mut lambda_gap = None;

    let after = match &config.projection {
        ProjectionConfig::IdealOracle => oracle_out.clone(),
        ProjectionConfig::TwoVariant => {
            let (run_spec, e, t) = converge_timing(&base_spec, &sys)?;
            let scheme = canonical_two_variant(&eight_pulse_cycle(&run_spec));
            let out = project_two_variant(&before, &scheme, &sys)
                .map_err(CliError::numerical("bell-projection"))?;
            lambda_gap = Some(e.lambda_gap());
            effective = Some(EffectiveSummary {
                eigenvalues_rad_s: e.eigenvalues_rad_s,
                bell_overlaps: e.bell_overlaps,
                cycle_time_s: e.cycle_time_s,
                h_eff: e.h_eff.clone(),
            });
            timing = Some(t);
            out
        }
        ProjectionConfig::TimeArray { n_times, tol, budget, seed } => {
            let e = extract_effective(&eight_pulse_cycle(&base_spec.clone().with_repeat(1)), &sys)
                .map_err(CliError::numerical("effective-hamiltonian"))?;
            let ta = compute_time_array(&e.eigenvalues_rad_s, *n_times, *tol, *budget, *seed)
                .map_err(CliError::numerical("bell-projection"))?;
            let out = project_general(&before, &e.h_eff, &ta)
                .map_err(CliError::numerical("bell-projection"))?;
            lambda_gap = Some(e.lambda_gap());
            effective = Some(EffectiveSummary {
                eigenvalues_rad_s: e.eigenvalues_rad_s,
                bell_overlaps: e.bell_overlaps,
                cycle_time_s: e.cycle_time_s,
                h_eff: e.h_eff.clone(),
            });
            time_array = Some(ta);
            out
        }
    };

    let oracle_deviation =
        trace_distance(&after, &oracle_out).map_err(CliError::numerical("quantum-core"))?;

    let tomography = if config.tomography.enabled {
        let rs = ReadoutSet::default_set(&sys).map_err(CliError::numerical("tomography"))?;
        let rec = simulate_readout(&after, &rs, &sys, config.tomography.noise_sigma, config.tomography.seed)
            .map_err(CliError::numerical("tomography"))?;
        let est = reconstruct(&rec, &rs).map_err(CliError::numerical("tomography"))?;
        let fid = fidelity(&est, &after).map_err(CliError::numerical("quantum-core"))?;
        Some(TomographySummary {
            noise_sigma: config.tomography.noise_sigma,
            seed: config.tomography.seed,
            fidelity_reconstructed_vs_true: fid,
            reconstructed: est.operator().clone(),
        })
    } else {
        None
    };

    let bell_pops = |rho: &DensityMatrix| -> [f64; 4] {
        let mut pops = [0.0; 4];
        for (k, b) in BellState::ALL.iter().enumerate() {
            pops[k] = rho.overlap(&bell_state(*b));
        }
        pops
    };

    let report = RunReport {
        scenario: scenario.map(|s| s.label().to_string()),
        config: config.clone(),
        before: StatePair::of(&before)?,
        after: StatePair::of(&after)?,
        fidelity_after_vs_before: fidelity(&after, &before)
            .map_err(CliError::numerical("quantum-core"))?,
        bell_populations_before: bell_pops(&before),
        bell_populations_after: bell_pops(&after),
        oracle_deviation,
        oracle_bound: config.oracle_bound,
        within_oracle_bound: oracle_deviation <= config.oracle_bound,
        preparation_fidelity: prepared.preparation_fidelity,
        effective_hamiltonian: effective,
        lambda_gap_rad_s: lambda_gap,
        timing,
        time_array,
        tomography,
    };
    Ok((report, before, after))
}

/// Run a built-in scenario on the shipped `paper` config.
pub fn run_repro(scenario: Scenario) -> Result<(RunReport, DensityMatrix, DensityMatrix), CliError> {
    let mut config = ExperimentConfig::from_json(crate::config::PAPER_CONFIG_JSON)?;
    config.initial_state = match scenario {
        Scenario::Fig2 => InitialState::Pseudopure00,
        Scenario::Fig3 => InitialState::BellPhiPlus,
    };
    run_experiment(&config, Some(scenario))
}

/// Execute an optimizer config: build the problem, run the search, and
/// return the result together with its trace in CSV form.
pub fn run_optimize(config: &OptimizeConfig) -> Result<(OptimizationResult, String), CliError> {
    let sys = config.system.to_system()?;
    let base = config.cycle.to_spec()?.with_repeat(1);
    let slack = base.cycle_time() - 8.0 * base.pulse_width_s;
    let unit = slack / 24.0;
    let free: Vec<ParamSpec> = match &config.free {
        Some(paths) => paths
            .iter()
            .map(|p| ParamSpec {
                path: *p,
                lower: config.delay_lower_factor * unit,
                upper: config.delay_upper_factor * unit,
            })
            .collect(),
        None => (0..9)
            .map(|k| ParamSpec {
                path: ParamPath::Delay(k),
                lower: config.delay_lower_factor * unit,
                upper: config.delay_upper_factor * unit,
            })
            .collect(),
    };
    let wd = bellsim_core::hamiltonians::dipolar_omega(&sys);
    let problem = OptimizationProblem {
        base_spec: base,
        free_parameters: free,
        target: bellsim_core::hamiltonians::h_double_quantum().scale(-wd / 3.0),
        system: sys,
        objective: config.objective,
    };
    let result = optimize(&problem, config.budget, config.seed)
        .map_err(CliError::numerical("optimizer"))?;
    let mut trace_csv = String::from("iteration,objective\n");
    for (it, obj) in &result.trace {
        trace_csv.push_str(&format!("{it},{obj}\n"));
    }
    Ok((result, trace_csv))
}

/// Effective-Hamiltonian inspection of a config's cycle.
pub fn run_avg(config: &ExperimentConfig) -> Result<EffectiveSummary, CliError> {
    let sys = config.system.to_system()?;
    let spec = config.cycle.to_spec()?;
    let e = extract_effective(&eight_pulse_cycle(&spec.with_repeat(1)), &sys)
        .map_err(CliError::numerical("effective-hamiltonian"))?;
    Ok(EffectiveSummary {
        eigenvalues_rad_s: e.eigenvalues_rad_s,
        bell_overlaps: e.bell_overlaps,
        cycle_time_s: e.cycle_time_s,
        h_eff: e.h_eff,
    })
}

/// Tomography roundtrip demo: prepare the config's initial state
/// (ideally), push it through simulated readout and reconstruction, and
/// report the reconstruction fidelity.
pub fn run_tomo(config: &ExperimentConfig, seed_override: Option<u64>) -> Result<(f64, DensityMatrix, DensityMatrix), CliError> {
    let sys = config.system.to_system()?;
    let prepared = prepare_initial(config, &sys, 0.0)?;
    let rs = ReadoutSet::default_set(&sys).map_err(CliError::numerical("tomography"))?;
    let seed = seed_override.unwrap_or(config.tomography.seed);
    let rec = simulate_readout(&prepared.rho, &rs, &sys, config.tomography.noise_sigma, seed)
        .map_err(CliError::numerical("tomography"))?;
    let est = reconstruct(&rec, &rs).map_err(CliError::numerical("tomography"))?;
    let fid = fidelity(&est, &prepared.rho).map_err(CliError::numerical("quantum-core"))?;
    Ok((fid, prepared.rho, est))
}

/// Write the report and bar tables of a finished run.
pub fn write_outputs(
    report: &RunReport,
    before: &DensityMatrix,
    after: &DensityMatrix,
    out_dir: &Path,
) -> Result<(), CliError> {
    report.write_files(out_dir, before, after)
}
