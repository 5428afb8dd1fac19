//! Derivative-free tuning of the eight-pulse cycle so the realized
//! effective Hamiltonian matches a target, plus the two-cycle timing
//! solver for the projection condition `t·(λ₁-λ₂) = π/2`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::average::{extract_effective, identity_quotient_distance, EffectiveHamiltonian};
use crate::error::{Error, Result};
use crate::hamiltonians::SpinSystem;
use crate::operator::Operator;
use crate::pulse::{eight_pulse_cycle, EightPulseCycleSpec};

/// Which scalar of the cycle spec a bound applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamPath {
    /// One of the nine inter-pulse delays.
    Delay(usize),
    PulseWidth,
}

/// A free parameter with its box bounds (seconds).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParamSpec {
    pub path: ParamPath,
    pub lower: f64,
    pub upper: f64,
}

/// What the search minimizes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    /// Identity-quotient Frobenius distance of h_eff to the target.
    HamiltonianDistance,
    /// `1 - min(overlap(Φ+), overlap(Φ-))` of the assigned eigenvectors.
    StateInfidelity,
    /// Convex mix of the two objectives.
    WeightedMix { hamiltonian: f64, state: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub base_spec: EightPulseCycleSpec,
    pub free_parameters: Vec<ParamSpec>,
    pub target: Operator,
    pub system: SpinSystem,
    pub objective: ObjectiveKind,
}

impl OptimizationProblem {
    pub fn validate(&self) -> Result<()> {
        self.base_spec.validate()?;
        self.system.validate()?;
        if self.free_parameters.is_empty() {
            return Err(Error::InvalidInput("need at least one free parameter".into()));
        }
        for p in &self.free_parameters {
            if !(p.lower.is_finite() && p.upper.is_finite()) || p.lower >= p.upper {
                return Err(Error::InvalidInput(format!(
                    "bad bounds [{}, {}] for {:?}",
                    p.lower, p.upper, p.path
                )));
            }
            if let ParamPath::Delay(k) = p.path {
                if k >= 9 {
                    return Err(Error::InvalidInput(format!("delay index {k} out of range")));
                }
            }
        }
        if let ObjectiveKind::WeightedMix { hamiltonian, state } = self.objective {
            if hamiltonian < 0.0 || state < 0.0 || hamiltonian + state <= 0.0 {
                return Err(Error::InvalidInput("mix weights must be nonnegative, not all zero".into()));
            }
        }
        Ok(())
    }

    fn apply(&self, x: &[f64]) -> EightPulseCycleSpec {
        let mut spec = self.base_spec.clone();
        for (p, &v) in self.free_parameters.iter().zip(x) {
            let v = v.clamp(p.lower, p.upper);
            match p.path {
                ParamPath::Delay(k) => spec.delays_s[k] = v,
                ParamPath::PulseWidth => spec.pulse_width_s = v,
            }
        }
        spec
    }

    fn initial_point(&self) -> Vec<f64> {
        self.free_parameters
            .iter()
            .map(|p| {
                let v = match p.path {
                    ParamPath::Delay(k) => self.base_spec.delays_s[k],
                    ParamPath::PulseWidth => self.base_spec.pulse_width_s,
                };
                v.clamp(p.lower, p.upper)
            })
            .collect()
    }
}

/// Result of an optimization run. The trace is the monotone best-so-far
/// objective, one entry per evaluation that improved it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_spec: EightPulseCycleSpec,
    pub objective_value: f64,
    /// (Φ+, Φ-) eigenvector overlaps of the optimized cycle.
    pub fidelities: (f64, f64),
    pub lambda_gap_rad_s: f64,
    pub trace: Vec<(u64, f64)>,
    pub seed: u64,
    pub evaluations: u64,
    /// Evaluations that hit a branch or assignment failure and were
    /// scored +∞.
    pub failed_evaluations: u64,
}

/// Score one cycle spec against the problem's target; branch or
/// assignment failures score +∞ so the search routes around them.
pub fn evaluate_objective(spec: &EightPulseCycleSpec, problem: &OptimizationProblem) -> f64 {
    match try_evaluate(spec, problem) {
        Ok(v) => v,
        Err(err) => {
            log::debug!("objective evaluation failed: {err}");
            f64::INFINITY
        }
    }
}

fn try_evaluate(spec: &EightPulseCycleSpec, problem: &OptimizationProblem) -> Result<f64> {
    let e = extract_effective(&eight_pulse_cycle(&spec.clone().with_repeat(1)), &problem.system)?;
    objective_of(&e, problem)
}

fn objective_of(e: &EffectiveHamiltonian, problem: &OptimizationProblem) -> Result<f64> {
    let ham = || identity_quotient_distance(&e.h_eff, &problem.target);
    let state = || -> Result<f64> {
        Ok(1.0 - e.bell_overlaps[0].min(e.bell_overlaps[1]))
    };
    match problem.objective {
        ObjectiveKind::HamiltonianDistance => ham(),
        ObjectiveKind::StateInfidelity => state(),
        ObjectiveKind::WeightedMix { hamiltonian, state: sw } => {
            let total = hamiltonian + sw;
            Ok((hamiltonian * ham()? + sw * state()?) / total)
        }
    }
}

/// Bounded Nelder-Mead with seeded multi-start restarts.
///
/// The first restart starts from the problem's base spec, later ones from
/// uniform draws inside the bounds; all evaluations clamp into the box.
/// Deterministic for fixed (problem, budget, seed), and the returned
/// trace never increases.
pub fn optimize(problem: &OptimizationProblem, budget: u64, seed: u64) -> Result<OptimizationResult> {
    problem.validate()?;
    if budget < 1 {
        return Err(Error::InvalidInput("budget must be at least 1".into()));
    }
    let n = problem.free_parameters.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut evals: u64 = 0;
    let mut failed: u64 = 0;
    let mut trace: Vec<(u64, f64)> = Vec::new();
    let mut best_x: Option<Vec<f64>> = None;
    let mut best_f = f64::INFINITY;

    let consider = |x: &[f64], f: f64, trace: &mut Vec<(u64, f64)>, best_x: &mut Option<Vec<f64>>, best_f: &mut f64, evals: u64| {
        if f < *best_f {
            *best_f = f;
            *best_x = Some(x.to_vec());
            trace.push((evals, f));
        }
    };

    'outer: loop {
        // restart start point
        let x0: Vec<f64> = if best_x.is_none() && evals == 0 {
            problem.initial_point()
        } else {
            problem
                .free_parameters
                .iter()
                .map(|p| p.lower + (p.upper - p.lower) * rng.gen::<f64>())
                .collect()
        };

        // initial simplex: x0 plus a step along each coordinate
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        {
            let f0 = evaluate_objective(&problem.apply(&x0), problem);
            evals += 1;
            if !f0.is_finite() {
                failed += 1;
            }
            consider(&x0, f0, &mut trace, &mut best_x, &mut best_f, evals);
            simplex.push((x0.clone(), f0));
            if evals >= budget {
                break 'outer;
            }
        }
        for i in 0..n {
            let p = &problem.free_parameters[i];
            let span = p.upper - p.lower;
            let mut xi = x0.clone();
            let step = 0.1 * span;
            xi[i] = if xi[i] + step <= p.upper { xi[i] + step } else { xi[i] - step };
            let fi = evaluate_objective(&problem.apply(&xi), problem);
            evals += 1;
            if !fi.is_finite() {
                failed += 1;
            }
            consider(&xi, fi, &mut trace, &mut best_x, &mut best_f, evals);
            simplex.push((xi, fi));
            if evals >= budget {
                break 'outer;
            }
        }

        // Nelder-Mead iterations with standard coefficients
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut stall = 0usize;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            if !spread.is_finite() || spread < 1e-14 {
                stall += 1;
            }
            if stall > 2 {
                break; // converged or stuck; restart
            }

            let centroid: Vec<f64> = (0..n)
                .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();

            let clamp = |x: Vec<f64>| -> Vec<f64> {
                x.iter()
                    .zip(&problem.free_parameters)
                    .map(|(&v, p)| v.clamp(p.lower, p.upper))
                    .collect()
            };

            let reflect: Vec<f64> = clamp(
                (0..n).map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i])).collect(),
            );
            let f_r = evaluate_objective(&problem.apply(&reflect), problem);
            evals += 1;
            if !f_r.is_finite() {
                failed += 1;
            }
            consider(&reflect, f_r, &mut trace, &mut best_x, &mut best_f, evals);
            if evals >= budget {
                break 'outer;
            }

            if f_r < simplex[0].1 {
                // try expansion
                let expand: Vec<f64> = clamp(
                    (0..n).map(|i| centroid[i] + gamma * (reflect[i] - centroid[i])).collect(),
                );
                let f_e = evaluate_objective(&problem.apply(&expand), problem);
                evals += 1;
                if !f_e.is_finite() {
                    failed += 1;
                }
                consider(&expand, f_e, &mut trace, &mut best_x, &mut best_f, evals);
                simplex[n] = if f_e < f_r { (expand, f_e) } else { (reflect, f_r) };
                if evals >= budget {
                    break 'outer;
                }
                continue;
            }
            if f_r < simplex[n - 1].1 {
                simplex[n] = (reflect, f_r);
                continue;
            }

            // contraction toward the better of worst/reflected
            let toward = if f_r < worst.1 { &reflect } else { &worst.0 };
            let contract: Vec<f64> =
                clamp((0..n).map(|i| centroid[i] + rho * (toward[i] - centroid[i])).collect());
            let f_c = evaluate_objective(&problem.apply(&contract), problem);
            evals += 1;
            if !f_c.is_finite() {
                failed += 1;
            }
            consider(&contract, f_c, &mut trace, &mut best_x, &mut best_f, evals);
            if evals >= budget {
                break 'outer;
            }
            if f_c < worst.1.min(f_r) {
                simplex[n] = (contract, f_c);
                continue;
            }

            // shrink toward the best vertex
            let best_vertex = simplex[0].0.clone();
            for k in 1..=n {
                let shrunk: Vec<f64> = clamp(
                    (0..n)
                        .map(|i| best_vertex[i] + sigma * (simplex[k].0[i] - best_vertex[i]))
                        .collect(),
                );
                let f_s = evaluate_objective(&problem.apply(&shrunk), problem);
                evals += 1;
                if !f_s.is_finite() {
                    failed += 1;
                }
                consider(&shrunk, f_s, &mut trace, &mut best_x, &mut best_f, evals);
                simplex[k] = (shrunk, f_s);
                if evals >= budget {
                    break 'outer;
                }
            }
        }
        if evals >= budget {
            break;
        }
    }

    let best_x = best_x.expect("at least one evaluation ran");
    let best_spec = problem.apply(&best_x);
    let (fidelities, lambda_gap) =
        match extract_effective(&eight_pulse_cycle(&best_spec.clone().with_repeat(1)), &problem.system) {
            Ok(e) => ((e.bell_overlaps[0], e.bell_overlaps[1]), e.lambda_gap()),
            Err(_) => ((f64::NAN, f64::NAN), f64::NAN),
        };

    Ok(OptimizationResult {
        best_spec,
        objective_value: best_f,
        fidelities,
        lambda_gap_rad_s: lambda_gap,
        trace,
        seed,
        evaluations: evals,
        failed_evaluations: failed,
    })
}

/// Timing returned by [`solve_two_cycle_timing`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TwoCycleTiming {
    pub repeat: u32,
    pub total_time_s: f64,
    /// Factor applied to the cycle delays so that `repeat` whole cycles
    /// fill the required evolution time exactly.
    pub delay_scale: f64,
}

/// Choose a repeat count and delay scaling so that an integer number of
/// cycles satisfies `total_time · |λ₁ - λ₂| = π/2`.
pub fn solve_two_cycle_timing(e: &EffectiveHamiltonian) -> Result<TwoCycleTiming> {
    let gap = e.lambda_gap();
    if gap < 1e-9 {
        return Err(Error::DegenerateEigenvalues(gap));
    }
    let total_time_s = (PI / 2.0) / gap;
    let repeat = (total_time_s / e.cycle_time_s).round().max(1.0) as u32;
    let delay_scale = total_time_s / (repeat as f64 * e.cycle_time_s);
    Ok(TwoCycleTiming { repeat, total_time_s, delay_scale })
}
