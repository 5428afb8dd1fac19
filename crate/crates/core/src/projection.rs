//! Non-unitary projection onto the eigenstates of an engineered
//! Hamiltonian: the two-variant forward/time-reversed average that cancels
//! the Φ-sector coherence, and the general evolution-time-array scheme
//! that dephases a fully nondegenerate spectrum.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonians::SpinSystem;
use crate::operator::{expm_hermitian, DensityMatrix, Operator};
use crate::pulse::{phase_shift_all, propagator_of, PulseSequence};

/// Weighted set of unitary variants whose average implements the
/// projection channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionScheme {
    pub variants: Vec<(PulseSequence, f64)>,
    pub description: String,
}

impl ProjectionScheme {
    pub fn validate(&self) -> Result<()> {
        if self.variants.len() < 2 {
            return Err(Error::InvalidInput(
                "a projection scheme needs at least two variants".into(),
            ));
        }
        let total: f64 = self.variants.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, expected 1")));
        }
        if self.variants.iter().any(|(_, w)| *w <= 0.0) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        Ok(())
    }
}

/// The canonical scheme: the forward sequence and its π/2-phase-shifted
/// (time-reversed) copy, weighted ½/½ so "adding the results" keeps unit
/// trace.
pub fn canonical_two_variant(forward: &PulseSequence) -> ProjectionScheme {
    ProjectionScheme {
        variants: vec![
            (forward.clone(), 0.5),
            (phase_shift_all(forward, PI / 2.0), 0.5),
        ],
        description: "forward + pi/2-phase-shifted (time-reversed) evolution".into(),
    }
}

/// Evolution time satisfying `t · |λ₁ - λ₂| = π/2`, which puts a relative
/// phase π between the two coherence terms of the forward and reversed
/// evolutions.
pub fn solve_projection_time(lambda1: f64, lambda2: f64) -> Result<f64> {
    let gap = (lambda1 - lambda2).abs();
    if gap < 1e-9 {
        return Err(Error::DegenerateEigenvalues(gap));
    }
    Ok((PI / 2.0) / gap)
}

/// Apply the weighted variant average `Σ w_k U_k ρ U_k†`.
pub fn project_two_variant(
    rho: &DensityMatrix,
    scheme: &ProjectionScheme,
    sys: &SpinSystem,
) -> Result<DensityMatrix> {
    scheme.validate()?;
    let mut acc = Operator::zeros(rho.dim());
    for (seq, weight) in &scheme.variants {
        let u = propagator_of(seq, sys)?;
        let term = u.matrix() * rho.operator().matrix() * u.matrix().adjoint();
        acc = acc.add(&Operator::new(term)?.scale(*weight));
    }
    DensityMatrix::new(acc)
}

/// An array of evolution times `{t_k}` under a fixed Hamiltonian whose
/// equal-weight average suppresses every targeted coherence; `residual`
/// is the largest surviving fraction `max_{i≠j} |Σ_k e^{i Δλ_ij t_k}| / N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeArray {
    pub times_s: Vec<f64>,
    pub residual: f64,
}

/// Largest normalized coherence survival factor of `times` over all
/// spectrum gaps; the quantity [`compute_time_array`] minimizes.
pub fn time_array_residual(spectrum: &[f64; 4], times: &[f64]) -> f64 {
    let n = times.len() as f64;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let gap = spectrum[i] - spectrum[j];
            let (mut re, mut im) = (0.0, 0.0);
            for &t in times {
                let ph = gap * t;
                re += ph.cos();
                im += ph.sin();
            }
            worst = worst.max((re * re + im * im).sqrt() / n);
        }
    }
    worst
}

/// Search for an evolution-time array that cancels all pairwise
/// coherences of a fully nondegenerate spectrum to within `tol`.
///
/// Deterministic first: arithmetic grids `t_k = k·s` whose step `s` makes
/// each gap's geometric sum a full set of roots of unity are scanned in a
/// fixed order; failing that, seeded random coordinate refinement runs
/// until the budget is exhausted.
pub fn compute_time_array(
    spectrum: &[f64; 4],
    n_times: usize,
    tolerance: f64,
    budget: usize,
    seed: u64,
) -> Result<TimeArray> {
    if n_times < 2 {
        return Err(Error::InvalidInput("need at least two evolution times".into()));
    }
    let mut gaps = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let gap = (spectrum[i] - spectrum[j]).abs();
            if gap < 1e-6 {
                return Err(Error::DegenerateSpectrum(gap));
            }
            gaps.push(gap);
        }
    }

    // candidate arithmetic steps: for each gap, every step that turns the
    // gap's sum into a nontrivial N-th root-of-unity sum
    let mut candidates: Vec<f64> = Vec::new();
    for &gap in &gaps {
        for m in 1..n_times {
            candidates.push(2.0 * PI * m as f64 / (n_times as f64 * gap));
        }
        // harmonics of the base step also cancel individual gaps
        for mult in 2..=4usize {
            candidates.push(2.0 * PI / (n_times as f64 * gap) * mult as f64);
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let grid = |s: f64| -> Vec<f64> { (0..n_times).map(|k| k as f64 * s).collect() };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &s in &candidates {
        let times = grid(s);
        let r = time_array_residual(spectrum, &times);
        if best.as_ref().is_none_or(|(_, rb)| r < *rb) {
            best = Some((times, r));
        }
    }

    // product grid: subset sums of the half-periods {π/Δ} over the
    // distinct gaps. The coherence sum factorizes over the subsets, and
    // the factor belonging to each gap is 1 + e^{iπ} = 0, so every gap
    // cancels exactly whenever n_times can hold the 2^k subset sums.
    let mut distinct: Vec<f64> = Vec::new();
    for &g in &gaps {
        if !distinct.iter().any(|&d| (d - g).abs() < 1e-9) {
            distinct.push(g);
        }
    }
    let k = distinct.len();
    if k <= 20 && n_times.is_multiple_of(1usize << k) {
        let copies = n_times / (1usize << k);
        let mut times = Vec::with_capacity(n_times);
        for mask in 0usize..(1 << k) {
            let t: f64 = (0..k)
                .filter(|bit| mask & (1 << bit) != 0)
                .map(|bit| PI / distinct[bit])
                .sum();
            for _ in 0..copies {
                times.push(t);
            }
        }
        times.sort_by(f64::total_cmp);
        let r = time_array_residual(spectrum, &times);
        if best.as_ref().is_none_or(|(_, rb)| r < *rb) {
            best = Some((times, r));
        }
    }

    let (mut times, mut residual) = best.expect("candidate list is nonempty");
    if residual < tolerance {
        return Ok(TimeArray { times_s: times, residual });
    }

    // randomized coordinate refinement
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = times.last().copied().unwrap_or(1.0).max(1e-6);
    let mut step = 0.25 * scale / n_times as f64;
    for _ in 0..budget {
        let k = rng.gen_range(0..n_times);
        let delta = (rng.gen::<f64>() * 2.0 - 1.0) * step;
        let mut cand = times.clone();
        cand[k] = (cand[k] + delta).max(0.0);
        let r = time_array_residual(spectrum, &cand);
        if r < residual {
            times = cand;
            residual = r;
        } else {
            step *= 0.995;
        }
        if residual < tolerance {
            return Ok(TimeArray { times_s: times, residual });
        }
    }
    Err(Error::SearchFailed(residual, tolerance))
}

/// Equal-weight average of evolutions `exp(-i h t_k) ρ exp(+i h t_k)`.
/// Coherences in the eigenbasis of `h` survive at most to the fraction
/// recorded in the array's residual.
pub fn project_general(rho: &DensityMatrix, h: &Operator, ta: &TimeArray) -> Result<DensityMatrix> {
    if ta.times_s.is_empty() {
        return Err(Error::InvalidInput("time array is empty".into()));
    }
    let weight = 1.0 / ta.times_s.len() as f64;
    let mut acc = Operator::zeros(rho.dim());
    for &t in &ta.times_s {
        let u = expm_hermitian(h, t)?;
        let term = u.matrix() * rho.operator().matrix() * u.matrix().adjoint();
        acc = acc.add(&Operator::new(term)?.scale(weight));
    }
    DensityMatrix::new(acc)
}
