//! Effective (average) Hamiltonian extraction from a pulse cycle, the
//! zeroth-order toggling-frame average as an independent oracle, and the
//! identity-quotient distance used to compare Hamiltonians.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonians::{
    bell_state, internal_hamiltonian, pauli_x, pauli_y, BellState, SpinSystem,
};
use crate::operator::{expm_hermitian, tensor_product, tol, unitary_log, Ket, Operator};
use crate::pulse::{propagator_of, PulseSequence, PulseTarget, SeqEvent};

/// The Hermitian generator realized by one pulse cycle, with eigenvalues
/// and eigenvectors labeled by the Bell state each eigenvector matches
/// best. Slot order is (Φ+, Φ-, Ψ+, Ψ-).
#[derive(Clone, Debug, Serialize)]
pub struct EffectiveHamiltonian {
    pub h_eff: Operator,
    pub cycle_time_s: f64,
    /// Eigenvalue assigned to each Bell slot, rad/s.
    pub eigenvalues_rad_s: [f64; 4],
    /// |⟨Bell_k | v_k⟩|² for the assigned eigenvectors.
    pub bell_overlaps: [f64; 4],
    #[serde(skip)]
    pub eigenvectors: [Ket; 4],
}

impl EffectiveHamiltonian {
    /// |λ(Φ+) − λ(Φ-)|, the gap the projection timing condition is built on.
    pub fn lambda_gap(&self) -> f64 {
        (self.eigenvalues_rad_s[0] - self.eigenvalues_rad_s[1]).abs()
    }

    pub fn distance_to(&self, target: &Operator) -> Result<f64> {
        identity_quotient_distance(&self.h_eff, target)
    }
}

/// Extract the effective Hamiltonian of a one-cycle sequence: the
/// principal-branch logarithm of the cycle propagator, eigendecomposed
/// and paired with the Bell states.
///
/// Eigenvectors inside a (near-)degenerate eigenvalue cluster are rotated
/// to align with the Bell vectors claiming that cluster, so degenerate
/// sectors (the Ψ pair of the pure double-quantum cycle) pair up stably.
/// When Bell states contest a slot with overlaps tied within
/// [`tol::ASSIGNMENT`], the pairing is reported as ambiguous rather than
/// silently chosen.
pub fn extract_effective(seq: &PulseSequence, sys: &SpinSystem) -> Result<EffectiveHamiltonian> {
    let cycle = seq.single_cycle();
    let cycle_time_s = cycle.cycle_duration();
    if cycle_time_s <= 0.0 {
        return Err(Error::InvalidInput("cycle has zero duration".into()));
    }
    let u = propagator_of(&cycle, sys)?;
    let h_eff = unitary_log(&u, cycle_time_s)?;
    let (evals, evecs) = h_eff.hermitian_eigen()?;

    // cluster near-degenerate eigenvalues
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| evals[i].total_cmp(&evals[j]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(cl) if (evals[k] - evals[cl[0]]).abs() < tol::DEGENERACY_RAD_S => cl.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    // affinity of each Bell state to each cluster: projection weight onto
    // the cluster's eigenspace
    let bells: Vec<Ket> = BellState::ALL.iter().map(|b| bell_state(*b)).collect();
    let affinity: Vec<Vec<f64>> = bells
        .iter()
        .map(|b| {
            clusters
                .iter()
                .map(|cl| {
                    cl.iter()
                        .map(|&k| (evecs.column(k).adjoint() * b)[(0, 0)].norm_sqr())
                        .sum()
                })
                .collect()
        })
        .collect();

    // greedy assignment of Bell states to cluster slots by descending
    // affinity, respecting cluster capacities; index order breaks ties
    let mut capacity: Vec<usize> = clusters.iter().map(Vec::len).collect();
    let mut assigned_cluster = [usize::MAX; 4];
    let mut pairs: Vec<(usize, usize)> = (0..4)
        .flat_map(|b| (0..clusters.len()).map(move |c| (b, c)))
        .collect();
    pairs.sort_by(|&(b1, c1), &(b2, c2)| {
        affinity[b2][c2]
            .total_cmp(&affinity[b1][c1])
            .then(b1.cmp(&b2))
            .then(c1.cmp(&c2))
    });
    for &(b, c) in &pairs {
        if assigned_cluster[b] != usize::MAX {
            continue;
        }
        if capacity[c] == 0 {
            // this Bell state wanted a full cluster; the choice is
            // ambiguous if its claim ties one that won the slot
            let winner_gap = (0..4)
                .filter(|&other| assigned_cluster[other] == c)
                .map(|other| (affinity[other][c] - affinity[b][c]).abs())
                .fold(f64::INFINITY, f64::min);
            if winner_gap < tol::ASSIGNMENT {
                return Err(Error::AssignmentAmbiguity(
                    BellState::ALL[b].label().to_string(),
                    tol::ASSIGNMENT,
                ));
            }
            continue;
        }
        assigned_cluster[b] = c;
        capacity[c] -= 1;
    }

    // within each cluster, re-pick eigenvectors as the orthonormalized
    // projections of its assigned Bell states; these are still
    // eigenvectors because the cluster shares one eigenvalue
    let mut eigenvalues = [0.0f64; 4];
    let mut overlaps = [0.0f64; 4];
    let mut vectors: [Ket; 4] = std::array::from_fn(|_| Ket::zeros(4));
    for (c, cl) in clusters.iter().enumerate() {
        let members: Vec<usize> = (0..4).filter(|&b| assigned_cluster[b] == c).collect();
        let lambda = cl.iter().map(|&k| evals[k]).sum::<f64>() / cl.len() as f64;
        let mut w = DMatrix::<C64>::zeros(4, cl.len());
        for (cix, &k) in cl.iter().enumerate() {
            w.set_column(cix, &evecs.column(k));
        }
        let projector = &w * w.adjoint();
        let mut chosen: Vec<Ket> = Vec::new();
        for &b in &members {
            let mut v = &projector * &bells[b];
            for prev in &chosen {
                let coeff = (prev.adjoint() * &v)[(0, 0)];
                v -= prev * coeff;
            }
            let n = v.norm();
            if n < 1e-9 {
                return Err(Error::AssignmentAmbiguity(
                    BellState::ALL[b].label().to_string(),
                    tol::ASSIGNMENT,
                ));
            }
            v /= C64::new(n, 0.0);
            eigenvalues[b] = lambda;
            overlaps[b] = (bells[b].adjoint() * &v)[(0, 0)].norm_sqr();
            vectors[b] = v.clone();
            chosen.push(v);
        }
    }

    Ok(EffectiveHamiltonian {
        h_eff,
        cycle_time_s,
        eigenvalues_rad_s: eigenvalues,
        bell_overlaps: overlaps,
        eigenvectors: vectors,
    })
}

/// Zeroth-order average Hamiltonian of a δ-pulse cycle: the time-weighted
/// mean of the internal Hamiltonian toggled through the accumulated rf
/// frame, segment by segment.
pub fn magnus_zeroth(seq: &PulseSequence, sys: &SpinSystem) -> Result<Operator> {
    let cycle = seq.single_cycle();
    cycle.validate()?;
    let h_int = internal_hamiltonian(sys);
    let mut q = Operator::identity(4); // rf propagator accumulated so far
    let mut weighted = Operator::zeros(4);
    let mut total_time = 0.0;
    for ev in &cycle.events {
        match ev {
            SeqEvent::Pulse(p) => {
                if p.duration_s != 0.0 {
                    return Err(Error::FinitePulse);
                }
                let single = pauli_x()
                    .scale(p.phase_rad.cos())
                    .add(&pauli_y().scale(p.phase_rad.sin()));
                let id = Operator::identity(2);
                let g = match p.target {
                    PulseTarget::Hard => {
                        tensor_product(&single, &id).add(&tensor_product(&id, &single))
                    }
                    PulseTarget::Spin1 => tensor_product(&single, &id),
                    PulseTarget::Spin2 => tensor_product(&id, &single),
                };
                q = expm_hermitian(&g.scale(0.5), p.flip_rad)?.mul(&q);
            }
            SeqEvent::Delay { duration_s } => {
                if *duration_s > 0.0 {
                    let toggled =
                        Operator::new(q.matrix().adjoint() * h_int.matrix() * q.matrix())?;
                    weighted = weighted.add(&toggled.scale(*duration_s));
                    total_time += duration_s;
                }
            }
        }
    }
    if total_time <= 0.0 {
        return Err(Error::InvalidInput("cycle has no free-evolution time".into()));
    }
    Ok(weighted.scale(1.0 / total_time))
}

/// Identity-quotient Frobenius distance
/// `min_s ‖a − b − s·I‖_F / ‖b‖_F`; the optimal shift has the closed form
/// `s = Tr(a − b)/dim`. Identity offsets are physically irrelevant global
/// phases, so every Hamiltonian comparison quotients them out.
pub fn identity_quotient_distance(a: &Operator, b: &Operator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    let norm_b = b.frobenius_norm();
    if norm_b == 0.0 {
        return Err(Error::ZeroTarget);
    }
    let diff = a.sub(b);
    let s = diff.trace() / C64::new(a.dim() as f64, 0.0);
    let shifted = diff.sub(&Operator::identity(a.dim()).scale_complex(s));
    Ok(shifted.frobenius_norm() / norm_b)
}
