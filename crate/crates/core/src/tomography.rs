//! Simulated readout and density-matrix reconstruction: pre-measurement
//! rotations followed by expectation values of fixed observables, a
//! least-squares inversion of the induced linear map, and bar-table export
//! of matrices for plotting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonians::{sigma1, sigma2, Axis, SpinSystem};
use crate::operator::{change_basis, BasisTransform, DensityMatrix, Operator};
use crate::pulse::{propagator_of, PulseEvent, PulseSequence, PulseTarget, SeqEvent};

/// Hermitian ρ ↔ 16 real parameters: 4 diagonal entries, then
/// (re, im) of each upper-triangle entry in row-major order.
const N_PARAMS: usize = 16;

fn param_index_diag(i: usize) -> usize {
    i
}

fn param_index_offdiag(i: usize, j: usize) -> (usize, usize) {
    // offset of (i,j), i<j, within the 6 upper-triangle slots
    let slot = match (i, j) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("not an upper-triangle pair"),
    };
    (4 + 2 * slot, 4 + 2 * slot + 1)
}

/// Informationally complete measurement protocol: a list of
/// pre-measurement rotations and the observables read out after each.
///
/// Construction verifies that the induced linear map from states to
/// expectation values, together with the unit-trace constraint, has full
/// rank 16.
#[derive(Clone, Debug)]
pub struct ReadoutSet {
    rotations: Vec<PulseSequence>,
    observables: Vec<Operator>,
    /// (rotations × observables + trace row) × 16 real coefficient matrix.
    map: DMatrix<f64>,
    /// Effective observables U†OU cached per (rotation, observable) pair.
    effective: Vec<Operator>,
}

impl ReadoutSet {
    pub fn new(
        rotations: Vec<PulseSequence>,
        observables: Vec<Operator>,
        sys: &SpinSystem,
    ) -> Result<Self> {
        if rotations.is_empty() || observables.is_empty() {
            return Err(Error::InvalidInput("readout set must be nonempty".into()));
        }
        let mut effective = Vec::with_capacity(rotations.len() * observables.len());
        for rot in &rotations {
            let u = propagator_of(rot, sys)?;
            for obs in &observables {
                if obs.dim() != 4 {
                    return Err(Error::DimMismatch(obs.dim(), 4));
                }
                // Tr(O · UρU†) = Tr((U†OU) ρ)
                let eff = Operator::new(u.matrix().adjoint() * obs.matrix() * u.matrix())?;
                effective.push(eff);
            }
        }

        let n_rows = effective.len() + 1;
        let mut map = DMatrix::<f64>::zeros(n_rows, N_PARAMS);
        for (r, eff) in effective.iter().enumerate() {
            for i in 0..4 {
                map[(r, param_index_diag(i))] = eff.get(i, i).re;
            }
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let (re_ix, im_ix) = param_index_offdiag(i, j);
                    map[(r, re_ix)] = 2.0 * eff.get(i, j).re;
                    map[(r, im_ix)] = 2.0 * eff.get(i, j).im;
                }
            }
        }
        // unit-trace constraint row
        for i in 0..4 {
            map[(n_rows - 1, param_index_diag(i))] = 1.0;
        }

        let svd = map.clone().svd(false, false);
        let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > max_sv * 1e-10)
            .count();
        if rank < N_PARAMS {
            return Err(Error::RankDeficient(rank));
        }

        Ok(Self { rotations, observables, map, effective })
    }

    /// The standard protocol: per-spin rotations from {1, 90°x, 90°y} in
    /// all nine combinations, each followed by readout of σ1z, σ2z and
    /// σ1zσ2z — 27 values, overcomplete for the 16 state parameters.
    pub fn default_set(sys: &SpinSystem) -> Result<Self> {
        let mut rotations = Vec::with_capacity(9);
        let pulse = |target: PulseTarget, phase: f64| {
            SeqEvent::Pulse(PulseEvent {
                target,
                phase_rad: phase,
                flip_rad: PI / 2.0,
                duration_s: 0.0,
            })
        };
        // None = leave the spin alone; Some(phase) = 90° pulse at phase
        let options: [Option<f64>; 3] = [None, Some(0.0), Some(PI / 2.0)];
        for o1 in options {
            for o2 in options {
                let mut events = Vec::new();
                if let Some(phase) = o1 {
                    events.push(pulse(PulseTarget::Spin1, phase));
                }
                if let Some(phase) = o2 {
                    events.push(pulse(PulseTarget::Spin2, phase));
                }
                rotations.push(PulseSequence::new(events));
            }
        }
        let observables = vec![
            sigma1(4, Axis::Z),
            sigma2(4, Axis::Z),
            sigma1(4, Axis::Z).mul(&sigma2(4, Axis::Z)),
        ];
        Self::new(rotations, observables, sys)
    }

    pub fn len(&self) -> usize {
        self.effective.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effective.is_empty()
    }

    pub fn rotations(&self) -> &[PulseSequence] {
        &self.rotations
    }

    pub fn observables(&self) -> &[Operator] {
        &self.observables
    }
}

/// Expectation values from one simulated readout pass, with the noise
/// level used to generate them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub values: Vec<f64>,
    pub noise_sigma: f64,
}

/// Simulate the readout of `rho`: each value is
/// `Tr(O_k U_k ρ U_k†) + ξ_k` with i.i.d. Gaussian noise of width
/// `noise_sigma`, deterministic for a fixed seed.
pub fn simulate_readout(
    rho: &DensityMatrix,
    rs: &ReadoutSet,
    _sys: &SpinSystem,
    noise_sigma: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if noise_sigma < 0.0 || !noise_sigma.is_finite() {
        return Err(Error::InvalidInput(format!("bad noise width {noise_sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let values = rs
        .effective
        .iter()
        .map(|eff| {
            let clean = rho.expectation(eff);
            if noise_sigma > 0.0 {
                clean + normal.sample(&mut rng)
            } else {
                clean
            }
        })
        .collect();
    Ok(MeasurementRecord { values, noise_sigma })
}

/// Least-squares inversion of the measurement map followed by projection
/// to a physical state: eigenvalues clipped to ≥ 0 and the trace
/// renormalized to one.
pub fn reconstruct(rec: &MeasurementRecord, rs: &ReadoutSet) -> Result<DensityMatrix> {
    project_to_state(&reconstruct_raw(rec, rs)?)
}

/// The unprojected least-squares Hermitian estimate; may have small
/// negative eigenvalues under noise.
pub fn reconstruct_raw(rec: &MeasurementRecord, rs: &ReadoutSet) -> Result<Operator> {
    if rec.values.len() != rs.len() {
        return Err(Error::InvalidInput(format!(
            "record carries {} values for a readout set of {}",
            rec.values.len(),
            rs.len()
        )));
    }
    let mut b = DVector::<f64>::zeros(rs.len() + 1);
    for (k, v) in rec.values.iter().enumerate() {
        b[k] = *v;
    }
    b[rs.len()] = 1.0; // trace row

    let svd = rs.map.clone().svd(true, true);
    let params = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;

    let mut m = DMatrix::<C64>::zeros(4, 4);
    for i in 0..4 {
        m[(i, i)] = C64::new(params[param_index_diag(i)], 0.0);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (re_ix, im_ix) = param_index_offdiag(i, j);
            m[(i, j)] = C64::new(params[re_ix], params[im_ix]);
            m[(j, i)] = C64::new(params[re_ix], -params[im_ix]);
        }
    }
    Operator::new(m)
}

/// Clip negative eigenvalues to zero and renormalize the trace.
pub fn project_to_state(estimate: &Operator) -> Result<DensityMatrix> {
    let (evals, vecs) = estimate.hermitian_eigen()?;
    let clipped: Vec<f64> = evals.iter().map(|&w| w.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        // all mass clipped away: fall back to the maximally mixed state
        return Ok(DensityMatrix::maximally_mixed(estimate.dim()));
    }
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        clipped.len(),
        clipped.iter().map(|&w| C64::new(w / total, 0.0)),
    ));
    DensityMatrix::new(Operator::new(&vecs * d * vecs.adjoint())?)
}

/// One matrix entry prepared for bar-chart rendering.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarRow {
    pub row: String,
    pub col: String,
    pub re: f64,
    pub im: f64,
}

/// All 16 entries of a state in a chosen basis, with text labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarTable {
    pub basis: String,
    pub rows: Vec<BarRow>,
}

impl BarTable {
    /// Comma-separated export with header `basis,row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("basis,row,col,re,im\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", self.basis, r.row, r.col, r.re, r.im));
        }
        out
    }

    /// Reassemble the matrix the table was exported from.
    pub fn reassemble(&self) -> Result<Operator> {
        if self.rows.len() != 16 {
            return Err(Error::InvalidInput(format!("expected 16 rows, got {}", self.rows.len())));
        }
        let mut m = DMatrix::<C64>::zeros(4, 4);
        for (k, r) in self.rows.iter().enumerate() {
            m[(k / 4, k % 4)] = C64::new(r.re, r.im);
        }
        Operator::new(m)
    }
}

const MULT_LABELS: [&str; 4] = ["00", "01", "10", "11"];
const BELL_LABELS: [&str; 4] = ["Phi+", "Phi-", "Psi+", "Psi-"];

/// Export all 16 entries of `rho`, either in the multiplicative basis
/// (`basis = None`) or re-expressed through the given transform.
pub fn bar_export(rho: &DensityMatrix, basis: Option<&BasisTransform>) -> Result<BarTable> {
    let (m, name, labels) = match basis {
        None => (rho.operator().clone(), "multiplicative".to_string(), MULT_LABELS),
        Some(b) => {
            let is_bell = b.label().contains("Bell");
            (
                change_basis(rho.operator(), b)?,
                if is_bell { "bell".to_string() } else { b.label().to_string() },
                if is_bell { BELL_LABELS } else { MULT_LABELS },
            )
        }
    };
    let mut rows = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let z = m.get(i, j);
            rows.push(BarRow {
                row: labels[i].to_string(),
                col: labels[j].to_string(),
                re: z.re,
                im: z.im,
            });
        }
    }
    Ok(BarTable { basis: name, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{bell_state, bell_transform, BellState};
    use crate::operator::fidelity;

    fn sys() -> SpinSystem {
        SpinSystem::new(1500.0, -1500.0, 353.0).unwrap()
    }

    #[test]
    fn default_set_is_complete() {
        let rs = ReadoutSet::default_set(&sys()).unwrap();
        assert_eq!(rs.len(), 27);
    }

    #[test]
    fn incomplete_set_is_rejected() {
        // z-observables with no rotations only see populations
        let rs = ReadoutSet::new(
            vec![PulseSequence::new(vec![])],
            vec![sigma1(4, Axis::Z), sigma2(4, Axis::Z)],
            &sys(),
        );
        assert!(matches!(rs, Err(Error::RankDeficient(_))));
    }

    #[test]
    fn noiseless_values_on_simple_states() {
        let rs = ReadoutSet::default_set(&sys()).unwrap();

        // maximally mixed state: every traceless observable reads zero
        let mm = DensityMatrix::maximally_mixed(4);
        let rec = simulate_readout(&mm, &rs, &sys(), 0.0, 0).unwrap();
        assert!(rec.values.iter().all(|v| v.abs() < 1e-12));

        // |00⟩ with the identity rotation: σ1z reads 1
        let rho = DensityMatrix::basis_state(4, 0).unwrap();
        let rec = simulate_readout(&rho, &rs, &sys(), 0.0, 0).unwrap();
        assert!((rec.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let rs = ReadoutSet::default_set(&sys()).unwrap();
        let rho = DensityMatrix::pure(&bell_state(BellState::PhiPlus)).unwrap();
        let a = simulate_readout(&rho, &rs, &sys(), 0.01, 42).unwrap();
        let b = simulate_readout(&rho, &rs, &sys(), 0.01, 42).unwrap();
        assert_eq!(a.values, b.values);
        let c = simulate_readout(&rho, &rs, &sys(), 0.01, 43).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noiseless_roundtrip_is_exact() {
        let rs = ReadoutSet::default_set(&sys()).unwrap();
        let rho = DensityMatrix::pure(&bell_state(BellState::PhiMinus)).unwrap();
        let rec = simulate_readout(&rho, &rs, &sys(), 0.0, 0).unwrap();
        let est = reconstruct(&rec, &rs).unwrap();
        let f = fidelity(&est, &rho).unwrap();
        assert!(f > 0.9999, "roundtrip fidelity {f}");
    }

    #[test]
    fn all_zero_record_reconstructs_maximally_mixed() {
        let rs = ReadoutSet::default_set(&sys()).unwrap();
        let rec = MeasurementRecord { values: vec![0.0; rs.len()], noise_sigma: 0.0 };
        let est = reconstruct(&rec, &rs).unwrap();
        let mm = DensityMatrix::maximally_mixed(4);
        assert!(est.operator().max_abs_diff(mm.operator()) < 1e-10);
    }

    #[test]
    fn bar_export_shapes() {
        let rho = DensityMatrix::basis_state(4, 0).unwrap();

        let table = bar_export(&rho, None).unwrap();
        assert_eq!(table.rows.len(), 16);
        let nonzero: Vec<&BarRow> = table
            .rows
            .iter()
            .filter(|r| r.re.abs() > 1e-12 || r.im.abs() > 1e-12)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].row, "00");
        assert_eq!(nonzero[0].col, "00");
        assert!((nonzero[0].re - 1.0).abs() < 1e-12);

        // in the Bell basis the ground state fills the Φ block with 0.5
        let table = bar_export(&rho, Some(&bell_transform())).unwrap();
        assert_eq!(table.basis, "bell");
        let halves: Vec<&BarRow> =
            table.rows.iter().filter(|r| (r.re - 0.5).abs() < 1e-12).collect();
        assert_eq!(halves.len(), 4);
        for r in halves {
            assert!(r.row.starts_with("Phi") && r.col.starts_with("Phi"));
        }
    }

    #[test]
    fn bar_table_reassembles_exactly() {
        let rho = DensityMatrix::pure(&bell_state(BellState::PsiMinus)).unwrap();
        let table = bar_export(&rho, None).unwrap();
        let back = table.reassemble().unwrap();
        assert!(back.max_abs_diff(rho.operator()) < 1e-15);
        assert!(table.to_csv().starts_with("basis,row,col,re,im\n"));
    }
}
