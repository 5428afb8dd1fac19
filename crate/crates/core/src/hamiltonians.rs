//! Hamiltonians of the dipolar-coupled spin pair and the Bell-basis
//! transform.
//!
//! Everything is returned in angular-frequency units (rad/s) unless the
//! operator is a dimensionless Pauli combination; conversions from Hz
//! happen here and nowhere else.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{tensor_product, BasisTransform, Ket, Operator};

/// Single-spin Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn pauli_x() -> Operator {
    Operator::from_reals(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> Operator {
    Operator::from_rows(
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn pauli_z() -> Operator {
    Operator::from_reals(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

pub fn pauli(axis: Axis) -> Operator {
    match axis {
        Axis::X => pauli_x(),
        Axis::Y => pauli_y(),
        Axis::Z => pauli_z(),
    }
}

/// σ_axis acting on spin 1 (left factor) of a `dim`-dimensional register.
pub fn sigma1(dim: usize, axis: Axis) -> Operator {
    assert_eq!(dim, 4, "this artifact is specialized to two spins");
    tensor_product(&pauli(axis), &Operator::identity(2))
}

/// σ_axis acting on spin 2 (right factor).
pub fn sigma2(dim: usize, axis: Axis) -> Operator {
    assert_eq!(dim, 4, "this artifact is specialized to two spins");
    tensor_product(&Operator::identity(2), &pauli(axis))
}

/// σ_axis ⊗ σ_axis two-spin product.
pub fn sigma_pair(axis: Axis) -> Operator {
    tensor_product(&pauli(axis), &pauli(axis))
}

/// The four Bell states in the canonical order Φ+, Φ-, Ψ+, Ψ-.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn index(self) -> usize {
        match self {
            BellState::PhiPlus => 0,
            BellState::PhiMinus => 1,
            BellState::PsiPlus => 2,
            BellState::PsiMinus => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellState::PhiPlus => "Phi+",
            BellState::PhiMinus => "Phi-",
            BellState::PsiPlus => "Psi+",
            BellState::PsiMinus => "Psi-",
        }
    }
}

/// Bell state as a ket in the product basis |00⟩,|01⟩,|10⟩,|11⟩.
pub fn bell_state(which: BellState) -> Ket {
    let r = 0.5f64.sqrt();
    let amps: [f64; 4] = match which {
        BellState::PhiPlus => [r, 0.0, 0.0, r],
        BellState::PhiMinus => [r, 0.0, 0.0, -r],
        BellState::PsiPlus => [0.0, r, r, 0.0],
        BellState::PsiMinus => [0.0, r, -r, 0.0],
    };
    DVector::from_iterator(4, amps.iter().map(|&a| C64::new(a, 0.0)))
}

/// Unitary whose columns are the Bell states (Φ+, Φ-, Ψ+, Ψ-) in the
/// product basis; `change_basis` with this transform re-expresses
/// operators in the Bell basis.
pub fn bell_transform() -> BasisTransform {
    let r = 0.5f64.sqrt();
    let m = Operator::from_reals(
        4,
        &[
            r, r, 0.0, 0.0, //
            0.0, 0.0, r, r, //
            0.0, 0.0, r, -r, //
            r, -r, 0.0, 0.0,
        ],
    )
    .unwrap();
    BasisTransform::new(m, "multiplicative->Bell").unwrap()
}

/// Target eigenvalues (rad/s) for the Bell eigenstates, in the order
/// (Φ+, Φ-, Ψ+, Ψ-). Degeneracies are allowed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BellSpectrum {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BellSpectrum {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// The Hamiltonian with Bell eigenstates, built from its Pauli-operator
/// expansion:
///
/// ```text
/// H = ¼ [ (a+b+c+d) I + (a+b-c-d) σ1z σ2z
///       + (a-b+c-d) σ1x σ2x + (-a+b+c-d) σ1y σ2y ]
/// ```
///
/// Eigenpairs are exactly (a, Φ+), (b, Φ-), (c, Ψ+), (d, Ψ-).
pub fn bell_hamiltonian(s: &BellSpectrum) -> Operator {
    let BellSpectrum { a, b, c, d } = *s;
    let h = Operator::identity(4)
        .scale(0.25 * (a + b + c + d))
        .add(&sigma_pair(Axis::Z).scale(0.25 * (a + b - c - d)))
        .add(&sigma_pair(Axis::X).scale(0.25 * (a - b + c - d)))
        .add(&sigma_pair(Axis::Y).scale(0.25 * (-a + b + c - d)));
    debug_assert!(
        h.max_abs_diff(&bell_hamiltonian_sandwich(s)) < 1e-12,
        "Pauli expansion and sandwich construction disagree"
    );
    h
}

/// Independent construction of the same operator as `B diag(a,b,c,d) B†`
/// with `B` the Bell transform; used to cross-check [`bell_hamiltonian`].
pub fn bell_hamiltonian_sandwich(s: &BellSpectrum) -> Operator {
    let b = bell_transform();
    let bm = b.matrix().matrix();
    let diag = nalgebra::DMatrix::from_diagonal(&DVector::from_iterator(
        4,
        s.as_array().iter().map(|&w| C64::new(w, 0.0)),
    ));
    Operator::new(bm * diag * bm.adjoint()).unwrap()
}

/// Secular dipolar Hamiltonian `H_zz = σ1zσ2z - ½(σ1xσ2x + σ1yσ2y)`
/// (dimensionless; physical scaling is applied by [`internal_hamiltonian`]).
pub fn h_dipolar_zz() -> Operator {
    sigma_pair(Axis::Z).sub(&sigma_pair(Axis::X).add(&sigma_pair(Axis::Y)).scale(0.5))
}

/// Cyclic analogue `H_xx = σ1xσ2x - ½(σ1yσ2y + σ1zσ2z)`.
pub fn h_xx() -> Operator {
    sigma_pair(Axis::X).sub(&sigma_pair(Axis::Y).add(&sigma_pair(Axis::Z)).scale(0.5))
}

/// Cyclic analogue `H_yy = σ1yσ2y - ½(σ1zσ2z + σ1xσ2x)`.
pub fn h_yy() -> Operator {
    sigma_pair(Axis::Y).sub(&sigma_pair(Axis::Z).add(&sigma_pair(Axis::X)).scale(0.5))
}

/// Pure double-quantum Hamiltonian `H_xx - H_yy = (3/2)(σ1xσ2x - σ1yσ2y)`;
/// its only nonzero matrix elements connect |00⟩ and |11⟩.
pub fn h_double_quantum() -> Operator {
    h_xx().sub(&h_yy())
}

/// Chemical shifts and residual dipolar coupling of the spin pair.
/// Shifts are rotating-frame offsets in Hz; `splitting_hz` is the observed
/// doublet splitting each spin's line shows because of the coupling.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpinSystem {
    pub shift_1_hz: f64,
    pub shift_2_hz: f64,
    pub splitting_hz: f64,
}

impl SpinSystem {
    pub fn new(shift_1_hz: f64, shift_2_hz: f64, splitting_hz: f64) -> Result<Self> {
        let sys = Self { shift_1_hz, shift_2_hz, splitting_hz };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.splitting_hz <= 0.0 || !self.splitting_hz.is_finite() {
            return Err(Error::InvalidInput(format!(
                "splitting must be positive and finite, got {}",
                self.splitting_hz
            )));
        }
        if !self.shift_1_hz.is_finite() || !self.shift_2_hz.is_finite() {
            return Err(Error::InvalidInput("shifts must be finite".into()));
        }
        Ok(())
    }

    pub fn shift_difference_hz(&self) -> f64 {
        self.shift_1_hz - self.shift_2_hz
    }
}

/// Hz → rad/s. The only place the 2π lives.
pub fn hz_to_rad_s(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Dipolar prefactor ω_d (rad/s) calibrated so that free evolution under
/// [`internal_hamiltonian`] shows a doublet split by exactly
/// `splitting_hz`: the single-quantum transition frequencies out of any
/// eigenstate differ by `2 ω_d` rad/s independent of the shift difference,
/// so `ω_d = π · splitting / 2`.
pub fn dipolar_omega(sys: &SpinSystem) -> f64 {
    hz_to_rad_s(sys.splitting_hz) / 4.0
}

/// Free-evolution generator in the rotating frame (rad/s):
///
/// ```text
/// H_int = π ν₁ σ1z + π ν₂ σ2z + ω_d H_zz
/// ```
///
/// with ν in Hz (a shift ν corresponds to `2π ν · σz/2`).
pub fn internal_hamiltonian(sys: &SpinSystem) -> Operator {
    let wd = dipolar_omega(sys);
    sigma1(4, Axis::Z)
        .scale(PI * sys.shift_1_hz)
        .add(&sigma2(4, Axis::Z).scale(PI * sys.shift_2_hz))
        .add(&h_dipolar_zz().scale(wd))
}

/// The Bell Hamiltonian specialized to spectrum `(a, -a, c, 0)`, i.e. the
/// case with opposite Φ-sector eigenvalues and one Ψ eigenvalue pinned to
/// zero. Built from the Pauli expansion; see the crate tests for how this
/// operator relates to its commonly quoted `H_zz`/`H_dq` decomposition.
pub fn eq3_hamiltonian(a: f64, c: f64) -> Operator {
    bell_hamiltonian(&BellSpectrum::new(a, -a, c, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{change_basis, expm_hermitian, DensityMatrix};

    #[test]
    fn bell_transform_columns() {
        let b = bell_transform();
        let col0 = b.column(0);
        let r = 0.5f64.sqrt();
        assert!((col0[0].re - r).abs() < 1e-15);
        assert!((col0[3].re - r).abs() < 1e-15);
        assert!(col0[1].norm() < 1e-15 && col0[2].norm() < 1e-15);
        assert!(b.matrix().is_unitary(1e-12));
    }

    #[test]
    fn bell_transform_matches_block_form() {
        // B diag(a,b,c,d) B† must reproduce the ½(a+b ... a-b) block matrix.
        let s = BellSpectrum::new(1.0, 2.0, 3.0, 4.0);
        let h = bell_hamiltonian_sandwich(&s);
        let expect = Operator::from_reals(
            4,
            &[
                1.5, 0.0, 0.0, -0.5, //
                0.0, 3.5, -0.5, 0.0, //
                0.0, -0.5, 3.5, 0.0, //
                -0.5, 0.0, 0.0, 1.5,
            ],
        )
        .unwrap();
        assert!(h.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn bell_hamiltonian_simple_cases() {
        // a=1, b=-1, c=d=0 gives the antidiagonal double-quantum form.
        let h = bell_hamiltonian(&BellSpectrum::new(1.0, -1.0, 0.0, 0.0));
        let expect = Operator::from_reals(
            4,
            &[
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert!(h.max_abs_diff(&expect) < 1e-14);
        let half_dq = sigma_pair(Axis::X).sub(&sigma_pair(Axis::Y)).scale(0.5);
        assert!(h.max_abs_diff(&half_dq) < 1e-14);

        // fully degenerate spectrum is a multiple of the identity
        let h = bell_hamiltonian(&BellSpectrum::new(2.5, 2.5, 2.5, 2.5));
        assert!(h.max_abs_diff(&Operator::identity(4).scale(2.5)) < 1e-14);
    }

    #[test]
    fn bell_hamiltonian_eigenpairs() {
        let h = bell_hamiltonian(&BellSpectrum::new(1.0, 2.0, 3.0, 4.0));
        for (k, which) in BellState::ALL.iter().enumerate() {
            let v = bell_state(*which);
            let hv = h.apply(&v);
            let expected = (k + 1) as f64;
            let err = (&hv - &v * C64::new(expected, 0.0)).norm();
            assert!(err < 1e-12, "eigenpair {k} residual {err:.3e}");
        }
    }

    #[test]
    fn dipolar_operators() {
        assert!(h_dipolar_zz().trace().norm() < 1e-15);
        assert!((h_dipolar_zz().get(0, 0).re - 1.0).abs() < 1e-15, "⟨00|H_zz|00⟩ = 1");

        // the cyclic trio sums to zero exactly
        let sum = h_dipolar_zz().add(&h_xx()).add(&h_yy());
        assert!(sum.max_abs() < 1e-15);

        let dq = h_double_quantum();
        assert!((dq.get(0, 3).re - 3.0).abs() < 1e-15, "⟨00|H_dq|11⟩ = 3");
        assert!(dq.get(1, 2).norm() < 1e-15, "zero-quantum element vanishes");
        // only |00⟩↔|11⟩ elements are nonzero
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) != (0, 3) && (j, i) != (0, 3) {
                    assert!(dq.get(i, j).norm() < 1e-15, "H_dq[{i}][{j}] nonzero");
                }
            }
        }
        // eigenvectors: Φ+ at +3, Φ- at -3, Ψ± at 0
        for (which, expect) in [
            (BellState::PhiPlus, 3.0),
            (BellState::PhiMinus, -3.0),
            (BellState::PsiPlus, 0.0),
            (BellState::PsiMinus, 0.0),
        ] {
            let v = bell_state(which);
            let hv = dq.apply(&v);
            assert!((&hv - &v * C64::new(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn internal_hamiltonian_no_shifts_is_pure_dipolar() {
        let sys = SpinSystem::new(0.0, 0.0, 353.0).unwrap();
        let h = internal_hamiltonian(&sys);
        let wd = dipolar_omega(&sys);
        assert!(h.max_abs_diff(&h_dipolar_zz().scale(wd)) < 1e-12);
    }

    #[test]
    fn doublet_splitting_calibration() {
        // Independent oracle: compute the observable single-quantum lines of
        // the simulated spectrum from the eigendecomposition of H_int and
        // measure both doublet splittings.
        let sys = SpinSystem::new(1500.0, -1500.0, 353.0).unwrap();
        let h = internal_hamiltonian(&sys);
        let (evals, evecs) = h.hermitian_eigen().unwrap();

        let lower1 = sigma1(4, Axis::X)
            .sub(&sigma1(4, Axis::Y).scale_complex(C64::new(0.0, 1.0)))
            .scale(0.5);
        let lower2 = sigma2(4, Axis::X)
            .sub(&sigma2(4, Axis::Y).scale_complex(C64::new(0.0, 1.0)))
            .scale(0.5);
        let lowering = lower1.add(&lower2);
        let lm = evecs.adjoint() * lowering.matrix() * &evecs;

        let mut lines: Vec<f64> = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if lm[(i, j)].norm_sqr() > 1e-2 {
                    lines.push((evals[j] - evals[i]) / (2.0 * PI));
                }
            }
        }
        // four observable lines: a doublet per spin
        lines.sort_by(f64::total_cmp);
        let positive: Vec<f64> = lines.iter().cloned().filter(|f| *f > 0.0).collect();
        let negative: Vec<f64> = lines.iter().cloned().filter(|f| *f < 0.0).collect();
        assert_eq!(positive.len(), 2);
        assert_eq!(negative.len(), 2);
        let split_hi = positive[1] - positive[0];
        let split_lo = negative[1] - negative[0];
        assert!((split_hi - 353.0).abs() < 0.5, "splitting {split_hi:.4} Hz");
        assert!((split_lo - 353.0).abs() < 0.5, "splitting {split_lo:.4} Hz");
    }

    #[test]
    fn coupling_phase_over_phase_gate_delay() {
        // Under the pure coupling term for τ = 1/(2·splitting), |11⟩ gains
        // phase -1 relative to the odd-parity states once the common
        // double-quantum phase is referenced out: the conditional phase
        // e^{-2iω_d τ (z1z2 term)} splits even and odd parity by π/2 each way.
        let sys = SpinSystem::new(0.0, 0.0, 353.0).unwrap();
        let wd = dipolar_omega(&sys);
        let tau = 1.0 / (2.0 * sys.splitting_hz);
        // weak-coupling secular part of the coupling only
        let hc = sigma_pair(Axis::Z).scale(wd);
        let u = expm_hermitian(&hc, tau).unwrap();
        let p00 = u.get(0, 0);
        let p01 = u.get(1, 1);
        let p11 = u.get(3, 3);
        // |00⟩ and |11⟩ share a phase; relative phase between parity
        // sectors is exactly π/2 per side, i.e. (p01/p00)² = i² applied
        // twice gives the conditional -1 of the phase gate.
        assert!((p00 - p11).norm() < 1e-12);
        let rel = p01 / p00;
        assert!((rel - C64::new(0.0, 1.0)).norm() < 1e-12 || (rel - C64::new(0.0, -1.0)).norm() < 1e-12);
        // conditional phase on |11⟩ after factoring single-spin frames:
        // ⟨00|U|00⟩⟨11|U|11⟩ / (⟨01|U|01⟩⟨10|U|10⟩) = -1
        let cond = (p00 * p11) / (p01 * p01);
        assert!((cond - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eq3_form_and_eigenvalues() {
        // c = 0 collapses to the pure double-quantum antidiagonal form
        let h = eq3_hamiltonian(0.7, 0.0);
        let dq_half = sigma_pair(Axis::X).sub(&sigma_pair(Axis::Y)).scale(0.5 * 0.7);
        assert!(h.max_abs_diff(&dq_half) < 1e-14);

        let h = eq3_hamiltonian(1.3, 0.4);
        let (mut evals, _) = h.hermitian_eigen().unwrap();
        evals.sort_by(f64::total_cmp);
        let mut expect = [1.3, -1.3, 0.4, 0.0];
        expect.sort_by(f64::total_cmp);
        for (got, want) in evals.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_in_bell_basis() {
        let rho = DensityMatrix::basis_state(4, 0).unwrap();
        let in_bell = change_basis(rho.operator(), &bell_transform()).unwrap();
        let expect = Operator::from_reals(
            4,
            &[
                0.5, 0.5, 0.0, 0.0, //
                0.5, 0.5, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert!(in_bell.max_abs_diff(&expect) < 1e-14);
    }
}
