//! Simulation toolkit for projective measurement in the Bell basis of a
//! dipolar-coupled two-spin system.
//!
//! The crate models the full workflow: dense complex operators and states
//! ([`operator`]), the spin-pair Hamiltonians and the Bell-basis transform
//! ([`hamiltonians`]), pulse-sequence construction and propagation
//! ([`pulse`]), average/effective-Hamiltonian extraction ([`average`]),
//! the non-unitary projection onto Bell eigenstates by averaging forward
//! and time-reversed evolutions ([`projection`]), simulated readout with
//! linear-inversion state reconstruction ([`tomography`]), and
//! derivative-free tuning of pulse-cycle timings ([`optimize`]).
//!
//! Conventions used throughout:
//!
//! * propagators are `U = exp(-i H t)` with `H` in rad/s and `ħ = 1`;
//! * the product basis is ordered `|00>, |01>, |10>, |11>` with spin 1 the
//!   left (most significant) factor;
//! * the Bell basis is ordered `Φ+, Φ-, Ψ+, Ψ-`;
//! * frequencies given in Hz are converted to angular units once, at
//!   Hamiltonian construction.

pub mod average;
pub mod error;
pub mod hamiltonians;
pub mod operator;
pub mod optimize;
pub mod projection;
pub mod pulse;
pub mod tomography;

pub use error::{Error, Result};
pub use operator::{BasisTransform, DensityMatrix, Ket, Operator};
