//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use bellsim_core::operator::{DensityMatrix, Ket, Operator};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let g = random_complex_matrix(rng, dim);
    Operator::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

/// Hilbert-Schmidt random mixed state ρ = GG†/Tr.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let g = random_complex_matrix(rng, dim);
    let m = &g * g.adjoint();
    let tr: C64 = m.diagonal().iter().sum();
    DensityMatrix::new(Operator::new(m / tr).unwrap()).unwrap()
}

pub fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> Ket {
    let v = Ket::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Largest absolute eigenvalue, for scaling log-branch-safe times.
pub fn spectral_radius(h: &Operator) -> f64 {
    let (evals, _) = h.hermitian_eigen().unwrap();
    evals.iter().fold(0.0f64, |m, w| m.max(w.abs()))
}
