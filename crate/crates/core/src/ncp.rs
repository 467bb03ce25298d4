//! Prevention of non-completely-positive reduced dynamics: the correlated
//! family Λ_p(τ) = τ⊗I/2 + (1−p)(Φ+ − I/4), the time-dependent evolution
//! exp(−it·CNOT), the dynamical matrix A_S on row-major vectorized states,
//! the realigned B_S matrix whose spectrum certifies complete positivity,
//! the closed-form negative eigenvalue, and the R_Y(π/2) mitigation.
//!
//! Vectorization is row-major, vec(ρ) = (ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁); the
//! realignment index convention B_(ij),(kl) = A_(ik),(jl) is pinned by the
//! closed-form eigenvalue and frozen in the tests.

use crate::qstate::{c, cr, Mat2, Mat4, QubitState, TwoQubitState};
use nalgebra::{Matrix3, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NcpError {
    #[error("input Bloch norm {norm:.6} outside the compatibility domain |τ| ≤ p = {p}")]
    OutsideDomain { norm: f64, p: f64 },
    #[error("family state is not positive semidefinite (min eigenvalue {0:.3e})")]
    InvalidState(f64),
}

/// Λ_p(τ) in coordinates: a = τ⃗, b = 0, T = (1−p)·diag(1, −1, 1). The
/// compatibility domain is |τ⃗| ≤ p, and Tr_E[Λ_p(τ)] = τ exactly.
pub fn lambda_state(p: f64, tau: &QubitState) -> Result<TwoQubitState, NcpError> {
    let norm = tau.bloch().norm();
    if norm > p + 1e-12 {
        return Err(NcpError::OutsideDomain { norm, p });
    }
    let state = TwoQubitState::new(
        tau.bloch(),
        Vector3::zeros(),
        Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)).scale(1.0 - p),
    );
    let v = state.validity();
    if !v.is_valid {
        return Err(NcpError::InvalidState(v.min_eigenvalue));
    }
    Ok(state)
}

/// exp(−it·CNOT) = cos t·I − i sin t·CNOT, exact since CNOT² = I.
pub fn cnot_evolution(t: f64) -> Mat4 {
    Mat4::identity().scale(t.cos()) - crate::unitary::cnot().map(|z| z * c(0.0, t.sin()))
}

/// Conjugation of a two-qubit operator by exp(−it·CNOT).
pub fn evolve_time(t: f64, rho: &Mat4) -> Mat4 {
    let u = cnot_evolution(t);
    u * rho * u.adjoint()
}

/// A linear map on row-major vectorized qubit operators,
/// vec(ρ′) = A·vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    pub a: Mat4,
}

impl DynamicalMatrix {
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let v = Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
        let w = self.a * v;
        Mat2::new(w[0], w[1], w[2], w[3])
    }
}

/// Row-major vectorization of a 2×2 operator.
pub fn vec_row_major(rho: &Mat2) -> Vector4<crate::qstate::C64> {
    Vector4::new(rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)])
}

/// The dynamical matrix of the experiment {exp(−it·CNOT), Λ_p}, valid on the
/// whole compatibility domain:
///
///   A_S = [[1, 0, 0, 0],
///          [a, e^{−it}cos t, 0, a],
///          [a*, 0, e^{it}cos t, a*],
///          [0, 0, 0, 1]],   a = (1 − e^{−2it})(1 − p)/4.
pub fn dynamical_matrix(p: f64, t: f64) -> DynamicalMatrix {
    let a = (cr(1.0) - c(0.0, -2.0 * t).exp()) * cr((1.0 - p) / 4.0);
    let d = c(0.0, -t).exp() * cr(t.cos());
    let mut m = Mat4::zeros();
    m[(0, 0)] = cr(1.0);
    m[(3, 3)] = cr(1.0);
    m[(1, 0)] = a;
    m[(1, 3)] = a;
    m[(1, 1)] = d;
    m[(2, 0)] = a.conj();
    m[(2, 3)] = a.conj();
    m[(2, 2)] = d.conj();
    DynamicalMatrix { a: m }
}

/// Dynamical matrix after preparing the system with R_Y(π/2) before the
/// global evolution: the affine terms cancel and
/// A_S = diag(1, e^{−it}cos t, e^{it}cos t, 1).
pub fn mitigated_dynamical_matrix(_p: f64, t: f64) -> DynamicalMatrix {
    let d = c(0.0, -t).exp() * cr(t.cos());
    let mut m = Mat4::zeros();
    m[(0, 0)] = cr(1.0);
    m[(3, 3)] = cr(1.0);
    m[(1, 1)] = d;
    m[(2, 2)] = d.conj();
    DynamicalMatrix { a: m }
}

/// The mitigated family: (R_y(π/2) ⊗ I) Λ_p(τ) (R_y(π/2)† ⊗ I) expressed in
/// terms of the rotated input σ = R τ R†, so that its system marginal is σ.
pub fn mitigated_lambda_state(p: f64, sigma: &QubitState) -> Result<TwoQubitState, NcpError> {
    let norm = sigma.bloch().norm();
    if norm > p + 1e-12 {
        return Err(NcpError::OutsideDomain { norm, p });
    }
    let o = crate::unitary::su2_to_so3(&crate::unitary::rotation_y(std::f64::consts::FRAC_PI_2));
    Ok(TwoQubitState::new(
        sigma.bloch(),
        Vector3::zeros(),
        (o * Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))).scale(1.0 - p),
    ))
}

/// Realignment B_(ij),(kl) = A_(ik),(jl) with composite row 2i+j and column
/// 2k+l; for Hermiticity-preserving maps B is Hermitian.
pub fn realign(a: &DynamicalMatrix) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (col / 2, col % 2);
        a.a[(2 * i + k, 2 * j + l)]
    })
}

/// Ascending spectrum of the realigned matrix.
pub fn realigned_spectrum(a: &DynamicalMatrix) -> [f64; 4] {
    let b = realign(a);
    debug_assert!(crate::qstate::hermiticity_defect4(&b) < 1e-12);
    crate::qstate::hermitian_eigenvalues4(&b)
}

/// The closed-form negative eigenvalue of the realigned B_S for 0 < p < 1,
/// t ∈ (0, π/2]: sin(t/2)·(sin(t/2) − ½√(1 + 3 sin²(t/2))).
pub fn min_negative_eigenvalue_closed_form(t: f64) -> f64 {
    let s = (t / 2.0).sin();
    s * (s - 0.5 * (1.0 + 3.0 * s * s).sqrt())
}

/// Uniform-direction sample in the closed unit ball.
fn random_ball_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

/// Largest matching residual of a fixed candidate ζ over `samples` random
/// inputs τ of the p = 1 family at time t (the experiment is τ ⊗ I/2 for
/// every admissible τ).
pub fn all_inputs_max_residual(t: f64, zeta: &Vector3<f64>, samples: usize, seed: u64) -> f64 {
    let u = cnot_evolution(t);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let tau = random_ball_vector(&mut rng);
        let state = lambda_state(1.0, &QubitState::new(tau).expect("ball sample")).expect("domain");
        let (a, c) = crate::matching::matching_system_dense(&u, &state);
        worst = worst.max((a * zeta - c).norm());
    }
    worst
}

/// Verified description of the environment states that generate the p = 1
/// family for every admissible input: exactly the valid ζ with ζ_x = 0.
#[derive(Debug, Clone, Copy)]
pub struct AllInputsSolution {
    pub t: f64,
    pub samples: usize,
    /// Worst residual over sampled yz-plane candidates and inputs.
    pub max_residual_yz: f64,
    /// Residual of the x̂-directed control candidate (expected nonzero).
    pub control_residual_x: f64,
}

pub fn env_solution_all_inputs(t: f64, samples: usize, seed: u64) -> AllInputsSolution {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut max_residual_yz = all_inputs_max_residual(t, &Vector3::zeros(), samples, seed);
    for _ in 0..4 {
        let y: f64 = rng.random_range(-0.7..0.7);
        let z: f64 = rng.random_range(-0.7..0.7);
        let zeta = Vector3::new(0.0, y, z);
        max_residual_yz = max_residual_yz.max(all_inputs_max_residual(t, &zeta, samples, seed));
    }
    let control_residual_x =
        all_inputs_max_residual(t, &Vector3::new(0.5, 0.0, 0.0), samples, seed);
    AllInputsSolution {
        t,
        samples,
        max_residual_yz,
        control_residual_x,
    }
}
