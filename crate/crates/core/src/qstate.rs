//! Two-qubit state algebra in Pauli/Bloch coordinates.
//!
//! The Pauli index convention is fixed once here and used everywhere:
//! (σ₁, σ₂, σ₃) = (X, Y, Z). A two-qubit density operator is carried in the
//! coordinate form ρ = ¼(I⊗I + a·σ⊗I + I⊗b·σ + Σᵢⱼ tᵢⱼ σᵢ⊗σⱼ), with the
//! dense 4×4 operator computed on demand.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Eigenvalue tolerance for positive-semidefiniteness of reconstructed
/// operators. Double-precision eigensolvers on 4×4 matrices are accurate to
/// ~1e-13, which leaves margin.
pub const PSD_TOL: f64 = 1e-10;

/// Slack permitted on Bloch-ball membership, |r| ≤ 1 + BLOCH_TOL.
pub const BLOCH_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator trace {0:.12} is not 1")]
    NotUnitTrace(f64),
    #[error("Bloch vector norm {0:.12} exceeds 1")]
    BlochNorm(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(cr(0.0), cr(1.0), cr(1.0), cr(0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(cr(1.0), cr(0.0), cr(0.0), cr(-1.0))
}

/// The Pauli triple in the fixed (X, Y, Z) order.
pub fn paulis() -> [Mat2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

/// n̂·σ for a real 3-vector.
pub fn dot_sigma(n: &Vector3<f64>) -> Mat2 {
    let [sx, sy, sz] = paulis();
    sx * cr(n[0]) + sy * cr(n[1]) + sz * cr(n[2])
}

/// Kronecker product restricted to the 2⊗2 → 4 case used throughout.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff2(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff4(a: &Mat4, b: &Mat4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermiticity defect ‖m − m†‖_max.
pub fn hermiticity_defect4(m: &Mat4) -> f64 {
    max_abs_diff4(m, &m.adjoint())
}

/// Unitarity defect ‖m†m − I‖_max.
pub fn unitarity_defect4(m: &Mat4) -> f64 {
    max_abs_diff4(&(m.adjoint() * m), &Mat4::identity())
}

pub fn unitarity_defect2(m: &Mat2) -> f64 {
    max_abs_diff2(&(m.adjoint() * m), &Mat2::identity())
}

/// Ascending eigenvalues of a Hermitian 4×4 operator.
pub fn hermitian_eigenvalues4(m: &Mat4) -> [f64; 4] {
    let eig = m.symmetric_eigen();
    let mut vals = [0.0; 4];
    for (slot, v) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
        *slot = *v;
    }
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn hermitian_eigenvalues2(m: &Mat2) -> [f64; 2] {
    let eig = m.symmetric_eigen();
    let mut vals = [eig.eigenvalues[0], eig.eigenvalues[1]];
    vals.sort_by(f64::total_cmp);
    vals
}

/// Which marginal a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Environment,
}

/// A single-qubit state as a Bloch vector with |r| ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    bloch: Vector3<f64>,
}

impl QubitState {
    pub fn new(bloch: Vector3<f64>) -> Result<Self, StateError> {
        let n = bloch.norm();
        if n > 1.0 + BLOCH_TOL {
            return Err(StateError::BlochNorm(n));
        }
        Ok(Self { bloch })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            bloch: Vector3::zeros(),
        }
    }

    pub fn bloch(&self) -> Vector3<f64> {
        self.bloch
    }

    /// ½(I + r·σ).
    pub fn density(&self) -> Mat2 {
        (Mat2::identity() + dot_sigma(&self.bloch)).scale(0.5)
    }

    pub fn from_density(rho: &Mat2) -> Result<Self, StateError> {
        let herm = max_abs_diff2(rho, &rho.adjoint());
        if herm > 1e-9 {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = (rho[(0, 0)] + rho[(1, 1)]).re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(StateError::NotUnitTrace(tr));
        }
        Self::new(bloch_of(rho))
    }
}

/// Bloch vector of a 2×2 Hermitian operator, rᵢ = Re Tr(ρσᵢ).
pub fn bloch_of(rho: &Mat2) -> Vector3<f64> {
    let p = paulis();
    Vector3::from_fn(|i, _| (rho * p[i]).trace().re)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct TwoQubitStateJson {
    a: [f64; 3],
    b: [f64; 3],
    #[serde(rename = "T")]
    t: [[f64; 3]; 3],
}

/// Two-qubit state in (a, b, T) coordinates: system Bloch vector `a`,
/// environment Bloch vector `b`, and the 3×3 correlation matrix `t` with
/// tᵢⱼ = Tr(ρ σᵢ⊗σⱼ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TwoQubitStateJson", into = "TwoQubitStateJson")]
pub struct TwoQubitState {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl From<TwoQubitStateJson> for TwoQubitState {
    fn from(j: TwoQubitStateJson) -> Self {
        Self {
            a: Vector3::from(j.a),
            b: Vector3::from(j.b),
            t: Matrix3::from_fn(|i, k| j.t[i][k]),
        }
    }
}

impl From<TwoQubitState> for TwoQubitStateJson {
    fn from(s: TwoQubitState) -> Self {
        Self {
            a: s.a.into(),
            b: s.b.into(),
            t: [
                [s.t[(0, 0)], s.t[(0, 1)], s.t[(0, 2)]],
                [s.t[(1, 0)], s.t[(1, 1)], s.t[(1, 2)]],
                [s.t[(2, 0)], s.t[(2, 1)], s.t[(2, 2)]],
            ],
        }
    }
}

/// Validity report for a reconstructed two-qubit operator.
#[derive(Debug, Clone, Copy)]
pub struct Validity {
    pub is_valid: bool,
    pub min_eigenvalue: f64,
}

impl TwoQubitState {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, t: Matrix3<f64>) -> Self {
        Self { a, b, t }
    }

    /// ρ^S ⊗ ζ^E in coordinates: T = a ζᵀ.
    pub fn product(system: &QubitState, env: &QubitState) -> Self {
        let a = system.bloch();
        let b = env.bloch();
        Self {
            a,
            b,
            t: a * b.transpose(),
        }
    }

    /// Dense 4×4 operator ¼(I⊗I + a·σ⊗I + I⊗b·σ + Σ tᵢⱼ σᵢ⊗σⱼ).
    pub fn reconstruct(&self) -> Mat4 {
        let p = paulis();
        let id = Mat2::identity();
        let mut rho = Mat4::identity();
        for i in 0..3 {
            rho += kron(&p[i], &id).scale(self.a[i]);
            rho += kron(&id, &p[i]).scale(self.b[i]);
            for j in 0..3 {
                rho += kron(&p[i], &p[j]).scale(self.t[(i, j)]);
            }
        }
        rho.scale(0.25)
    }

    /// PSD check of the reconstructed operator at tolerance [`PSD_TOL`],
    /// reporting the minimum eigenvalue.
    pub fn validity(&self) -> Validity {
        let bloch_ok = self.a.norm() <= 1.0 + BLOCH_TOL && self.b.norm() <= 1.0 + BLOCH_TOL;
        let min_eigenvalue = hermitian_eigenvalues4(&self.reconstruct())[0];
        Validity {
            is_valid: bloch_ok && min_eigenvalue >= -PSD_TOL,
            min_eigenvalue,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validity().is_valid
    }

    /// System marginal, exactly `a` by construction.
    pub fn system(&self) -> QubitState {
        QubitState { bloch: self.a }
    }

    /// Environment marginal, exactly `b` by construction.
    pub fn environment(&self) -> QubitState {
        QubitState { bloch: self.b }
    }
}

/// Pauli decomposition of a dense two-qubit state.
///
/// Fails on non-Hermitian or non-unit-trace input; positivity is checked
/// separately through [`TwoQubitState::validity`].
pub fn decompose(rho: &Mat4) -> Result<TwoQubitState, StateError> {
    let herm = hermiticity_defect4(rho);
    if herm > 1e-9 {
        return Err(StateError::NotHermitian(herm));
    }
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(StateError::NotUnitTrace(tr));
    }
    let p = paulis();
    let id = Mat2::identity();
    let a = Vector3::from_fn(|i, _| (rho * kron(&p[i], &id)).trace().re);
    let b = Vector3::from_fn(|j, _| (rho * kron(&id, &p[j])).trace().re);
    let t = Matrix3::from_fn(|i, j| (rho * kron(&p[i], &p[j])).trace().re);
    Ok(TwoQubitState { a, b, t })
}

/// Partial trace of a 4×4 operator over one qubit.
pub fn partial_trace(rho: &Mat4, keep: Subsystem) -> Mat2 {
    let mut out = Mat2::zeros();
    match keep {
        Subsystem::System => {
            for s in 0..2 {
                for sp in 0..2 {
                    out[(s, sp)] = rho[(2 * s, 2 * sp)] + rho[(2 * s + 1, 2 * sp + 1)];
                }
            }
        }
        Subsystem::Environment => {
            for e in 0..2 {
                for ep in 0..2 {
                    out[(e, ep)] = rho[(e, ep)] + rho[(2 + e, 2 + ep)];
                }
            }
        }
    }
    out
}

/// Qubit fidelity F = Tr(ρσ) + 2√(det ρ · det σ), clamped into [0, 1].
pub fn fidelity_qubit(rho: &Mat2, sigma: &Mat2) -> f64 {
    let tr = (rho * sigma).trace().re;
    let det_r = rho.determinant().re.max(0.0);
    let det_s = sigma.determinant().re.max(0.0);
    (tr + 2.0 * (det_r * det_s).sqrt()).clamp(0.0, 1.0)
}

/// |00⟩ basis index helpers are implicit: basis order is |00⟩,|01⟩,|10⟩,|11⟩
/// with the system as the first (leftmost) factor.
///
/// |Φ+⟩⟨Φ+| as a dense operator.
pub fn bell_phi_plus() -> Mat4 {
    let mut rho = Mat4::zeros();
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            rho[(i, j)] = cr(0.5);
        }
    }
    rho
}

/// Werner state W(λ) = λ|Ψ−⟩⟨Ψ−| + (1−λ)I/4 in coordinates:
/// a = b = 0, T = diag(−λ, −λ, −λ).
pub fn werner_state(lambda: f64) -> TwoQubitState {
    TwoQubitState::new(
        Vector3::zeros(),
        Vector3::zeros(),
        Matrix3::from_diagonal(&Vector3::new(-lambda, -lambda, -lambda)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    pub(crate) fn random_valid_state(rng: &mut impl Rng) -> TwoQubitState {
        decompose(&crate::testutil::random_density4(rng)).unwrap()
    }

    #[test]
    fn phi_plus_decomposes_to_diag_1_m1_1() {
        let s = decompose(&bell_phi_plus()).unwrap();
        assert_abs_diff_eq!(s.a.norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.b.norm(), 0.0, epsilon = 1e-14);
        let expect = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
        assert_abs_diff_eq!((s.t - expect).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn maximally_mixed_decomposes_to_zero() {
        let s = decompose(&Mat4::identity().scale(0.25)).unwrap();
        assert_abs_diff_eq!(s.a.norm() + s.b.norm() + s.t.norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn werner_decomposes_to_minus_lambda_diagonal() {
        for &lambda in &[0.0, 0.3, 1.0] {
            let s = decompose(&werner_state(lambda).reconstruct()).unwrap();
            let expect = Matrix3::from_diagonal(&Vector3::new(-lambda, -lambda, -lambda));
            assert_abs_diff_eq!((s.t - expect).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.a.norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn reconstruct_inverts_decompose_on_random_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let s = random_valid_state(&mut rng);
            let back = decompose(&s.reconstruct()).unwrap();
            assert_abs_diff_eq!((back.a - s.a).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((back.b - s.b).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((back.t - s.t).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bell_reconstructs_from_coordinates() {
        let s = TwoQubitState::new(
            Vector3::zeros(),
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0)),
        );
        assert!(max_abs_diff4(&s.reconstruct(), &bell_phi_plus()) < 1e-14);
    }

    #[test]
    fn partial_trace_marginals_match_bloch_vectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..200 {
            let s = random_valid_state(&mut rng);
            let rho = s.reconstruct();
            let sys = partial_trace(&rho, Subsystem::System);
            let env = partial_trace(&rho, Subsystem::Environment);
            assert_abs_diff_eq!((bloch_of(&sys) - s.a).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((bloch_of(&env) - s.b).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(sys.trace().re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let sys = partial_trace(&bell_phi_plus(), Subsystem::System);
        assert!(max_abs_diff2(&sys, &Mat2::identity().scale(0.5)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let rho = QubitState::new(Vector3::new(0.3, -0.1, 0.5)).unwrap();
        let zeta = QubitState::new(Vector3::new(-0.2, 0.4, 0.1)).unwrap();
        let joint = kron(&rho.density(), &zeta.density());
        assert!(max_abs_diff2(&partial_trace(&joint, Subsystem::System), &rho.density()) < 1e-14);
        assert!(
            max_abs_diff2(
                &partial_trace(&joint, Subsystem::Environment),
                &zeta.density()
            ) < 1e-14
        );
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..50 {
            let r = QubitState::new(Vector3::from_fn(|_, _| rng.random_range(-0.57..0.57)))
                .unwrap()
                .density();
            assert_abs_diff_eq!(fidelity_qubit(&r, &r), 1.0, epsilon = 1e-12);
        }
        let zero = Mat2::new(cr(1.0), cr(0.0), cr(0.0), cr(0.0));
        let one = Mat2::new(cr(0.0), cr(0.0), cr(0.0), cr(1.0));
        assert_abs_diff_eq!(fidelity_qubit(&zero, &one), 0.0, epsilon = 1e-14);
        let mixed = Mat2::identity().scale(0.5);
        assert_abs_diff_eq!(fidelity_qubit(&mixed, &zero), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_symmetry_and_identity_of_equals() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..200 {
            let r = QubitState::new(Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5)))
                .unwrap()
                .density();
            let s = QubitState::new(Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5)))
                .unwrap()
                .density();
            assert_abs_diff_eq!(
                fidelity_qubit(&r, &s),
                fidelity_qubit(&s, &r),
                epsilon = 1e-12
            );
            if max_abs_diff2(&r, &s) > 1e-3 {
                assert!(fidelity_qubit(&r, &s) < 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn validity_examples() {
        assert!(werner_state(1.0).is_valid());
        let bad = TwoQubitState::new(
            Vector3::zeros(),
            Vector3::zeros(),
            Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 1.0)),
        );
        let v = bad.validity();
        assert!(!v.is_valid);
        assert_abs_diff_eq!(v.min_eigenvalue, -0.5, epsilon = 1e-12);
        assert!(QubitState::new(Vector3::new(2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn json_round_trip_matches_interface() {
        let s = TwoQubitState::new(
            Vector3::new(0.1, 0.2, 0.3),
            Vector3::new(-0.1, 0.0, 0.25),
            Matrix3::from_fn(|i, j| 0.1 * (i as f64) - 0.2 * (j as f64)),
        );
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"a\":") && text.contains("\"b\":") && text.contains("\"T\":"));
        let back: TwoQubitState = serde_json::from_str(&text).unwrap();
        assert!((back.a - s.a).norm() < 1e-15);
        assert!((back.t - s.t).norm() < 1e-15);
    }
}
