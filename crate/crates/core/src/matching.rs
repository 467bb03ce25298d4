//! The dynamics-matching condition: solve for a valid environment Bloch
//! vector ζ with Tr_E(U ρ^SE U†) = Tr_E(U (ρ^S ⊗ ζ) U†), evaluate the three
//! residual conditions for nonlocal evolutions, and extract Kraus operators
//! when a solution exists.
//!
//! The left-hand side minus right-hand side, expanded in system Pauli
//! components, is affine in ζ; the solver returns the minimum-norm
//! least-squares solution of that 3×3 system. Because the minimum-norm point
//! of the solution subspace is returned, `FeasibleInvalid` certifies that no
//! valid ζ exists at all: the entire solution set misses the unit ball.

use crate::channel::KrausChannel;
use crate::qstate::{
    bloch_of, kron, partial_trace, Mat2, Mat4, QubitState, Subsystem, TwoQubitState,
};
use crate::unitary::NonlocalParams;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

/// Default residual tolerance separating consistent from inconsistent
/// matching systems.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack on |ζ| ≤ 1 when classifying feasibility: boundary solutions (for
/// instance after a projective measurement) land on the unit sphere exactly.
pub(crate) const ZETA_BALL_SLACK: f64 = 1e-10;

/// Singular values below this are treated as zero in the min-norm solve;
/// rank deficiency occurs exactly at the special angle families αᵢ ∈ {nπ/2}.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    /// Consistent system with a minimum-norm solution inside the Bloch ball.
    #[serde(rename = "valid")]
    FeasibleValid,
    /// Consistent system whose entire solution set lies outside the ball.
    #[serde(rename = "invalid")]
    FeasibleInvalid,
    /// No ζ reproduces the dynamics at all (residual above tolerance).
    #[serde(rename = "inconsistent")]
    Inconsistent,
}

/// Minimum-norm candidate environment Bloch vector with its residual and
/// feasibility classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSolution {
    #[serde(with = "vec3_serde")]
    pub zeta: Vector3<f64>,
    #[serde(rename = "residual")]
    pub residual_norm: f64,
    pub feasibility: Feasibility,
}

mod vec3_serde {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v[0], v[1], v[2]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let arr = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::from(arr))
    }
}

impl EnvSolution {
    pub fn is_feasible_valid(&self) -> bool {
        self.feasibility == Feasibility::FeasibleValid
    }

    /// The candidate environment state, when it is a valid qubit state.
    pub fn environment(&self) -> Option<QubitState> {
        QubitState::new(self.zeta).ok()
    }
}

/// Classify a minimum-norm solution of A ζ = c.
fn classify(zeta: Vector3<f64>, residual_norm: f64, tol: f64) -> EnvSolution {
    let feasibility = if residual_norm > tol {
        Feasibility::Inconsistent
    } else if zeta.norm() <= 1.0 + ZETA_BALL_SLACK {
        Feasibility::FeasibleValid
    } else {
        Feasibility::FeasibleInvalid
    };
    EnvSolution {
        zeta,
        residual_norm,
        feasibility,
    }
}

/// Min-norm least-squares solve of A ζ = c by SVD, with singular values
/// below [`RANK_TOL`] treated as zero.
pub(crate) fn min_norm_solve(a: &Matrix3<f64>, c: &Vector3<f64>) -> (Vector3<f64>, f64) {
    let svd = a.svd(true, true);
    let zeta = svd.solve(c, RANK_TOL).expect("3x3 SVD solve");
    let residual = (a * zeta - c).norm();
    (zeta, residual)
}

/// Build the matching linear system A ζ = c for an arbitrary global unitary
/// by expanding Tr_E(U (ρ^S ⊗ ζ) U†) − Tr_E(U ρ^SE U†) in Pauli components.
pub fn matching_system_dense(u: &Mat4, state: &TwoQubitState) -> (Matrix3<f64>, Vector3<f64>) {
    let rho_s = state.system().density();
    let paulis = crate::qstate::paulis();
    let actual = {
        let evolved = u * state.reconstruct() * u.adjoint();
        partial_trace(&evolved, Subsystem::System)
    };
    let base = {
        let evolved = u * kron(&rho_s, &Mat2::identity().scale(0.5)) * u.adjoint();
        partial_trace(&evolved, Subsystem::System)
    };
    // Trace components cancel for trace-preserving inputs.
    assert!(
        (actual.trace().re - 1.0).abs() < 1e-9 && (base.trace().re - 1.0).abs() < 1e-9,
        "internal consistency: trace component mismatch in the matching system"
    );
    let mut a = Matrix3::zeros();
    for (j, pauli) in paulis.iter().enumerate() {
        let evolved = u * kron(&rho_s, &pauli.scale(0.5)) * u.adjoint();
        let col = bloch_of(&partial_trace(&evolved, Subsystem::System));
        a.set_column(j, &col);
    }
    let c = bloch_of(&actual) - bloch_of(&base);
    (a, c)
}

/// Decide whether the experiment (U, ρ^SE) can be generated from the product
/// input ρ^S ⊗ ζ, returning the minimum-norm candidate ζ.
pub fn solve_env(u: &Mat4, state: &TwoQubitState, tol: f64) -> EnvSolution {
    let (a, c) = matching_system_dense(u, state);
    let (zeta, residual) = min_norm_solve(&a, &c);
    classify(zeta, residual, tol)
}

/// Left-hand sides of the three matching conditions for a nonlocal evolution
/// Ω(α) acting on a state with system Bloch a, environment Bloch b and
/// correlation matrix T, against a candidate ζ (sᵢ = sin 2αᵢ, cᵢ = cos 2αᵢ):
///
///   r₁ = (t₃₂ − a₃ζ₂)c₃s₂ + [(−t₂₃ + a₂ζ₃)c₂ + (b₁ − ζ₁)s₂]s₃
///   r₂ = (−t₃₁ + a₃ζ₁)c₃s₁ + [(t₁₃ − a₁ζ₃)c₁ + (b₂ − ζ₂)s₁]s₃
///   r₃ = (t₂₁ − a₂ζ₁)c₂s₁ + [(−t₁₂ + a₁ζ₂)c₁ + (b₃ − ζ₃)s₁]s₂
#[derive(Debug, Clone, Copy)]
pub struct MatchingResiduals {
    pub r: Vector3<f64>,
}

impl MatchingResiduals {
    pub fn norm(&self) -> f64 {
        self.r.norm()
    }
}

pub fn matching_residuals(
    p: &NonlocalParams,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    t: &Matrix3<f64>,
    zeta: &Vector3<f64>,
) -> MatchingResiduals {
    let ([s1, s2, s3], [c1, c2, c3]) = p.sin_cos_2a();
    let r1 = (t[(2, 1)] - a[2] * zeta[1]) * c3 * s2
        + ((-t[(1, 2)] + a[1] * zeta[2]) * c2 + (b[0] - zeta[0]) * s2) * s3;
    let r2 = (-t[(2, 0)] + a[2] * zeta[0]) * c3 * s1
        + ((t[(0, 2)] - a[0] * zeta[2]) * c1 + (b[1] - zeta[1]) * s1) * s3;
    let r3 = (t[(1, 0)] - a[1] * zeta[0]) * c2 * s1
        + ((-t[(0, 1)] + a[0] * zeta[1]) * c1 + (b[2] - zeta[2]) * s1) * s2;
    MatchingResiduals {
        r: Vector3::new(r1, r2, r3),
    }
}

/// The same three conditions in linear form M ζ = v, so that
/// r(ζ) = v − M ζ. This is the fast path for Ω evolutions; it agrees with
/// [`matching_system_dense`] on solution sets.
pub fn matching_system_nonlocal(
    p: &NonlocalParams,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    t: &Matrix3<f64>,
) -> (Matrix3<f64>, Vector3<f64>) {
    let ([s1, s2, s3], [c1, c2, c3]) = p.sin_cos_2a();
    let m = Matrix3::new(
        s2 * s3,
        a[2] * c3 * s2,
        -a[1] * c2 * s3,
        -a[2] * c3 * s1,
        s1 * s3,
        a[0] * c1 * s3,
        a[1] * c2 * s1,
        -a[0] * c1 * s2,
        s1 * s2,
    );
    let v = Vector3::new(
        t[(2, 1)] * c3 * s2 - t[(1, 2)] * c2 * s3 + b[0] * s2 * s3,
        -t[(2, 0)] * c3 * s1 + t[(0, 2)] * c1 * s3 + b[1] * s1 * s3,
        t[(1, 0)] * c2 * s1 - t[(0, 1)] * c1 * s2 + b[2] * s1 * s2,
    );
    (m, v)
}

/// Fast solve of the matching condition for U = Ω(α) via the closed-form
/// linear system.
pub fn solve_env_nonlocal(p: &NonlocalParams, state: &TwoQubitState, tol: f64) -> EnvSolution {
    let (m, v) = matching_system_nonlocal(p, &state.a, &state.b, &state.t);
    let (zeta, residual) = min_norm_solve(&m, &v);
    classify(zeta, residual, tol)
}

/// Kraus operators of the product-input experiment: with ζ = Σⱼ pⱼ|ζⱼ⟩⟨ζⱼ|,
/// K_jη = √pⱼ ⟨η|U|ζⱼ⟩ over the computational environment basis. The
/// resulting channel satisfies Σ K†K = I and reproduces
/// Tr_E(U (ρ^S ⊗ ζ) U†) on every system input.
pub fn kraus_from_env(u: &Mat4, zeta: &QubitState) -> KrausChannel {
    let eig = zeta.density().symmetric_eigen();
    // Deterministic order: descending eigenvalue.
    let order = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        [0, 1]
    } else {
        [1, 0]
    };
    let mut operators = Vec::with_capacity(4);
    for &j in &order {
        let p = eig.eigenvalues[j].max(0.0);
        let v = eig.eigenvectors.column(j);
        let w = p.sqrt();
        for eta in 0..2 {
            let k = Mat2::from_fn(|s, sp| {
                (u[(2 * s + eta, 2 * sp)] * v[0] + u[(2 * s + eta, 2 * sp + 1)] * v[1]) * w
            });
            operators.push(k);
        }
    }
    KrausChannel::new(operators)
}
