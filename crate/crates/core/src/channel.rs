//! Quantum channels beyond unitaries: probabilistic-unitary mixtures, general
//! two-term Kraus channels, completeness checking, and Stinespring dilation
//! to a single-ancilla 4×4 unitary.
//!
//! Ancilla ordering is ancilla⊗system with the ancilla initialized to |0⟩,
//! so the Kraus operators of a dilation W are Kᵢ = ⟨i|_A W |0⟩_A, the first
//! block-column of W.

use crate::qstate::{c, cr, max_abs_diff2, Mat2, Mat4, TwoQubitState, C64};
use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("probability {0} outside [0, 1] or probabilities sum above 1")]
    BadProbabilities(f64),
    #[error("expected exactly {expected} Kraus operators, got {got}")]
    WrongOperatorCount { expected: usize, got: usize },
    #[error("channel is not trace preserving (completeness defect {0:.3e})")]
    NotTracePreserving(f64),
    #[error("orthonormal completion failed; residual column norm {0:.3e}")]
    CompletionFailed(f64),
}

type OpJson = [[f64; 2]; 4];

fn op_to_json(m: &Mat2) -> OpJson {
    let mut out = [[0.0; 2]; 4];
    for i in 0..2 {
        for j in 0..2 {
            out[2 * i + j] = [m[(i, j)].re, m[(i, j)].im];
        }
    }
    out
}

fn op_from_json(v: &OpJson) -> Mat2 {
    Mat2::from_fn(|i, j| c(v[2 * i + j][0], v[2 * i + j][1]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KrausChannelJson {
    kraus: Vec<OpJson>,
}

/// An ordered list of 2×2 Kraus operators with its completeness defect
/// ‖Σ K†K − I‖ (max-abs entry norm).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "KrausChannelJson", into = "KrausChannelJson")]
pub struct KrausChannel {
    operators: Vec<Mat2>,
    completeness_defect: f64,
}

impl From<KrausChannelJson> for KrausChannel {
    fn from(j: KrausChannelJson) -> Self {
        Self::new(j.kraus.iter().map(op_from_json).collect())
    }
}

impl From<KrausChannel> for KrausChannelJson {
    fn from(ch: KrausChannel) -> Self {
        Self {
            kraus: ch.operators.iter().map(op_to_json).collect(),
        }
    }
}

impl KrausChannel {
    pub fn new(operators: Vec<Mat2>) -> Self {
        let sum: Mat2 = operators
            .iter()
            .map(|k| k.adjoint() * k)
            .fold(Mat2::zeros(), |acc, m| acc + m);
        let completeness_defect = max_abs_diff2(&sum, &Mat2::identity());
        Self {
            operators,
            completeness_defect,
        }
    }

    pub fn unitary(v: &Mat2) -> Self {
        Self::new(vec![*v])
    }

    pub fn identity() -> Self {
        Self::unitary(&Mat2::identity())
    }

    pub fn operators(&self) -> &[Mat2] {
        &self.operators
    }

    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect <= 1e-10
    }

    /// E(ρ) = Σ K ρ K†.
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        self.operators
            .iter()
            .map(|k| k * rho * k.adjoint())
            .fold(Mat2::zeros(), |acc, m| acc + m)
    }

    /// Affine Bloch action of the channel: r ↦ J r + t with
    /// J_ij = Tr(σᵢ E(σⱼ/2)) and tᵢ = Tr(σᵢ E(I/2)).
    pub fn bloch_map(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let p = crate::qstate::paulis();
        let j = Matrix3::from_fn(|i, k| (self.apply(&p[k].scale(0.5)) * p[i]).trace().re);
        let t =
            Vector3::from_fn(|i, _| (self.apply(&Mat2::identity().scale(0.5)) * p[i]).trace().re);
        (j, t)
    }
}

/// Mixture (1 − Σpⱼ)ρ + Σ pⱼ Vⱼ ρ Vⱼ† as the Kraus set
/// {√(1−Σpⱼ)·I} ∪ {√pⱼ·Vⱼ}.
pub fn probabilistic_unitary_channel(
    ps: &[f64],
    vs: &[Mat2],
) -> Result<KrausChannel, ChannelError> {
    assert_eq!(ps.len(), vs.len(), "one probability per unitary");
    let mut total = 0.0;
    for &p in ps {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::BadProbabilities(p));
        }
        total += p;
    }
    if total > 1.0 + 1e-12 {
        return Err(ChannelError::BadProbabilities(total));
    }
    let mut operators = vec![Mat2::identity().scale((1.0 - total).max(0.0).sqrt())];
    for (&p, v) in ps.iter().zip(vs) {
        operators.push(v.scale(p.sqrt()));
    }
    Ok(KrausChannel::new(operators))
}

/// Apply a trace-preserving channel to the system side of a two-qubit state:
/// ρ^SE ↦ Σ (K⊗I) ρ^SE (K⊗I)†. In coordinates a′ = Ja + t, b′ = b,
/// T′ = JT + t bᵀ.
pub fn apply_channel_system_side(ch: &KrausChannel, state: &TwoQubitState) -> TwoQubitState {
    let (j, t) = ch.bloch_map();
    TwoQubitState::new(
        j * state.a + t,
        state.b,
        j * state.t + t * state.b.transpose(),
    )
}

type WJson = [[[f64; 2]; 4]; 4];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DilationJson {
    #[serde(rename = "W")]
    w: WJson,
}

/// Stinespring dilation of a two-term channel: a 4×4 unitary on
/// ancilla⊗system whose first block-column stacks (K₁; K₂).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "DilationJson", into = "DilationJson")]
pub struct Dilation {
    pub w: Mat4,
}

impl From<DilationJson> for Dilation {
    fn from(j: DilationJson) -> Self {
        Self {
            w: Mat4::from_fn(|r, cidx| c(j.w[r][cidx][0], j.w[r][cidx][1])),
        }
    }
}

impl From<Dilation> for DilationJson {
    fn from(d: Dilation) -> Self {
        let w = std::array::from_fn(|r| {
            std::array::from_fn(|cidx| [d.w[(r, cidx)].re, d.w[(r, cidx)].im])
        });
        Self { w }
    }
}

impl Dilation {
    /// Extract (K₁, K₂) = (⟨0|W|0⟩_A, ⟨1|W|0⟩_A).
    pub fn kraus(&self) -> (Mat2, Mat2) {
        let k1 = Mat2::from_fn(|s, sp| self.w[(s, sp)]);
        let k2 = Mat2::from_fn(|s, sp| self.w[(2 + s, sp)]);
        (k1, k2)
    }

    /// Tr_A[W (|0⟩⟨0| ⊗ ρ) W†].
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let (k1, k2) = self.kraus();
        k1 * rho * k1.adjoint() + k2 * rho * k2.adjoint()
    }

    pub fn unitarity_defect(&self) -> f64 {
        crate::qstate::unitarity_defect4(&self.w)
    }
}

/// Complete the isometry column (K₁; K₂) to a 4×4 unitary with modified
/// Gram–Schmidt, re-orthogonalizing whenever a candidate column norm falls
/// below 1e-8.
pub fn stinespring_dilate(ch: &KrausChannel) -> Result<Dilation, ChannelError> {
    if ch.operators().len() != 2 {
        return Err(ChannelError::WrongOperatorCount {
            expected: 2,
            got: ch.operators().len(),
        });
    }
    if !ch.is_trace_preserving() {
        return Err(ChannelError::NotTracePreserving(ch.completeness_defect()));
    }
    let k1 = ch.operators()[0];
    let k2 = ch.operators()[1];
    let mut cols: Vec<Vector4<C64>> = Vec::with_capacity(4);
    for sp in 0..2 {
        cols.push(Vector4::new(
            k1[(0, sp)],
            k1[(1, sp)],
            k2[(0, sp)],
            k2[(1, sp)],
        ));
    }
    let mut candidate_pool = (0..4).map(|i| {
        let mut v = Vector4::zeros();
        v[i] = cr(1.0);
        v
    });
    while cols.len() < 4 {
        let mut accepted = None;
        for cand in candidate_pool.by_ref() {
            let mut v = cand;
            for u in &cols {
                let proj = u.dotc(&v);
                v -= u.map(|z| z * proj);
            }
            let mut n = v.norm();
            if n < 1e-8 {
                // Re-orthogonalize before giving up on this candidate.
                for u in &cols {
                    let proj = u.dotc(&v);
                    v -= u.map(|z| z * proj);
                }
                n = v.norm();
                if n < 1e-8 {
                    continue;
                }
            }
            accepted = Some(v.map(|z| z / cr(n)));
            break;
        }
        match accepted {
            Some(v) => cols.push(v),
            None => return Err(ChannelError::CompletionFailed(0.0)),
        }
    }
    let w = Mat4::from_columns(&cols);
    Ok(Dilation { w })
}
