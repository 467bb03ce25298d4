//! Weak/strong measurement operators M±(ε, n̂), closed-form post-measurement
//! correlation transforms, measurement fidelity, and the repeated-measurement
//! impossibility analysis.
//!
//! M±(ε, n̂) = ½(ε₊ I ± ε₋ n̂·σ) with ε± = √((1+ε)/2) ± √((1−ε)/2), which
//! satisfies the completion relation M₊² + M₋² = I. ε = 0 is the identity
//! limit (M± = I/√2), ε = 1 the projective limit along n̂.

use crate::qstate::{dot_sigma, Mat2, TwoQubitState};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("measurement strength {0} outside [0, 1]")]
    Strength(f64),
    #[error("measurement axis has norm {0:.12}, expected a unit vector")]
    AxisNorm(f64),
    #[error("outcome probability {0:.3e} below 1e-14; post-state undefined")]
    DegenerateOutcome(f64),
}

/// Outcome label for the two-valued measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeSign {
    Plus,
    Minus,
}

impl OutcomeSign {
    /// +1 for the "+" outcome, −1 for the "−" outcome.
    pub fn sign(self) -> f64 {
        match self {
            OutcomeSign::Plus => 1.0,
            OutcomeSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct WeakMeasurementJson {
    epsilon: f64,
    axis: [f64; 3],
}

/// A two-outcome weak measurement of strength ε ∈ [0, 1] along unit axis n̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeakMeasurementJson", into = "WeakMeasurementJson")]
pub struct WeakMeasurement {
    epsilon: f64,
    axis: Vector3<f64>,
}

impl TryFrom<WeakMeasurementJson> for WeakMeasurement {
    type Error = MeasurementError;
    fn try_from(j: WeakMeasurementJson) -> Result<Self, Self::Error> {
        WeakMeasurement::new(j.epsilon, Vector3::from(j.axis))
    }
}

impl From<WeakMeasurement> for WeakMeasurementJson {
    fn from(m: WeakMeasurement) -> Self {
        Self {
            epsilon: m.epsilon,
            axis: m.axis.into(),
        }
    }
}

impl WeakMeasurement {
    pub fn new(epsilon: f64, axis: Vector3<f64>) -> Result<Self, MeasurementError> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(MeasurementError::Strength(epsilon));
        }
        let n = axis.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(MeasurementError::AxisNorm(n));
        }
        Ok(Self { epsilon, axis })
    }

    /// Convenience constructor that normalizes the axis.
    pub fn along(epsilon: f64, axis: Vector3<f64>) -> Result<Self, MeasurementError> {
        let n = axis.norm();
        if n < 1e-12 {
            return Err(MeasurementError::AxisNorm(n));
        }
        Self::new(epsilon, axis / n)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    /// (ε₊, ε₋) with ε± = √((1+ε)/2) ± √((1−ε)/2); ε₊² + ε₋² = 2.
    pub fn coefficients(&self) -> (f64, f64) {
        coefficients(self.epsilon)
    }

    /// The Hermitian pair (M₊, M₋).
    pub fn operators(&self) -> (Mat2, Mat2) {
        let (ep, em) = self.coefficients();
        let id = Mat2::identity();
        let ns = dot_sigma(&self.axis);
        let plus = (id.scale(ep) + ns.scale(em)).scale(0.5);
        let minus = (id.scale(ep) - ns.scale(em)).scale(0.5);
        (plus, minus)
    }

    pub fn operator(&self, sign: OutcomeSign) -> Mat2 {
        let (p, m) = self.operators();
        match sign {
            OutcomeSign::Plus => p,
            OutcomeSign::Minus => m,
        }
    }
}

fn coefficients(epsilon: f64) -> (f64, f64) {
    let u = ((1.0 + epsilon) / 2.0).sqrt();
    let v = ((1.0 - epsilon) / 2.0).sqrt();
    (u + v, u - v)
}

/// One retained outcome of a measurement applied to the system qubit.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementOutcome {
    pub sign: OutcomeSign,
    pub post_state: TwoQubitState,
    pub probability: f64,
}

/// Post-measurement state of (M_sign ⊗ I) ρ (M_sign ⊗ I) / p in closed form:
///
///   a′ = [√(1−ε²) a + (1−√(1−ε²)) (n̂n̂ᵀ)a + ε n̂] / (1 + ε n̂·a)
///   b′ = [b + ε Tᵀn̂] / (1 + ε n̂·a)
///   T′ = [√(1−ε²) T + (1−√(1−ε²)) (n̂n̂ᵀ)T + ε n̂bᵀ] / (1 + ε n̂·a)
///
/// with ε → −ε for the "−" outcome, and p = ½(1 + ε n̂·a).
pub fn apply_closed_form(
    state: &TwoQubitState,
    m: &WeakMeasurement,
    sign: OutcomeSign,
) -> Result<MeasurementOutcome, MeasurementError> {
    let eps = sign.sign() * m.epsilon;
    let n = m.axis;
    let den = 1.0 + eps * n.dot(&state.a);
    let probability = 0.5 * den;
    if probability < 1e-14 {
        return Err(MeasurementError::DegenerateOutcome(probability));
    }
    let q = (1.0 - eps * eps).max(0.0).sqrt();
    let nnt = n * n.transpose();
    let a = (state.a.scale(q) + nnt * state.a.scale(1.0 - q) + n.scale(eps)) / den;
    let b = (state.b + state.t.transpose() * n.scale(eps)) / den;
    let t = (state.t.scale(q) + nnt * state.t.scale(1.0 - q) + n.scale(eps) * state.b.transpose())
        / den;
    Ok(MeasurementOutcome {
        sign,
        post_state: TwoQubitState::new(a, b, t),
        probability,
    })
}

/// Fidelity between the system state with Bloch vector `a` and its
/// post-measurement state for the chosen outcome:
///
///   F = 1 − [1 − (a·n̂)²][1 − √(1−ε²)] / (2(1 ± ε a·n̂)).
pub fn measurement_fidelity(
    a: &Vector3<f64>,
    m: &WeakMeasurement,
    sign: OutcomeSign,
) -> Result<f64, MeasurementError> {
    let an = a.dot(&m.axis);
    let den = 2.0 * (1.0 + sign.sign() * m.epsilon * an);
    if den < 1e-14 {
        return Err(MeasurementError::DegenerateOutcome(den));
    }
    let q = (1.0 - m.epsilon * m.epsilon).max(0.0).sqrt();
    Ok(1.0 - (1.0 - an * an) * (1.0 - q) / den)
}

/// Coefficients (ε̃₊ᵏ, ε̃₋ᵏ) of the k-fold measurement power,
/// M±ᵏ = ½(ε̃₊ᵏ I ± ε̃₋ᵏ n̂·σ), with ε̃±ᵏ = ((1+ε)/2)^(k/2) ± ((1−ε)/2)^(k/2).
pub fn power_coefficients(epsilon: f64, k: u32) -> (f64, f64) {
    assert!(k >= 1, "power_coefficients requires k >= 1");
    let half = k as f64 / 2.0;
    let u = ((1.0 + epsilon) / 2.0).powf(half);
    let v = ((1.0 - epsilon) / 2.0).powf(half);
    (u + v, u - v)
}

/// M±ᵏ built from the closed-form power coefficients.
pub fn power_operators(m: &WeakMeasurement, k: u32) -> (Mat2, Mat2) {
    let (p, q) = power_coefficients(m.epsilon, k);
    let id = Mat2::identity();
    let ns = dot_sigma(&m.axis);
    (
        (id.scale(p) + ns.scale(q)).scale(0.5),
        (id.scale(p) - ns.scale(q)).scale(0.5),
    )
}

/// h(ε) = (1+ε)ᵏ + (1−ε)ᵏ. A single measurement matching both k-round
/// coefficients exactly requires h(ε) = 2ᵏ; h(0) = 2 and h(1) = 2ᵏ, and h is
/// strictly between those bounds for ε ∈ (0, 1).
pub fn power_pair_normalization(epsilon: f64, k: u32) -> f64 {
    (1.0 + epsilon).powi(k as i32) + (1.0 - epsilon).powi(k as i32)
}

/// Strength ε′ of a single measurement that reproduces the k-fold repeated
/// measurement M±ᵏ, when one exists.
///
/// The coefficient pair of M±ᵏ is a valid single-measurement pair only when
/// (ε̃₊ᵏ)² + (ε̃₋ᵏ)² = 2, equivalently h(ε) = 2ᵏ, which for k ≥ 2 holds only
/// at the projective endpoint; the identity endpoint ε = 0 is trivially
/// reproduced since every power of M±(0) is proportional to the identity.
pub fn single_shot_equivalent(epsilon: f64, k: u32) -> Option<f64> {
    assert!(k >= 2, "single_shot_equivalent is about repetition, k >= 2");
    if epsilon >= 1.0 - 1e-12 {
        return Some(1.0);
    }
    if epsilon <= 1e-12 {
        return Some(0.0);
    }
    debug_assert!(power_pair_normalization(epsilon, k) < (2.0f64).powi(k as i32));
    None
}
