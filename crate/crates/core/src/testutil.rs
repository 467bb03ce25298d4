//! Shared random generators for unit tests: Ginibre-sampled density
//! operators and Haar-ish random unitaries.

use crate::qstate::{c, Mat2, Mat4, C64};
use nalgebra::Vector3;
use rand::Rng;

/// Standard normal via Box-Muller.
pub fn randn(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn randc(rng: &mut impl Rng) -> C64 {
    c(randn(rng), randn(rng))
}

/// Random density operator G G† / Tr(G G†) with Ginibre G.
pub fn random_density4(rng: &mut impl Rng) -> Mat4 {
    let g = Mat4::from_fn(|_, _| randc(rng));
    let rho = g * g.adjoint();
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

pub fn random_density2(rng: &mut impl Rng) -> Mat2 {
    let g = Mat2::from_fn(|_, _| randc(rng));
    let rho = g * g.adjoint();
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary4(rng: &mut impl Rng) -> Mat4 {
    let g = Mat4::from_fn(|_, _| randc(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the phase convention so the distribution is Haar.
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..4 {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unitary2(rng: &mut impl Rng) -> Mat2 {
    let g = Mat2::from_fn(|_, _| randc(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..2 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..2 {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(randn(rng), randn(rng), randn(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}
