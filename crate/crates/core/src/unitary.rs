//! Global and local unitary machinery: the nonlocal KAK core Ω(α₁, α₂, α₃),
//! the SU(2) → SO(3) adjoint map, Givens rotations and the local unitaries
//! that induce them, axis-angle rotations, and entangling power.
//!
//! Ω ≜ exp[−i(α₁ σ₁⊗σ₁ + α₂ σ₂⊗σ₂ + α₃ σ₃⊗σ₃)] is diagonal in the magic
//! (Bell) basis, so it is built exactly from its four phases rather than by
//! generic matrix exponentiation. Gate classes are separated by membership of
//! each αᵢ in S = {nπ/2 : n ∈ ℤ}, tested modulo π/2.

use crate::qstate::{c, cr, dot_sigma, kron, Mat2, Mat4, C64};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Tolerance for α-membership in S = {nπ/2} when classifying gate families.
pub const FAMILY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum UnitaryError {
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not a rotation (defect {0:.3e})")]
    NotRotation(f64),
    #[error("Givens plane ({0}, {1}) invalid: indices must be distinct in 1..=3")]
    BadPlane(usize, usize),
    #[error("KAK decomposition failed to converge (residual {0:.3e})")]
    KakFailed(f64),
}

/// True when x is within `tol` of a multiple of π/2.
pub fn in_special_set(x: f64, tol: f64) -> bool {
    let r = x.rem_euclid(FRAC_PI_2);
    r <= tol || FRAC_PI_2 - r <= tol
}

/// Gate families by how many nonlocal angles lie in S = {nπ/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryFamily {
    /// All three angles in S; Ω is a local gate up to phase.
    Local,
    /// Exactly one angle outside S (index `free`, 0-based).
    OneParameter { free: usize },
    /// Exactly one angle inside S (index `special`, 0-based).
    TwoParameter { special: usize },
    /// No angle in S.
    ThreeParameter,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct NonlocalParamsJson {
    alpha: [f64; 3],
}

/// The three nonlocal angles of a two-qubit gate's KAK core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "NonlocalParamsJson", into = "NonlocalParamsJson")]
pub struct NonlocalParams {
    alpha: [f64; 3],
}

impl From<NonlocalParamsJson> for NonlocalParams {
    fn from(j: NonlocalParamsJson) -> Self {
        Self { alpha: j.alpha }
    }
}

impl From<NonlocalParams> for NonlocalParamsJson {
    fn from(p: NonlocalParams) -> Self {
        Self { alpha: p.alpha }
    }
}

impl NonlocalParams {
    pub fn new(alpha: [f64; 3]) -> Self {
        Self { alpha }
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    /// (sin 2αᵢ, cos 2αᵢ) triples used by the matching conditions.
    pub fn sin_cos_2a(&self) -> ([f64; 3], [f64; 3]) {
        let s = [0, 1, 2].map(|i| (2.0 * self.alpha[i]).sin());
        let c = [0, 1, 2].map(|i| (2.0 * self.alpha[i]).cos());
        (s, c)
    }

    pub fn family(&self) -> UnitaryFamily {
        let special: Vec<usize> = (0..3)
            .filter(|&i| in_special_set(self.alpha[i], FAMILY_TOL))
            .collect();
        match special.len() {
            3 => UnitaryFamily::Local,
            2 => UnitaryFamily::OneParameter {
                free: (0..3).find(|i| !special.contains(i)).unwrap(),
            },
            1 => UnitaryFamily::TwoParameter {
                special: special[0],
            },
            _ => UnitaryFamily::ThreeParameter,
        }
    }

    /// The gate Ω itself.
    pub fn unitary(&self) -> Mat4 {
        nonlocal_unitary(self)
    }

    /// Normalized entangling power (3 − c₁(c₂+c₃) − c₂c₃)/4 with cᵢ = cos 4αᵢ.
    pub fn entangling_power(&self) -> f64 {
        let [c1, c2, c3] = [0, 1, 2].map(|i| (4.0 * self.alpha[i]).cos());
        ((3.0 - c1 * (c2 + c3) - c2 * c3) / 4.0).clamp(0.0, 1.0)
    }
}

/// Columns of the magic-basis change matrix: Φ+, −iΦ−, Ψ−, −iΨ+.
pub(crate) fn magic_basis() -> Mat4 {
    let s = 1.0 / 2.0f64.sqrt();
    let mut q = Mat4::zeros();
    // |00>, |01>, |10>, |11> rows.
    q[(0, 0)] = cr(s);
    q[(3, 0)] = cr(s);
    q[(0, 1)] = c(0.0, -s);
    q[(3, 1)] = c(0.0, s);
    q[(1, 2)] = cr(s);
    q[(2, 2)] = cr(-s);
    q[(1, 3)] = c(0.0, -s);
    q[(2, 3)] = c(0.0, -s);
    q
}

/// Magic-basis phases of Ω: diag(e^{iθ₁}, …, e^{iθ₄}) for the column order
/// Φ+, Φ−, Ψ−, Ψ+ (σᵢ⊗σᵢ eigenvalues fix the signs).
fn magic_phases(alpha: &[f64; 3]) -> [f64; 4] {
    let [a1, a2, a3] = *alpha;
    [
        -(a1 - a2 + a3),
        -(-a1 + a2 + a3),
        a1 + a2 + a3,
        -(a1 + a2 - a3),
    ]
}

/// Ω(α) assembled exactly in the magic basis.
pub fn nonlocal_unitary(p: &NonlocalParams) -> Mat4 {
    let q = magic_basis();
    let theta = magic_phases(&p.alpha);
    let d = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| {
        C64::from_polar(1.0, theta[k])
    }));
    q * d * q.adjoint()
}

/// Orthogonal matrix induced by a 2×2 unitary, O_ij = ½ Tr(σᵢ L σⱼ L†).
pub fn su2_to_so3(l: &Mat2) -> Matrix3<f64> {
    let p = crate::qstate::paulis();
    Matrix3::from_fn(|i, j| 0.5 * (p[i] * l * p[j] * l.adjoint()).trace().re)
}

/// A rotation of the Bloch sphere by `angle` about a unit `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRotation {
    pub axis: Vector3<f64>,
    pub angle: f64,
}

impl LocalRotation {
    pub fn new(axis: Vector3<f64>, angle: f64) -> Result<Self, UnitaryError> {
        let n = axis.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(UnitaryError::NotRotation((n - 1.0).abs()));
        }
        Ok(Self { axis, angle })
    }

    /// e^{−i(θ/2) n̂·σ} = cos(θ/2) I − i sin(θ/2) n̂·σ.
    pub fn unitary(&self) -> Mat2 {
        let half = 0.5 * self.angle;
        Mat2::identity().scale(half.cos()) - dot_sigma(&self.axis).scale(half.sin()) * c(0.0, 1.0)
    }
}

/// e^{−i(θ/2) σ_y}.
pub fn rotation_y(theta: f64) -> Mat2 {
    LocalRotation::new(Vector3::y(), theta).unwrap().unitary()
}

/// Givens rotation in the (i, j) coordinate plane (1-based indices), turning
/// e_i toward e_j by θ: cos θ on the two diagonal slots, g_{ji} = sin θ,
/// g_{ij} = −sin θ.
pub fn givens(plane: (usize, usize), theta: f64) -> Result<Matrix3<f64>, UnitaryError> {
    let (i, j) = plane;
    if i == j || !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(UnitaryError::BadPlane(i, j));
    }
    let (i, j) = (i - 1, j - 1);
    let mut g = Matrix3::identity();
    g[(i, i)] = theta.cos();
    g[(j, j)] = theta.cos();
    g[(j, i)] = theta.sin();
    g[(i, j)] = -theta.sin();
    Ok(g)
}

/// Local unitary inducing a given SO(3) rotation, unique up to global phase.
/// The returned representative has its first nonzero entry real positive.
pub fn inducing_unitary(o: &Matrix3<f64>) -> Result<Mat2, UnitaryError> {
    let ortho = (o.transpose() * o - Matrix3::identity()).norm();
    let det = o.determinant();
    if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 {
        return Err(UnitaryError::NotRotation(ortho.max((det - 1.0).abs())));
    }
    // Quaternion extraction (Shepperd's method): stable at every angle.
    let tr = o.trace();
    let (w, x, y, z) = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        (
            0.25 * s,
            (o[(2, 1)] - o[(1, 2)]) / s,
            (o[(0, 2)] - o[(2, 0)]) / s,
            (o[(1, 0)] - o[(0, 1)]) / s,
        )
    } else if o[(0, 0)] > o[(1, 1)] && o[(0, 0)] > o[(2, 2)] {
        let s = (1.0 + o[(0, 0)] - o[(1, 1)] - o[(2, 2)]).sqrt() * 2.0;
        (
            (o[(2, 1)] - o[(1, 2)]) / s,
            0.25 * s,
            (o[(0, 1)] + o[(1, 0)]) / s,
            (o[(0, 2)] + o[(2, 0)]) / s,
        )
    } else if o[(1, 1)] > o[(2, 2)] {
        let s = (1.0 + o[(1, 1)] - o[(0, 0)] - o[(2, 2)]).sqrt() * 2.0;
        (
            (o[(0, 2)] - o[(2, 0)]) / s,
            (o[(0, 1)] + o[(1, 0)]) / s,
            0.25 * s,
            (o[(1, 2)] + o[(2, 1)]) / s,
        )
    } else {
        let s = (1.0 + o[(2, 2)] - o[(0, 0)] - o[(1, 1)]).sqrt() * 2.0;
        (
            (o[(1, 0)] - o[(0, 1)]) / s,
            (o[(0, 2)] + o[(2, 0)]) / s,
            (o[(1, 2)] + o[(2, 1)]) / s,
            0.25 * s,
        )
    };
    // L = w·I − i(x σ₁ + y σ₂ + z σ₃) for the unit quaternion (w, x, y, z).
    let l = Mat2::identity().scale(w) - dot_sigma(&Vector3::new(x, y, z)) * c(0.0, 1.0);
    let l = canonical_phase(&l);
    let back = su2_to_so3(&l);
    let err = (back - o).norm();
    if err > 1e-10 {
        return Err(UnitaryError::NotRotation(err));
    }
    Ok(l)
}

/// Rescale a unitary by a global phase so its first nonzero entry (row-major)
/// is real positive.
pub(crate) fn canonical_phase(l: &Mat2) -> Mat2 {
    for i in 0..2 {
        for j in 0..2 {
            let z = l[(i, j)];
            if z.norm() > 1e-8 {
                return l * (z.conj() / z.norm());
            }
        }
    }
    *l
}

/// U = (L₁⊗L₂) Ω (R₁⊗R₂).
pub fn assemble_global(p: &NonlocalParams, l1: &Mat2, l2: &Mat2, r1: &Mat2, r2: &Mat2) -> Mat4 {
    kron(l1, l2) * nonlocal_unitary(p) * kron(r1, r2)
}

/// CNOT with the system (first factor) as control.
pub fn cnot() -> Mat4 {
    let mut u = Mat4::zeros();
    u[(0, 0)] = cr(1.0);
    u[(1, 1)] = cr(1.0);
    u[(2, 3)] = cr(1.0);
    u[(3, 2)] = cr(1.0);
    u
}

pub fn swap() -> Mat4 {
    let mut u = Mat4::zeros();
    u[(0, 0)] = cr(1.0);
    u[(1, 2)] = cr(1.0);
    u[(2, 1)] = cr(1.0);
    u[(3, 3)] = cr(1.0);
    u
}

/// SWAP ∘ CNOT (CNOT applied first).
pub fn swap_cnot() -> Mat4 {
    swap() * cnot()
}

pub fn hadamard() -> Mat2 {
    let s = 1.0 / 2.0f64.sqrt();
    Mat2::new(cr(s), cr(s), cr(s), cr(-s))
}

/// Rotation annihilating the (3,1) and (3,2) entries of G·T, composed from
/// the two plane rotations
///
///   G_a(x) = [[0,0,1],[cos x,−sin x,0],[sin x,cos x,0]],
///   G_b(y) = [[cos y,0,−sin y],[0,1,0],[sin y,0,cos y]],
///
/// whose product has third row (sin x cos y, cos x, −sin x sin y); the angles
/// are solved so that row equals the unit normal of span{T·e₁, T·e₂}.
pub(crate) fn row3_annihilating_rotation(t: &Matrix3<f64>) -> Matrix3<f64> {
    let c1 = t.column(0).into_owned();
    let c2 = t.column(1).into_owned();
    let mut normal = c1.cross(&c2);
    if normal.norm() < 1e-12 {
        // Degenerate span; any unit vector orthogonal to both columns works.
        let seed = if c1.norm() > 1e-12 { c1 } else { c2 };
        if seed.norm() < 1e-12 {
            return Matrix3::identity();
        }
        let trial = if seed[0].abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        normal = seed.cross(&trial);
    }
    let g3 = normal / normal.norm();
    let cx = g3[1].clamp(-1.0, 1.0);
    let sx = (1.0 - cx * cx).max(0.0).sqrt();
    let (cy, sy) = if sx > 1e-12 {
        (g3[0] / sx, -g3[2] / sx)
    } else {
        (1.0, 0.0)
    };
    let ga = Matrix3::new(0.0, 0.0, 1.0, cx, -sx, 0.0, sx, cx, 0.0);
    let gb = Matrix3::new(cy, 0.0, -sy, 0.0, 1.0, 0.0, sy, 0.0, cy);
    ga * gb
}

/// Rotation by |w| about ŵ (Rodrigues form); w = 0 gives the identity.
pub(crate) fn rotation_from_vector(w: &Vector3<f64>) -> Matrix3<f64> {
    let angle = w.norm();
    if angle < 1e-14 {
        return Matrix3::identity();
    }
    let n = w / angle;
    let k = Matrix3::new(0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0);
    Matrix3::identity() + k.scale(angle.sin()) + (k * k).scale(1.0 - angle.cos())
}

/// Rotation whose `row`-th row points along the unit vector `dir`. Applied on
/// the left of T it zeroes the off-`row` entries of T's `row`-th column.
pub(crate) fn rotation_with_row(row: usize, dir: &Vector3<f64>) -> Matrix3<f64> {
    let d = dir / dir.norm();
    // Complete {d} to an orthonormal right-handed triple.
    let seed = if d[0].abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let u = {
        let v = seed - d.scale(seed.dot(&d));
        v / v.norm()
    };
    let w = d.cross(&u);
    let rows = match row {
        0 => [d, u, w],
        1 => [w, d, u],
        _ => [u, w, d],
    };
    let mut m = Matrix3::from_rows(&[
        rows[0].transpose(),
        rows[1].transpose(),
        rows[2].transpose(),
    ]);
    if m.determinant() < 0.0 {
        let flip = (row + 1) % 3;
        for j in 0..3 {
            m[(flip, j)] = -m[(flip, j)];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Internal KAK decomposition, used by the both-qubit construction. The public
// API takes NonlocalParams directly; this fit exists for callers that receive
// a dense 4×4 gate.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub(crate) struct Kak {
    pub phase: C64,
    pub l1: Mat2,
    pub l2: Mat2,
    pub alpha: [f64; 3],
    pub r1: Mat2,
    pub r2: Mat2,
}

impl Kak {
    pub fn assemble(&self) -> Mat4 {
        assemble_global(
            &NonlocalParams::new(self.alpha),
            &self.l1,
            &self.l2,
            &self.r1,
            &self.r2,
        )
        .scale_phase(self.phase)
    }
}

trait ScalePhase {
    fn scale_phase(self, z: C64) -> Self;
}

impl ScalePhase for Mat4 {
    fn scale_phase(self, z: C64) -> Self {
        self.map(|e| e * z)
    }
}

/// Split a 4×4 operator known to be A⊗B into its 2×2 factors, normalizing A
/// to unit determinant.
pub(crate) fn factor_product(p: &Mat4) -> Result<(Mat2, Mat2), UnitaryError> {
    // E[(2a+c),(2b+d)] = P[(2a+b),(2c+d)] = vec(A) vec(B)^T.
    let mut e = Mat4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    e[(2 * a + cc, 2 * b + d)] = p[(2 * a + b, 2 * cc + d)];
                }
            }
        }
    }
    let (mut ri, mut ci, mut best) = (0, 0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if e[(i, j)].norm() > best {
                best = e[(i, j)].norm();
                ri = i;
                ci = j;
            }
        }
    }
    if best < 1e-12 {
        return Err(UnitaryError::KakFailed(best));
    }
    let u = e.column(ci).into_owned();
    let pivot = e[(ri, ci)];
    let a = Mat2::new(u[0], u[1], u[2], u[3]);
    let v = e.row(ri).transpose().map(|z| z / pivot);
    let b = Mat2::new(v[0], v[1], v[2], v[3]).map(|z| z * pivot / u[ri]);
    // Normalize det(A) = 1, folding the scalar into B.
    let da = a.determinant();
    if da.norm() < 1e-12 {
        return Err(UnitaryError::KakFailed(da.norm()));
    }
    let s = da.sqrt();
    let a = a.map(|z| z / s);
    let b = b.map(|z| z * s);
    let resid = crate::qstate::max_abs_diff4(&kron(&a, &b), p);
    if resid > 1e-8 {
        return Err(UnitaryError::KakFailed(resid));
    }
    Ok((a, b))
}

/// KAK decomposition of an arbitrary two-qubit unitary via the magic basis.
pub(crate) fn kak_decompose(u: &Mat4) -> Result<Kak, UnitaryError> {
    let defect = crate::qstate::unitarity_defect4(u);
    if defect > 1e-9 {
        return Err(UnitaryError::NotUnitary(defect));
    }
    // Normalize to determinant 1.
    let det = u.determinant();
    let root = det.powf(0.25);
    let us = u.map(|z| z / root);

    let q = magic_basis();
    let m = q.adjoint() * us * q;
    let n = m.transpose() * m;
    let a_re = n.map(|z| z.re);
    let b_im = n.map(|z| z.im);

    // Re(N) and Im(N) are commuting real symmetric matrices; diagonalize a
    // generic combination to get a common orthogonal eigenbasis.
    let mut last_err = f64::INFINITY;
    for mu in [0.73908513, 0.41421356, 1.20205690, 2.68545200, 0.08121054] {
        let comb = a_re + b_im.scale(mu);
        let eig = comb.symmetric_eigen();
        let mut o = eig.eigenvectors;
        if o.determinant() < 0.0 {
            for i in 0..4 {
                o[(i, 0)] = -o[(i, 0)];
            }
        }
        let oc = o.map(cr);
        let d = oc.transpose() * n * oc;
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        if off > 1e-9 {
            last_err = last_err.min(off);
            continue;
        }
        let mut theta = [0.0f64; 4];
        for (k, slot) in theta.iter_mut().enumerate() {
            *slot = d[(k, k)].arg() / 2.0;
        }
        // det(D½) must be +1; the eigenphase halves are each ambiguous by π.
        let sum: f64 = theta.iter().sum();
        if (C64::from_polar(1.0, sum) - cr(1.0)).norm() > 0.5 {
            theta[0] -= std::f64::consts::PI;
        }
        let d_half_inv = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| {
            C64::from_polar(1.0, -theta[k])
        }));
        let k1 = m * o.map(cr) * d_half_inv;
        let imag = k1.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > 1e-8 {
            last_err = last_err.min(imag);
            continue;
        }
        // Angles from the magic phase pattern θ = (−a1+a2−a3, a1−a2−a3,
        // a1+a2+a3, −a1−a2+a3).
        let alpha = [
            (theta[1] + theta[2]) / 2.0,
            (theta[0] + theta[2]) / 2.0,
            (theta[2] + theta[3]) / 2.0,
        ];
        // Parity: the recovered α reproduces e^{iθ} up to a uniform sign.
        let phases = magic_phases(&alpha);
        let ratio = C64::from_polar(1.0, theta[0] - phases[0]);
        let sign = if (ratio - cr(1.0)).norm() < 0.5 {
            1.0
        } else {
            -1.0
        };

        let left = q * k1.map(|z| z * sign) * q.adjoint();
        let right = q * o.transpose().map(cr) * q.adjoint();
        let (l1, l2) = factor_product(&left)?;
        let (r1, r2) = factor_product(&right)?;
        let mut kak = Kak {
            phase: cr(1.0),
            l1,
            l2,
            alpha,
            r1,
            r2,
        };
        // Fix the global phase against the original gate.
        let built = kak.assemble();
        let phase = (u * built.adjoint()).trace() / cr(4.0);
        let phase = phase / phase.norm();
        kak.phase = phase;
        let resid = crate::qstate::max_abs_diff4(&kak.assemble(), u);
        if resid <= 1e-9 {
            return Ok(kak);
        }
        last_err = last_err.min(resid);
    }
    Err(UnitaryError::KakFailed(last_err))
}
