//! Randomized campaign over three-parameter nonlocal evolutions: constrained
//! case generation, local-unitary fidelity optimization, and two-term Kraus
//! closure to unit fidelity.
//!
//! Cases are drawn with signs arranged to make the matching conditions hard
//! to satisfy, so a sizable fraction is not product-generable at baseline;
//! those are the cases worth operating on. All per-case randomness comes
//! from a ChaCha stream keyed by (seed, id), so results are identical across
//! worker counts and run order.

use crate::channel::KrausChannel;
use crate::matching::{
    matching_system_nonlocal, min_norm_solve, solve_env, solve_env_nonlocal, EnvSolution,
};
use crate::opt::{golden_section, nelder_mead};
use crate::qstate::{fidelity_qubit, Mat2, QubitState, TwoQubitState};
use crate::unitary::{inducing_unitary, rotation_from_vector, NonlocalParams};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hinge target keeping optimized ζ strictly inside the Bloch ball.
const BALL_MARGIN: f64 = 1e-9;

/// One generated experiment (Ω(α), ρ^SE) with its baseline solvability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: u64,
    pub alpha: NonlocalParams,
    pub state: TwoQubitState,
    pub baseline: EnvSolution,
    /// Retained for processing iff the baseline is not already feasible.
    pub retained: bool,
}

/// Which stage produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// No operation needed (baseline already feasible).
    Baseline,
    /// Rotation about the system Bloch vector (fidelity exactly 1).
    AxisRotation,
    /// General SU(2) local unitary.
    GeneralSu2,
    /// Two-term Kraus channel.
    Kraus,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Baseline => "baseline",
            Stage::AxisRotation => "axis_rotation",
            Stage::GeneralSu2 => "general_su2",
            Stage::Kraus => "kraus",
        }
    }
}

/// The local operation applied to the system before the global evolution.
#[derive(Debug, Clone)]
pub enum Operation {
    None,
    LocalUnitary(Mat2),
    TwoTermKraus(KrausChannel),
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub case_id: u64,
    pub stage: Stage,
    pub operation: Operation,
    pub zeta: Vector3<f64>,
    pub residual: f64,
    pub fidelity: f64,
    /// True when the operated experiment is feasible at the requested
    /// tolerance; unresolved cases are reported, never dropped.
    pub resolved: bool,
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn draw_case(rng: &mut ChaCha12Rng, tii: f64) -> (NonlocalParams, TwoQubitState) {
    loop {
        let alpha: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let s: [f64; 3] = std::array::from_fn(|i| (2.0 * alpha[i]).sin());
        let c: [f64; 3] = std::array::from_fn(|i| (2.0 * alpha[i]).cos());
        let mut t = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    t[(i, j)] = tii;
                } else {
                    let mag = rng.random_range(0.25..=1.0);
                    t[(i, j)] = sgn(c[i] * s[j]) * mag;
                }
            }
        }
        let a: Vector3<f64> = Vector3::from_fn(|_, _| rng.random_range(-0.5..=0.5));
        let mut b: Vector3<f64> = Vector3::from_fn(|_, _| rng.random_range(-0.5..=0.5));
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            b[k] = sgn(s[i] * s[j]) * b[k].abs();
        }
        let state = TwoQubitState::new(a, b, t);
        if state.is_valid() {
            return (NonlocalParams::new(alpha), state);
        }
    }
}

/// Generate `n` constrained random cases. Each case is a pure function of
/// (seed, id): candidates failing the positivity check are redrawn from the
/// same per-case stream.
pub fn generate_cases(n: usize, seed: u64, tii: f64) -> Vec<CaseRecord> {
    (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(id.wrapping_add(1));
            let (alpha, state) = draw_case(&mut rng, tii);
            let baseline = solve_env(&alpha.unitary(), &state, crate::matching::DEFAULT_TOL);
            CaseRecord {
                id,
                alpha,
                state,
                baseline,
                retained: !baseline.is_feasible_valid(),
            }
        })
        .collect()
}

pub fn cases_to_json(cases: &[CaseRecord]) -> String {
    serde_json::to_string_pretty(cases).expect("case records serialize")
}

pub fn cases_from_json(text: &str) -> Result<Vec<CaseRecord>, serde_json::Error> {
    serde_json::from_str(text)
}

/// Rotated-state feasibility data for a candidate SO(3) rotation of the
/// system: ζ, residual and ball-violation hinge.
fn rotated_solution(
    p: &NonlocalParams,
    state: &TwoQubitState,
    o: &Matrix3<f64>,
) -> (Vector3<f64>, f64) {
    let (m, v) = matching_system_nonlocal(p, &(o * state.a), &state.b, &(o * state.t));
    min_norm_solve(&m, &v)
}

fn rotation_penalty(p: &NonlocalParams, state: &TwoQubitState, o: &Matrix3<f64>) -> f64 {
    let (zeta, residual) = rotated_solution(p, state, o);
    let hinge = (zeta.norm() - (1.0 - BALL_MARGIN)).max(0.0);
    residual * residual + hinge * hinge
}

fn classify_rotation(
    case: &CaseRecord,
    o: &Matrix3<f64>,
    stage: Stage,
    tol: f64,
) -> OptimizationResult {
    let rotated = TwoQubitState::new(o * case.state.a, case.state.b, o * case.state.t);
    let sol = solve_env_nonlocal(&case.alpha, &rotated, tol);
    let fidelity = fidelity_of_bloch(&case.state.a, &(o * case.state.a));
    let v = inducing_unitary(o).expect("search rotations are orthogonal");
    OptimizationResult {
        case_id: case.id,
        stage,
        operation: Operation::LocalUnitary(v),
        zeta: sol.zeta,
        residual: sol.residual_norm,
        fidelity,
        resolved: sol.is_feasible_valid() && sol.residual_norm <= tol,
    }
}

fn fidelity_of_bloch(a: &Vector3<f64>, a_out: &Vector3<f64>) -> f64 {
    let rho = QubitState::new(*a).map(|q| q.density());
    let out = QubitState::new(*a_out).map(|q| q.density());
    match (rho, out) {
        (Ok(r), Ok(o)) => fidelity_qubit(&r, &o),
        _ => 0.0,
    }
}

/// Stage 1 + stage 2 local-unitary search.
///
/// Stage 1 scans rotations about the system's own Bloch vector (fidelity is
/// exactly 1 there); stage 2 is a 32-start simplex over all of SU(2)
/// (rotation-vector coordinates, 2000 evaluations per start) maximizing
/// fidelity under the feasibility hinge, followed by a pure-feasibility
/// polish.
pub fn optimize_local_unitary(case: &CaseRecord, tol: f64) -> OptimizationResult {
    let p = &case.alpha;
    let a_norm = case.state.a.norm();

    // Stage 1: rotations about â keep the system state exactly.
    if a_norm > 1e-9 {
        let axis = case.state.a / a_norm;
        let mut best: Option<(f64, f64)> = None;
        for k in 0..64 {
            let theta = std::f64::consts::TAU * k as f64 / 64.0;
            let o = rotation_from_vector(&(axis * theta));
            let pen = rotation_penalty(p, &case.state, &o);
            if best.map(|(_, bp)| pen < bp).unwrap_or(true) {
                best = Some((theta, pen));
            }
        }
        let (theta0, _) = best.expect("grid nonempty");
        let window = std::f64::consts::TAU / 64.0;
        let mut f =
            |theta: f64| rotation_penalty(p, &case.state, &rotation_from_vector(&(axis * theta)));
        let (theta, _) = golden_section(&mut f, theta0 - window, theta0 + window, 1e-12);
        let o = rotation_from_vector(&(axis * theta));
        let result = classify_rotation(case, &o, Stage::AxisRotation, tol);
        if result.resolved {
            return result;
        }
    }

    // Stage 2: general SU(2), 3 rotation-vector parameters.
    let mut starts: Vec<Vector3<f64>> = Vec::with_capacity(32);
    let mut rng = ChaCha12Rng::seed_from_u64(case.id ^ 0x5851_f42d_4c95_7f2d);
    let dirs = [
        Vector3::x(),
        Vector3::y(),
        Vector3::z(),
        Vector3::new(1.0, 1.0, 1.0) / 3.0f64.sqrt(),
        Vector3::new(1.0, -1.0, 0.0) / 2.0f64.sqrt(),
        Vector3::new(0.0, 1.0, -1.0) / 2.0f64.sqrt(),
        Vector3::new(-1.0, 0.0, 1.0) / 2.0f64.sqrt(),
        Vector3::new(1.0, 1.0, -1.0) / 3.0f64.sqrt(),
    ];
    for d in dirs {
        for &ang in &[0.8, 1.8, 2.8] {
            starts.push(d * ang);
        }
    }
    while starts.len() < 32 {
        starts.push(Vector3::from_fn(|_, _| rng.random_range(-2.2..2.2)));
    }

    let mut best: Option<(OptimizationResult, f64)> = None;
    for w0 in starts {
        let mut obj = |x: &[f64]| {
            let o = rotation_from_vector(&Vector3::new(x[0], x[1], x[2]));
            let (zeta, residual) = rotated_solution(p, &case.state, &o);
            let hinge = (zeta.norm() - (1.0 - BALL_MARGIN)).max(0.0);
            let fid = fidelity_of_bloch(&case.state.a, &(o * case.state.a));
            (1.0 - fid) + 50.0 * (residual * residual + hinge * hinge)
        };
        let (x, _) = nelder_mead(&mut obj, &[w0[0], w0[1], w0[2]], 0.4, 2000, 1e-13);
        // Polish feasibility only, holding fidelity where it is.
        let mut pen = |x: &[f64]| {
            rotation_penalty(
                p,
                &case.state,
                &rotation_from_vector(&Vector3::new(x[0], x[1], x[2])),
            )
        };
        let (x, _) = nelder_mead(&mut pen, &x, 0.02, 600, 1e-16);
        let o = rotation_from_vector(&Vector3::new(x[0], x[1], x[2]));
        let result = classify_rotation(case, &o, Stage::GeneralSu2, tol);
        let score = if result.resolved {
            2.0 + result.fidelity
        } else {
            -(result.residual + (result.zeta.norm() - 1.0).max(0.0))
        };
        if best.as_ref().map(|(_, s)| score > *s).unwrap_or(true) {
            best = Some((result, score));
        }
        if let Some((r, _)) = &best {
            if r.resolved && r.fidelity >= 1.0 - 1e-9 {
                break;
            }
        }
    }
    best.expect("at least one start").0
}

/// Channel feasibility data for a candidate two-term channel with Bloch
/// action (J, t): the operated state is (Ja + t, b, JT + t bᵀ).
fn channel_state(case: &CaseRecord, ch: &KrausChannel) -> TwoQubitState {
    crate::channel::apply_channel_system_side(ch, &case.state)
}

fn channel_metrics(case: &CaseRecord, ch: &KrausChannel, tol: f64) -> OptimizationResult {
    let operated = channel_state(case, ch);
    let sol = solve_env_nonlocal(&case.alpha, &operated, tol);
    let fidelity = fidelity_of_bloch(&case.state.a, &operated.a);
    OptimizationResult {
        case_id: case.id,
        stage: Stage::Kraus,
        operation: Operation::TwoTermKraus(ch.clone()),
        zeta: sol.zeta,
        residual: sol.residual_norm,
        fidelity,
        resolved: sol.is_feasible_valid()
            && sol.residual_norm <= tol
            && fidelity >= 1.0 - 1e-6
            && ch.completeness_defect() <= 1e-10,
    }
}

/// Two-term Kraus pair from 16 raw parameters: the stacked 4×2 block is
/// orthonormalized, making completeness exact by construction.
fn kraus_from_params(x: &[f64]) -> Option<KrausChannel> {
    use crate::qstate::c;
    let mut v0 = nalgebra::Vector4::new(c(x[0], x[1]), c(x[2], x[3]), c(x[4], x[5]), c(x[6], x[7]));
    let n0 = v0.norm();
    if n0 < 1e-8 {
        return None;
    }
    v0 /= crate::qstate::cr(n0);
    let mut v1 = nalgebra::Vector4::new(
        c(x[8], x[9]),
        c(x[10], x[11]),
        c(x[12], x[13]),
        c(x[14], x[15]),
    );
    let proj = v0.dotc(&v1);
    v1 -= v0.map(|z| z * proj);
    let n1 = v1.norm();
    if n1 < 1e-8 {
        return None;
    }
    v1 /= crate::qstate::cr(n1);
    let k1 = Mat2::new(v0[0], v1[0], v0[1], v1[1]);
    let k2 = Mat2::new(v0[2], v1[2], v0[3], v1[3]);
    Some(KrausChannel::new(vec![k1, k2]))
}

fn params_from_kraus(ch: &KrausChannel) -> [f64; 16] {
    let k1 = ch.operators()[0];
    let k2 = ch.operators()[1];
    [
        k1[(0, 0)].re,
        k1[(0, 0)].im,
        k1[(1, 0)].re,
        k1[(1, 0)].im,
        k2[(0, 0)].re,
        k2[(0, 0)].im,
        k2[(1, 0)].re,
        k2[(1, 0)].im,
        k1[(0, 1)].re,
        k1[(0, 1)].im,
        k1[(1, 1)].re,
        k1[(1, 1)].im,
        k2[(0, 1)].re,
        k2[(0, 1)].im,
        k2[(1, 1)].re,
        k2[(1, 1)].im,
    ]
}

/// Dephasing-with-rotation channel about the system axis: fixes ρ^S exactly.
/// m is the transverse damping, φ the rotation angle.
fn axis_dephasing_channel(axis: &Vector3<f64>, m: f64, phi: f64) -> KrausChannel {
    // Eigenbasis of n̂·σ: columns are the ± eigenvectors.
    let n = axis;
    let up = if (1.0 + n[2]).abs() > 1e-12 {
        nalgebra::Vector2::new(
            crate::qstate::c(1.0 + n[2], 0.0),
            crate::qstate::c(n[0], n[1]),
        )
    } else {
        nalgebra::Vector2::new(crate::qstate::c(0.0, 0.0), crate::qstate::c(1.0, 0.0))
    };
    let up = up / crate::qstate::cr(up.norm());
    let dn = nalgebra::Vector2::new(-up[1].conj(), up[0].conj());
    let basis = Mat2::from_columns(&[up, dn]);
    let cfac = crate::qstate::C64::from_polar(m.clamp(0.0, 1.0), -phi);
    let k1 = basis
        * Mat2::new(
            crate::qstate::cr(1.0),
            crate::qstate::cr(0.0),
            crate::qstate::cr(0.0),
            cfac.conj(),
        )
        * basis.adjoint();
    let k2 = basis
        * Mat2::new(
            crate::qstate::cr(0.0),
            crate::qstate::cr(0.0),
            crate::qstate::cr(0.0),
            crate::qstate::cr((1.0 - m * m).max(0.0).sqrt()),
        )
        * basis.adjoint();
    KrausChannel::new(vec![k1, k2])
}

/// Two-term Kraus search: multi-start simplex over orthonormalized Kraus
/// pairs with a hard fidelity floor, seeded from the identity, the best
/// local unitary, and the axis-dephasing family.
pub fn optimize_two_term_kraus(case: &CaseRecord, tol: f64) -> OptimizationResult {
    let a_norm = case.state.a.norm();
    let axis = if a_norm > 1e-9 {
        case.state.a / a_norm
    } else {
        Vector3::z()
    };

    // Cheap 2-parameter pre-search over the exact-fixing dephasing family.
    let mut best_seed: Option<([f64; 2], f64)> = None;
    for im in 0..=20 {
        for ip in 0..32 {
            let m = im as f64 / 20.0;
            let phi = std::f64::consts::TAU * ip as f64 / 32.0;
            let ch = axis_dephasing_channel(&axis, m, phi);
            let operated = channel_state(case, &ch);
            let (zeta, residual) = {
                let (ms, v) =
                    matching_system_nonlocal(&case.alpha, &operated.a, &operated.b, &operated.t);
                min_norm_solve(&ms, &v)
            };
            let hinge = (zeta.norm() - (1.0 - BALL_MARGIN)).max(0.0);
            let pen = residual * residual + hinge * hinge;
            if best_seed.map(|(_, bp)| pen < bp).unwrap_or(true) {
                best_seed = Some(([m, phi], pen));
            }
        }
    }
    if let Some(([m0, phi0], _)) = best_seed {
        let mut obj = |x: &[f64]| {
            let ch = axis_dephasing_channel(&axis, x[0].clamp(0.0, 1.0), x[1]);
            let operated = channel_state(case, &ch);
            let (ms, v) =
                matching_system_nonlocal(&case.alpha, &operated.a, &operated.b, &operated.t);
            let (zeta, residual) = min_norm_solve(&ms, &v);
            let hinge = (zeta.norm() - (1.0 - BALL_MARGIN)).max(0.0);
            residual * residual + hinge * hinge
        };
        let (x, pen) = nelder_mead(&mut obj, &[m0, phi0], 0.08, 800, 1e-16);
        if pen <= 1e-18 {
            let ch = axis_dephasing_channel(&axis, x[0].clamp(0.0, 1.0), x[1]);
            let result = channel_metrics(case, &ch, tol);
            if result.resolved {
                return result;
            }
        }
    }

    // General two-term search over orthonormalized Kraus pairs.
    let mut rng = ChaCha12Rng::seed_from_u64(case.id ^ 0x94d0_49bb_1331_11eb);
    let unitary_best = optimize_local_unitary(case, tol);
    let mut starts: Vec<[f64; 16]> = Vec::with_capacity(32);
    starts.push(params_from_kraus(&KrausChannel::new(vec![
        Mat2::identity(),
        Mat2::zeros(),
    ])));
    if let Operation::LocalUnitary(v) = &unitary_best.operation {
        starts.push(params_from_kraus(&KrausChannel::new(vec![
            v.scale(0.85),
            v.scale(0.15f64.sqrt() * 0.0 + 0.5268),
        ])));
    }
    if let Some(([m0, phi0], _)) = best_seed {
        starts.push(params_from_kraus(&axis_dephasing_channel(&axis, m0, phi0)));
    }
    while starts.len() < 32 {
        let mut x = [0.0; 16];
        for slot in x.iter_mut() {
            *slot = rng.random_range(-1.0..1.0);
        }
        starts.push(x);
    }

    let fid_floor = 1.0 - 5e-7;
    let mut best: Option<(OptimizationResult, f64)> = None;
    for x0 in starts {
        let mut obj = |x: &[f64]| match kraus_from_params(x) {
            Some(ch) => {
                let operated = channel_state(case, &ch);
                let (ms, v) =
                    matching_system_nonlocal(&case.alpha, &operated.a, &operated.b, &operated.t);
                let (zeta, residual) = min_norm_solve(&ms, &v);
                let hinge = (zeta.norm() - (1.0 - BALL_MARGIN)).max(0.0);
                let fid = fidelity_of_bloch(&case.state.a, &operated.a);
                let fid_gap = (fid_floor - fid).max(0.0);
                residual * residual + hinge * hinge + 1e4 * fid_gap * fid_gap
            }
            None => 1e6,
        };
        let (x, pen) = nelder_mead(&mut obj, &x0, 0.25, 2000, 1e-16);
        let (x, pen) = if pen < 1e-10 {
            nelder_mead(&mut obj, &x, 0.01, 1000, 1e-18)
        } else {
            (x, pen)
        };
        if let Some(ch) = kraus_from_params(&x) {
            let result = channel_metrics(case, &ch, tol);
            let score = if result.resolved {
                2.0 + result.fidelity
            } else {
                -pen
            };
            if best.as_ref().map(|(_, s)| score > *s).unwrap_or(true) {
                best = Some((result, score));
            }
            if let Some((r, _)) = &best {
                if r.resolved {
                    break;
                }
            }
        }
    }
    best.map(|(r, _)| r).unwrap_or_else(|| OptimizationResult {
        case_id: case.id,
        stage: Stage::Kraus,
        operation: Operation::None,
        zeta: case.baseline.zeta,
        residual: case.baseline.residual_norm,
        fidelity: 0.0,
        resolved: false,
    })
}

/// Re-run a result through the dense solver and fidelity bookkeeping. Used
/// by the acceptance gate: both claims must hold at 1e-9.
pub fn revalidate(case: &CaseRecord, result: &OptimizationResult) -> bool {
    let operated = match &result.operation {
        Operation::None => case.state,
        Operation::LocalUnitary(v) => {
            let o = crate::unitary::su2_to_so3(v);
            TwoQubitState::new(o * case.state.a, case.state.b, o * case.state.t)
        }
        Operation::TwoTermKraus(ch) => crate::channel::apply_channel_system_side(ch, &case.state),
    };
    let dense = solve_env(
        &case.alpha.unitary(),
        &operated,
        crate::matching::DEFAULT_TOL,
    );
    let fid = fidelity_of_bloch(&case.state.a, &operated.a);
    (dense.residual_norm - result.residual).abs() <= 1e-9
        && (fid - result.fidelity).abs() <= 1e-9
        && (!result.resolved || dense.is_feasible_valid())
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub tii: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            seed: 1,
            tol: 1e-6,
            tii: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub tii: f64,
    pub retained: usize,
    pub resolved: usize,
    pub unresolved: usize,
    pub fidelity_min: f64,
    pub fidelity_mean: f64,
    /// Fidelity floor of the local-unitary stage alone, before any Kraus
    /// upgrade (the figure-of-merit compared against the ≈0.94 floor).
    pub unitary_fidelity_min: f64,
    pub stage_counts: StageCounts,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StageCounts {
    pub axis_rotation: usize,
    pub general_su2: usize,
    pub kraus: usize,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub cases: Vec<CaseRecord>,
    /// Final result per retained case (unitary stage, upgraded to the Kraus
    /// stage when the unitary fidelity is below 1 − 1e-6).
    pub results: Vec<OptimizationResult>,
    /// The local-unitary results before any Kraus upgrade.
    pub unitary_results: Vec<OptimizationResult>,
    pub summary: SweepSummary,
}

/// Run the full campaign: generate, filter, optimize each retained case with
/// the local-unitary stages, then close remaining fidelity gaps with
/// two-term Kraus channels.
pub fn sweep(config: &SweepConfig) -> SweepReport {
    run_pipeline(config, generate_cases(config.n, config.seed, config.tii))
}

/// Replay an imported case list through the same pipeline. Baselines and
/// retention flags are recomputed so hand-edited files stay consistent.
pub fn sweep_imported(
    config: &SweepConfig,
    mut cases: Vec<CaseRecord>,
) -> Result<SweepReport, String> {
    for case in &mut cases {
        let v = case.state.validity();
        if !v.is_valid {
            return Err(format!(
                "case {}: state is not positive semidefinite (min eigenvalue {:.3e})",
                case.id, v.min_eigenvalue
            ));
        }
        case.baseline = solve_env(
            &case.alpha.unitary(),
            &case.state,
            crate::matching::DEFAULT_TOL,
        );
        case.retained = !case.baseline.is_feasible_valid();
    }
    let mut config = config.clone();
    config.n = cases.len();
    Ok(run_pipeline(&config, cases))
}

fn run_pipeline(config: &SweepConfig, cases: Vec<CaseRecord>) -> SweepReport {
    let retained: Vec<&CaseRecord> = cases.iter().filter(|c| c.retained).collect();
    let unitary_results: Vec<OptimizationResult> = retained
        .par_iter()
        .map(|case| optimize_local_unitary(case, config.tol))
        .collect();
    let results: Vec<OptimizationResult> = retained
        .par_iter()
        .zip(unitary_results.par_iter())
        .map(|(case, unitary)| {
            if unitary.resolved && unitary.fidelity >= 1.0 - 1e-6 {
                unitary.clone()
            } else {
                let kraus = optimize_two_term_kraus(case, config.tol);
                if kraus.resolved {
                    kraus
                } else if unitary.resolved {
                    unitary.clone()
                } else {
                    kraus
                }
            }
        })
        .collect();

    let mut counts = StageCounts::default();
    let mut fid_min = f64::INFINITY;
    let mut fid_sum = 0.0;
    let mut resolved = 0;
    for r in &results {
        if r.resolved {
            resolved += 1;
            match r.stage {
                Stage::AxisRotation => counts.axis_rotation += 1,
                Stage::GeneralSu2 => counts.general_su2 += 1,
                Stage::Kraus => counts.kraus += 1,
                Stage::Baseline => {}
            }
        }
        fid_min = fid_min.min(r.fidelity);
        fid_sum += r.fidelity;
    }
    let unitary_fidelity_min = unitary_results
        .iter()
        .map(|r| r.fidelity)
        .fold(1.0, f64::min);
    let summary = SweepSummary {
        n: config.n,
        seed: config.seed,
        tol: config.tol,
        tii: config.tii,
        retained: retained.len(),
        resolved,
        unresolved: retained.len() - resolved,
        fidelity_min: if results.is_empty() { 1.0 } else { fid_min },
        fidelity_mean: if results.is_empty() {
            1.0
        } else {
            fid_sum / results.len() as f64
        },
        unitary_fidelity_min,
        stage_counts: counts,
    };
    SweepReport {
        config: config.clone(),
        cases,
        results,
        unitary_results,
        summary,
    }
}

/// Format a float with 12 significant digits, the interchange precision of
/// every CSV this crate writes.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Per-case CSV: id, alpha1..3, retained, stage, fidelity, residual,
/// zeta1..3. Non-retained cases carry their baseline data.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(
        "id,alpha1,alpha2,alpha3,retained,stage,fidelity,residual,zeta1,zeta2,zeta3\n",
    );
    let mut by_id: std::collections::HashMap<u64, &OptimizationResult> =
        std::collections::HashMap::new();
    for r in &report.results {
        by_id.insert(r.case_id, r);
    }
    for case in &report.cases {
        let alpha = case.alpha.alpha();
        let (stage, fidelity, residual, zeta) = match by_id.get(&case.id) {
            Some(r) => (r.stage, r.fidelity, r.residual, r.zeta),
            None => (
                Stage::Baseline,
                1.0,
                case.baseline.residual_norm,
                case.baseline.zeta,
            ),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            case.id,
            fmt_sig(alpha[0]),
            fmt_sig(alpha[1]),
            fmt_sig(alpha[2]),
            case.retained,
            stage.as_str(),
            fmt_sig(fidelity),
            fmt_sig(residual),
            fmt_sig(zeta[0]),
            fmt_sig(zeta[1]),
            fmt_sig(zeta[2]),
        ));
    }
    out
}
