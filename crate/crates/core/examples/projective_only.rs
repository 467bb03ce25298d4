//! A case where only a projective measurement helps: the Bell state under
//! SWAP∘CNOT. The closed-form environment solution has |ζ| > 1 for every
//! ε < 1 and collapses to the valid ζ = (n_x, −n_y, n_z) at ε = 1.
//!
//! Run with `cargo run --example projective_only`.

use nalgebra::Vector3;
use ugen::analytic::{swapcnot_env_solution, swapcnot_projective_solution};
use ugen::matching::{solve_env, DEFAULT_TOL};
use ugen::measurement::{apply_closed_form, OutcomeSign, WeakMeasurement};
use ugen::qstate::{bell_phi_plus, decompose};
use ugen::unitary::swap_cnot;

fn main() {
    let axis = Vector3::new(0.4, -0.3, 0.866025403784).normalize();
    println!("axis = {:?}", axis.as_slice());
    println!("eps    |zeta|      feasible?");
    let bell = decompose(&bell_phi_plus()).unwrap();
    for k in 1..=10 {
        let eps = 0.1 * k as f64;
        let zeta = swapcnot_env_solution(eps, &axis).unwrap();
        let m = WeakMeasurement::new(eps.min(1.0), axis).unwrap();
        let post = apply_closed_form(&bell, &m, OutcomeSign::Plus)
            .unwrap()
            .post_state;
        let sol = solve_env(&swap_cnot(), &post, DEFAULT_TOL);
        println!("{eps:.2}   {:<9.5}  {:?}", zeta.norm(), sol.feasibility);
    }
    let (eps, zeta) = swapcnot_projective_solution(&axis).unwrap();
    println!(
        "\nprojective solution: eps = {eps}, zeta = {:?} (norm {:.12})",
        zeta.as_slice(),
        zeta.norm()
    );
}
