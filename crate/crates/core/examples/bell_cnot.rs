//! The Bell-state/CNOT experiment: the bare pair is not product-generable,
//! and the weakest measurement fixing that has strength ε = 2√2/3.
//!
//! Run with `cargo run --example bell_cnot`.

use ugen::analytic::{bell_cnot_optimum, minimal_measurement_strength};
use ugen::matching::{kraus_from_env, solve_env, DEFAULT_TOL};
use ugen::measurement::{apply_closed_form, OutcomeSign};
use ugen::qstate::{bell_phi_plus, decompose, QubitState};
use ugen::unitary::cnot;

fn main() {
    let bell = decompose(&bell_phi_plus()).unwrap();
    let baseline = solve_env(&cnot(), &bell, DEFAULT_TOL);
    println!("baseline (no operation): {:?}", baseline.feasibility);

    let (measurement, zeta) = bell_cnot_optimum();
    println!(
        "closed-form optimum: epsilon = {:.9} (= 2*sqrt(2)/3), axis = {:?}",
        measurement.epsilon(),
        measurement.axis().as_slice()
    );
    let post = apply_closed_form(&bell, &measurement, OutcomeSign::Plus)
        .unwrap()
        .post_state;
    let solved = solve_env(&cnot(), &post, DEFAULT_TOL);
    println!(
        "after the measurement: {:?}, residual {:.2e}, zeta = {:?}",
        solved.feasibility,
        solved.residual_norm,
        solved.zeta.as_slice()
    );

    let found = minimal_measurement_strength(&cnot(), &bell, DEFAULT_TOL);
    println!(
        "numeric minimum: epsilon = {:.9} (difference {:.2e})",
        found.epsilon,
        (found.epsilon - measurement.epsilon()).abs()
    );

    // The environment state that generates the dynamics is |+><+|, and the
    // product experiment has an explicit Kraus representation.
    let env = QubitState::new(zeta).unwrap();
    let channel = kraus_from_env(&cnot(), &env);
    println!(
        "Kraus channel from the product input: {} operators, completeness defect {:.2e}",
        channel.operators().len(),
        channel.completeness_defect()
    );
}
