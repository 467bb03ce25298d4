//! Minimum measurement strength and optimal fidelity across the Werner
//! family W(λ) under CNOT, with the numeric search cross-checking the
//! piecewise closed form on a few points.
//!
//! Run with `cargo run --example werner_curve`.

use ugen::analytic::{minimal_measurement_strength, werner_epsilon_min, WERNER_BRANCH};
use ugen::matching::DEFAULT_TOL;
use ugen::qstate::werner_state;
use ugen::unitary::cnot;

fn main() {
    println!("lambda  eps_min(closed)  fidelity   branch");
    for k in 0..=20 {
        let lambda = k as f64 / 20.0;
        let w = werner_epsilon_min(lambda);
        println!(
            "{lambda:>6.2}  {:>15.9}  {:>9.6}  {}",
            w.epsilon_min,
            w.fidelity,
            if lambda <= WERNER_BRANCH {
                "x-axis"
            } else {
                "tilted"
            }
        );
    }

    println!("\nnumeric cross-check (grid + bisection over (eps, axis)):");
    for lambda in [0.3, 0.8, 0.95] {
        let closed = werner_epsilon_min(lambda).epsilon_min;
        let numeric = minimal_measurement_strength(&cnot(), &werner_state(lambda), DEFAULT_TOL);
        println!(
            "  lambda {lambda:.2}: closed {closed:.7}, numeric {:.7}, diff {:.1e}",
            numeric.epsilon,
            (numeric.epsilon - closed).abs()
        );
    }
}
