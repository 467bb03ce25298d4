//! Closing the fidelity gap with a two-term Kraus channel: find a retained
//! case whose best local unitary costs fidelity, resolve it at unit fidelity
//! with a two-term channel, and realize the channel as a single-ancilla
//! Stinespring dilation.
//!
//! Run with `cargo run --example kraus_closure`.

use ugen::channel::stinespring_dilate;
use ugen::search::{generate_cases, optimize_local_unitary, optimize_two_term_kraus, Operation};

fn main() {
    let cases = generate_cases(200, 17, 0.0);
    for case in cases.iter().filter(|c| c.retained) {
        let unitary = optimize_local_unitary(case, 1e-6);
        if unitary.resolved && unitary.fidelity >= 1.0 - 1e-6 {
            continue;
        }
        println!(
            "case {}: best local unitary reaches fidelity {:.6}",
            case.id, unitary.fidelity
        );
        let kraus = optimize_two_term_kraus(case, 1e-6);
        println!(
            "two-term channel: resolved = {}, fidelity {:.9}, residual {:.2e}",
            kraus.resolved, kraus.fidelity, kraus.residual
        );
        if let Operation::TwoTermKraus(ch) = &kraus.operation {
            let d = stinespring_dilate(ch).unwrap();
            println!(
                "dilation: unitarity defect {:.2e}; one ancilla qubit implements the channel",
                d.unitarity_defect()
            );
        }
        return;
    }
    println!("every retained case already resolves at unit fidelity; try another seed");
}
