//! A small version of the randomized campaign: generate constrained cases,
//! keep the ones that are not product-generable, resolve them with local
//! unitaries, and close any fidelity gap with two-term Kraus channels.
//!
//! Run with `cargo run --example random_sweep` (about a minute of work).

use ugen::search::{sweep, SweepConfig};

fn main() {
    let report = sweep(&SweepConfig {
        n: 200,
        seed: 1,
        tol: 1e-6,
        tii: 0.0,
    });
    let s = &report.summary;
    println!(
        "generated {} cases, retained {} hard ones, resolved {} ({} unresolved)",
        s.n, s.retained, s.resolved, s.unresolved
    );
    println!(
        "local-unitary fidelity floor {:.6}; after Kraus closure {:.9}",
        s.unitary_fidelity_min, s.fidelity_min
    );
    println!(
        "stages: {} axis rotations, {} general SU(2), {} two-term Kraus",
        s.stage_counts.axis_rotation, s.stage_counts.general_su2, s.stage_counts.kraus
    );
}
