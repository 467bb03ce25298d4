//! Given a two-qubit global unitary and a correlated system–environment
//! state, decide whether the system's reduced dynamics can be generated by
//! evolving a product-state input, and synthesize the minimal-disturbance
//! local operation (weak measurement, local unitary, or two-term Kraus
//! channel) that enforces this.
//!
//! The library works in Bloch/Pauli coordinates throughout: a two-qubit
//! state is (a, b, T) with system Bloch vector a, environment Bloch vector
//! b, and correlation matrix T. The central question, for an experiment
//! (U, ρ^SE), is whether there exists a valid environment state ζ with
//!
//! ```text
//! Tr_E(U ρ^SE U†) = Tr_E(U (ρ^S ⊗ ζ) U†),
//! ```
//!
//! and if not, what local operation on the system makes it so at the least
//! fidelity cost. See the `examples/` directory for one runnable example per
//! capability, and the `ugen` binary for batch CSV/JSON runs.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod matching;
pub mod measurement;
pub mod ncp;
mod opt;
pub mod qstate;
pub mod search;
#[cfg(test)]
pub(crate) mod testutil;
pub mod unitary;

pub use matching::{solve_env, EnvSolution, Feasibility, DEFAULT_TOL};
pub use measurement::WeakMeasurement;
pub use qstate::{QubitState, TwoQubitState};
pub use unitary::NonlocalParams;
