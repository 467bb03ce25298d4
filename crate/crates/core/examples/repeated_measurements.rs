//! Why k rounds of a weak measurement are not one stronger measurement: the
//! k-fold coefficient pair only satisfies the completion normalization at
//! the projective endpoint.
//!
//! Run with `cargo run --example repeated_measurements`.

use ugen::measurement::{power_coefficients, power_pair_normalization, single_shot_equivalent};

fn main() {
    println!("eps   k   h(eps)      2^k    equivalent single shot");
    for &eps in &[0.0, 0.3, 0.6, 0.9, 1.0] {
        for k in [2u32, 4] {
            let h = power_pair_normalization(eps, k);
            let eq = single_shot_equivalent(eps, k);
            println!(
                "{eps:.1}  {k}   {h:<9.4}  {:<5}  {:?}",
                2f64.powi(k as i32),
                eq
            );
        }
    }
    let (p, q) = power_coefficients(0.6, 3);
    println!(
        "\nk = 3 at eps = 0.6: coefficient pair ({p:.6}, {q:.6}), squares sum to {:.6} != 2",
        p * p + q * q
    );
}
