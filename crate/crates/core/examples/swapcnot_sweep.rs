//! Minimum measurement strength for the rotated family
//! (R_y(θ)⊗I)Φ+(R_y(θ)†⊗I) under SWAP∘CNOT: projective at θ = 0, no
//! measurement at all at θ = π/2.
//!
//! Run with `cargo run --example swapcnot_sweep`.

use ugen::analytic::swapcnot_ry_sweep;

fn main() {
    let grid: Vec<f64> = (0..13)
        .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / 12.0)
        .collect();
    let curve = swapcnot_ry_sweep(&grid);
    println!("theta/pi   eps_min");
    for (theta, eps) in curve {
        println!("{:>8.4}   {eps:.6}", theta / std::f64::consts::PI);
    }
    println!("\na local rotation by pi/2 removes the need for any measurement.");
}
