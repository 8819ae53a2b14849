//! Why expansive links are required: the hard ReLU construction A(epsilon)
//! hides its last row behind an activation that fires exponentially rarely
//! in the dimension, so no single-trajectory method can see it.
//!
//! This prints the observed activation fractions and the least-squares slope
//! of log(fraction) against d.
//!
//! Run with: cargo run --release --example relu_hardness

use nlds::diag::relu_sign_fraction;
use nlds::sim::relu_lb_matrix;

fn main() -> nlds::Result<()> {
    let epsilon = 0.1;
    let horizon = 50_000;
    let dims = [4usize, 8, 16, 32];
    let seeds = 0..8u64;

    println!("||A(0.1)||_2 at d=4: {:.6}", relu_lb_matrix(4, epsilon)?.norm());
    println!("\n   d   mean activation fraction of the last row");
    let mut points = Vec::new();
    for &d in &dims {
        let mean: f64 = seeds
            .clone()
            .map(|s| relu_sign_fraction(d, epsilon, horizon, s).map(|r| r.observed[0]))
            .sum::<nlds::Result<f64>>()?
            / seeds.clone().count() as f64;
        println!("{d:>4}   {mean:.6}");
        points.push((d as f64, mean.ln()));
    }

    // Least-squares slope of log(fraction) vs d.
    let n = points.len() as f64;
    let (sx, sy): (f64, f64) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    println!("\nlog-fraction slope across d: {slope:.4} (negative = exponential decay)");

    // At epsilon = 0 the row is identically zero and never fires at all.
    let zero = relu_sign_fraction(8, 0.0, 10_000, 0)?;
    println!("epsilon = 0 sanity check: fraction = {}", zero.observed[0]);
    Ok(())
}
