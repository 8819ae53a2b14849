//! Confidence boosting: split the trajectory into segments, fit each one,
//! and keep the metric median of the estimates. A corrupted stretch of data
//! — here a simulated sensor glitch that scales a window of measurements —
//! gets outvoted instead of polluting the whole fit.
//!
//! Run with: cargo run --release --example median_of_means

use nalgebra::DVector;
use nlds::loss::frob_sq_error;
use nlds::offline::{median_of_means_fit, quasi_newton, QuasiNewtonConfig};
use nlds::sim::{rand_bimod, simulate, NoiseModel, Trajectory};
use nlds::{LinkFunction, SystemSpec};

fn main() -> nlds::Result<()> {
    let d = 4;
    let horizon = 20_000;
    let a_star = rand_bimod(d, 0.9, 13)?;
    let spec =
        SystemSpec::new(a_star.clone(), LinkFunction::leaky_relu(0.5)?, NoiseModel::gaussian(1.0)?)?;

    let inner = QuasiNewtonConfig { gamma: 0.25, iters: 40, ..Default::default() };
    println!("seed   single fit     5-segment median   (glitch in segment 3)");
    for seed in 0..6u64 {
        let clean = simulate(&spec, horizon, seed, &DVector::zeros(d), 0)?;

        // The glitch: one contiguous window of measurements comes back
        // scaled 30x, as if a sensor changed units mid-recording.
        let mut states: Vec<DVector<f64>> = clean.states().to_vec();
        for x in states.iter_mut().take(11_000).skip(9_000) {
            *x *= 30.0;
        }
        let dirty = Trajectory::from_states(states, *clean.link())?;

        let single = quasi_newton(&dirty, &inner)?;
        let mom = median_of_means_fit(&dirty, 5, 50, &inner)?;
        println!(
            "{seed:>4}   {:.6e}   {:.6e}",
            frob_sq_error(&single.a_hat, &a_star),
            frob_sq_error(&mom, &a_star)
        );
    }
    println!("\nThe glitch lives in one of the five segments, so the median never sees it;");
    println!("the single fit has to average it in.");
    Ok(())
}
